#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "padefreq/estimators.hpp"

namespace padefreq {

enum class SweepKind { Snr, NSamples, Delta, Q2 };

[[nodiscard]] std::string_view to_string(SweepKind kind) noexcept;

/// Fixed tone parameters shared by every trial of a sweep. The swept
/// quantity overrides its field at each grid point.
struct ToneTemplate {
    double amplitude = 1.0;
    double sample_rate = 1.0;
    int bin_index = 2;
    int n_samples = 16;
    std::optional<double> snr = 100.0; // linear; empty = noiseless
};

struct SweepConfig {
    SweepKind kind = SweepKind::Snr;
    /// Snr: linear gamma. NSamples: N. Delta: delta. Q2: q_2 (= q_H).
    std::vector<double> grid;
    ToneTemplate fixed;
    int iterations = 2;
    /// q_2..q_I for the Pade estimator (default 0.25).
    double shift = kDefaultShift;
    /// HAQSE shift; defaults to N^(-1/3) at each grid point.
    std::optional<double> q_h;
    int trials = 10000;
    std::uint64_t base_seed = 1;
    std::vector<Variant> estimators{Variant::Proposed, Variant::AM, Variant::GAM, Variant::HAQSE};
    bool record_per_iteration = true;
    /// Threads used for trials; results do not depend on it.
    int workers = 1;
    /// Text for the `sweep` column; empty means to_string(kind).
    std::string label;

    void validate() const;
};

struct SweepRow {
    std::string sweep;
    double grid_value = 0.0;
    Variant estimator = Variant::Proposed;
    int iteration = 0;
    int trials = 0;
    double mse = 0.0;
    double crlb = 0.0;          // 0 in noiseless mode
    double mse_over_crlb = 0.0; // NaN in noiseless mode
    int failures = 0;
    std::uint64_t seed = 0;
    double max_abs_error = 0.0; // not serialized

    /// Rows with more than 1% failed trials are not trustworthy.
    [[nodiscard]] bool valid() const noexcept { return failures * 100 <= trials; }
};

struct SweepMetadata {
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
    std::string build_id;
};

struct SweepReport {
    std::vector<SweepRow> rows;
    SweepMetadata metadata;
};

/// 6 fs^2 / (4 pi^2 gamma N^3), in Hz^2.
[[nodiscard]] double crlb(double gamma, int n_samples, double sample_rate);

/// Seed for one (grid point, trial); independent of evaluation order.
[[nodiscard]] std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t grid_index, std::size_t trial_index) noexcept;

/// Monte Carlo sweep. Every estimator sees the same record in each trial.
[[nodiscard]] SweepReport run_sweep(const SweepConfig& config);

struct SummaryRow {
    Variant estimator;
    int iteration;
    double min;
    double max;
    double mean;
    double argmin; // grid value at the minimum
};

/// Min/max/mean of mse_over_crlb per (estimator, iteration). Rows without a
/// finite ratio are skipped. Throws InvalidArgument on an empty report.
[[nodiscard]] std::vector<SummaryRow> summarize(const SweepReport& report);

[[nodiscard]] const SummaryRow* find_summary(const std::vector<SummaryRow>& rows, Variant estimator, int iteration);

/// Evenly spaced values, endpoints included.
[[nodiscard]] std::vector<double> linspace(double first, double last, int count);

/// CSV with header
/// sweep,grid_value,estimator,iteration,trials,mse,crlb,mse_over_crlb,failures,seed
/// and floating-point fields at 9 significant digits.
[[nodiscard]] std::string csv_header();
[[nodiscard]] std::string to_csv_line(const SweepRow& row);
void write_csv(std::ostream& out, const SweepReport& report);
[[nodiscard]] std::vector<SweepRow> read_csv(std::istream& in);

} // namespace padefreq
