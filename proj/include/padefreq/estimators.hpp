#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "padefreq/signal.hpp"
#include "padefreq/updating_function.hpp"

namespace padefreq {

enum class Variant { Proposed, AM, GAM, HAQSE };

[[nodiscard]] std::string_view to_string(Variant v) noexcept;
/// Accepts "proposed", "am", "gam", "haqse" (case-insensitive).
[[nodiscard]] Variant parse_variant(std::string_view name);

inline constexpr double kDefaultShift = 0.25;
inline constexpr double kGamBeta = 0.25;

struct EstimatorConfig {
    Variant variant = Variant::Proposed;
    int iterations = 2;
    /// Shifts q_2..q_I for the Pade estimator; missing entries use 0.25.
    /// q_1 is always 0.25 (the single-interpolation initialization needs it).
    std::vector<double> shifts;
    /// HAQSE shift; defaults to N^(-1/3).
    std::optional<double> q_h;
    /// GAM initial offset magnitude.
    double beta = kGamBeta;

    /// Throws InvalidArgument on I < 1, q outside (0, 0.5], q_H outside (0, 1).
    void validate() const;
    /// Shift used at iteration i (1-based).
    [[nodiscard]] double shift_at(int iteration) const;
    [[nodiscard]] double haqse_shift(int n_samples) const;
};

enum class Fallback {
    LinearModel,   // Pade model degenerate, rho / c1 used instead
    ClampedUpdate, // |xi_hat| hit the 1.5 q safety bound
    ClampedFinal,  // final delta clamped into [-0.5, 0.5]
};

[[nodiscard]] std::string_view to_string(Fallback f) noexcept;

struct FallbackEvent {
    int iteration; // 0 for events after the last iteration
    Fallback kind;
};

struct EstimateTrace {
    Variant variant = Variant::Proposed;
    int k_star_hat = 0;
    int alpha = 1;
    std::vector<double> delta_path; // delta_0 .. delta_I
    std::vector<double> xi_path;    // xi_1 .. xi_I
    std::vector<double> rho_path;   // rho_1 .. rho_I
    int interp_count = 0;
    double sample_rate = 1.0;
    int n_samples = 0;
    double f_hat = 0.0;
    std::vector<FallbackEvent> fallbacks;

    /// delta_i clamped to [-0.5, 0.5]; i in [0, I].
    [[nodiscard]] double delta_at(int iteration) const;
    /// fs (k* + delta_i) / N for i in [1, I].
    [[nodiscard]] double frequency_at(int iteration) const;
};

/// alpha = sign(Re{(S(k*-1) - S(k*+1)) conj(S(k*))}), indices mod N, +1 on zero.
[[nodiscard]] int sign_test(std::span<const Complex> dft_bins, int k_star_hat);

struct RefineStep {
    double delta;
    double xi;
    double rho;
    Inversion inversion;
};

/// Coefficient already available at one of the two interpolation points.
struct KnownCoefficient {
    bool at_plus; // true: S(k*+delta+q) is known; false: S(k*+delta-q)
    Complex value;
};

/// One Pade refinement: interpolate at k* + delta_prev +- q, form
/// rho = (|S+|^2 - |S-|^2) / (|S+|^2 + |S-|^2), invert, update delta.
[[nodiscard]] RefineStep refine_once(const SampleRecord& record, int k_star_hat, double delta_prev, double shift, const PadeModel& model, InterpCounter& counter, std::optional<KnownCoefficient> known = std::nullopt);

[[nodiscard]] EstimateTrace estimate_proposed(const SampleRecord& record, const EstimatorConfig& config);
[[nodiscard]] EstimateTrace estimate_am(const SampleRecord& record, const EstimatorConfig& config);
[[nodiscard]] EstimateTrace estimate_gam(const SampleRecord& record, const EstimatorConfig& config);
[[nodiscard]] EstimateTrace estimate_haqse(const SampleRecord& record, const EstimatorConfig& config);

/// HAQSE gain q cos^2(pi q) / (1 - pi q cot(pi q)).
[[nodiscard]] double haqse_gain(double q_h);

/// Dispatches on config.variant.
[[nodiscard]] EstimateTrace estimate(const SampleRecord& record, const EstimatorConfig& config);
/// Same, reusing a coarse search already done on this record.
[[nodiscard]] EstimateTrace estimate(const SampleRecord& record, const PeakSearch& peak, const EstimatorConfig& config);

} // namespace padefreq
