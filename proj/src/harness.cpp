#include "padefreq/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "padefreq/errors.hpp"

#ifndef PADEFREQ_VERSION
#define PADEFREQ_VERSION "0.1.0"
#endif

namespace padefreq {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view text) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string canonical_config(const SweepConfig& c) {
    std::string s = fmt::format("kind={};label={};A={:.17g};fs={:.17g};k={};N={};snr={};I={};q={:.17g};qh={};trials={};seed={};per_iter={};grid=",
        to_string(c.kind), c.label, c.fixed.amplitude, c.fixed.sample_rate, c.fixed.bin_index, c.fixed.n_samples,
        c.fixed.snr ? fmt::format("{:.17g}", *c.fixed.snr) : "none", c.iterations, c.shift,
        c.q_h ? fmt::format("{:.17g}", *c.q_h) : "auto", c.trials, c.base_seed, c.record_per_iteration);
    for (const double g : c.grid) {
        s += fmt::format("{:.17g},", g);
    }
    s += ";estimators=";
    for (const Variant v : c.estimators) {
        s += fmt::format("{},", to_string(v));
    }
    return s;
}

// Everything that varies with the grid point.
struct GridPoint {
    int n_samples;
    std::optional<double> snr;
    std::optional<double> delta; // fixed delta, else drawn per trial
    double shift;
    std::optional<double> q_h;
};

GridPoint resolve_point(const SweepConfig& c, double value) {
    GridPoint p{c.fixed.n_samples, c.fixed.snr, std::nullopt, c.shift, c.q_h};
    switch (c.kind) {
    case SweepKind::Snr: p.snr = value; break;
    case SweepKind::NSamples: p.n_samples = static_cast<int>(std::lround(value)); break;
    case SweepKind::Delta: p.delta = value; break;
    case SweepKind::Q2:
        p.shift = value;
        p.q_h = value;
        break;
    }
    return p;
}

EstimatorConfig make_estimator_config(Variant v, const SweepConfig& c, const GridPoint& p) {
    EstimatorConfig e;
    e.variant = v;
    e.iterations = c.iterations;
    e.shifts.assign(static_cast<std::size_t>(std::max(0, c.iterations - 1)), p.shift);
    e.q_h = p.q_h;
    return e;
}

// Squared errors for one trial: [estimator][iteration], NaN marks a failure.
void run_trial(const SweepConfig& c, std::size_t grid_index, std::size_t trial, const GridPoint& point, const std::vector<EstimatorConfig>& estimators, std::span<double> out_sq, std::span<double> out_abs) {
    const std::uint64_t seed = trial_seed(c.base_seed, grid_index, trial);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-0.5, 0.5);
    std::uniform_real_distribution<double> angle(0.0, kTwoPi);

    double delta = 0.0;
    if (point.delta) {
        delta = *point.delta;
    } else {
        do {
            delta = unit(rng);
        } while (delta == -0.5);
    }
    const double phase = angle(rng);

    ToneSpec::Params params;
    params.amplitude = c.fixed.amplitude;
    params.sample_rate = c.fixed.sample_rate;
    params.phase = phase;
    params.n_samples = point.n_samples;
    params.bin_index = c.fixed.bin_index;
    params.frac_offset = delta;
    params.snr = point.snr;
    const ToneSpec spec(params);
    const SampleRecord record = synthesize(spec, splitmix64(seed));
    const double truth = spec.frequency();
    const PeakSearch peak = find_peak(record);

    const auto iters = static_cast<std::size_t>(c.iterations);
    for (std::size_t e = 0; e < estimators.size(); ++e) {
        try {
            const EstimateTrace trace = estimate(record, peak, estimators[e]);
            for (std::size_t i = 0; i < iters; ++i) {
                const double err = trace.frequency_at(static_cast<int>(i + 1)) - truth;
                out_sq[e * iters + i] = err * err;
                out_abs[e * iters + i] = std::abs(err);
            }
        } catch (const NumericalError&) {
            for (std::size_t i = 0; i < iters; ++i) {
                out_sq[e * iters + i] = std::numeric_limits<double>::quiet_NaN();
                out_abs[e * iters + i] = std::numeric_limits<double>::quiet_NaN();
            }
        }
    }
}

} // namespace

std::string_view to_string(SweepKind kind) noexcept {
    switch (kind) {
    case SweepKind::Snr: return "snr";
    case SweepKind::NSamples: return "n_samples";
    case SweepKind::Delta: return "delta";
    case SweepKind::Q2: return "q2";
    }
    return "unknown";
}

void SweepConfig::validate() const {
    if (trials < 1) {
        throw InvalidArgument(fmt::format("trials must be >= 1, got {}", trials));
    }
    if (iterations < 1) {
        throw InvalidArgument(fmt::format("iterations must be >= 1, got {}", iterations));
    }
    if (grid.empty()) {
        throw InvalidArgument("sweep grid must not be empty");
    }
    if (!std::ranges::is_sorted(grid)) {
        throw InvalidArgument("sweep grid must be sorted ascending");
    }
    if (estimators.empty()) {
        throw InvalidArgument("at least one estimator is required");
    }
    if (workers < 1) {
        throw InvalidArgument("workers must be >= 1");
    }
    if (label.find_first_of(",\"\n") != std::string::npos) {
        throw InvalidArgument("sweep label must not contain commas, quotes or newlines");
    }
    for (const double g : grid) {
        const GridPoint p = resolve_point(*this, g);
        if (p.n_samples < 2 || (kind == SweepKind::NSamples && std::abs(g - std::round(g)) > 0.0)) {
            throw InvalidArgument(fmt::format("invalid sample count {}", g));
        }
        if (p.snr && !(*p.snr > 0.0)) {
            throw InvalidArgument(fmt::format("SNR must be positive, got {}", *p.snr));
        }
        if (p.delta && !(std::abs(*p.delta) <= 0.5)) {
            throw InvalidArgument(fmt::format("delta grid value {} outside [-0.5, 0.5]", *p.delta));
        }
        if (fixed.bin_index < 0 || fixed.bin_index >= p.n_samples) {
            throw InvalidArgument(fmt::format("bin index {} outside [0, {}]", fixed.bin_index, p.n_samples - 1));
        }
        for (const Variant v : estimators) {
            make_estimator_config(v, *this, p).validate();
        }
    }
}

double crlb(double gamma, int n_samples, double sample_rate) {
    if (!(gamma > 0.0)) {
        throw InvalidArgument(fmt::format("crlb: gamma must be positive, got {}", gamma));
    }
    if (n_samples < 2) {
        throw InvalidArgument(fmt::format("crlb: N must be >= 2, got {}", n_samples));
    }
    if (!(sample_rate > 0.0)) {
        throw InvalidArgument("crlb: sample rate must be positive");
    }
    const double n = n_samples;
    return 6.0 * sample_rate * sample_rate / (4.0 * std::numbers::pi * std::numbers::pi * gamma * n * n * n);
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t grid_index, std::size_t trial_index) noexcept {
    std::uint64_t h = splitmix64(base_seed);
    h = splitmix64(h ^ static_cast<std::uint64_t>(grid_index));
    return splitmix64(h ^ static_cast<std::uint64_t>(trial_index));
}

SweepReport run_sweep(const SweepConfig& config) {
    config.validate();
    SweepReport report;
    report.metadata.seed = config.base_seed;
    report.metadata.config_hash = fnv1a(canonical_config(config));
    report.metadata.build_id = fmt::format("padefreq {} ({})", PADEFREQ_VERSION, __VERSION__);

    const std::string label = config.label.empty() ? std::string(to_string(config.kind)) : config.label;
    const auto trials = static_cast<std::size_t>(config.trials);
    const auto iters = static_cast<std::size_t>(config.iterations);
    const std::size_t n_est = config.estimators.size();
    const std::size_t stride = n_est * iters;

    for (std::size_t g = 0; g < config.grid.size(); ++g) {
        const GridPoint point = resolve_point(config, config.grid[g]);
        std::vector<EstimatorConfig> estimators;
        for (const Variant v : config.estimators) {
            estimators.push_back(make_estimator_config(v, config, point));
        }
        // Warm the model cache before threads start reading it.
        for (int i = 1; i <= config.iterations; ++i) {
            (void)PadeModel::cached(point.n_samples, estimators.front().shift_at(i));
        }

        std::vector<double> sq(trials * stride);
        std::vector<double> abs_err(trials * stride);
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t t = next++; t < trials; t = next++) {
                run_trial(config, g, t, point, estimators, std::span(sq).subspan(t * stride, stride), std::span(abs_err).subspan(t * stride, stride));
            }
        };
        const auto n_workers = static_cast<std::size_t>(std::min<int>(config.workers, config.trials));
        if (n_workers <= 1) {
            worker();
        } else {
            std::vector<std::jthread> pool;
            for (std::size_t w = 0; w < n_workers; ++w) {
                pool.emplace_back(worker);
            }
        }

        const double bound = point.snr ? crlb(*point.snr, point.n_samples, config.fixed.sample_rate) : 0.0;
        for (std::size_t e = 0; e < n_est; ++e) {
            for (std::size_t i = 0; i < iters; ++i) {
                if (!config.record_per_iteration && i + 1 != iters) {
                    continue;
                }
                // Fixed trial order keeps the sum independent of scheduling.
                double sum = 0.0;
                double max_abs = 0.0;
                int failures = 0;
                for (std::size_t t = 0; t < trials; ++t) {
                    const double v = sq[t * stride + e * iters + i];
                    if (std::isnan(v)) {
                        ++failures;
                        continue;
                    }
                    sum += v;
                    max_abs = std::max(max_abs, abs_err[t * stride + e * iters + i]);
                }
                SweepRow row;
                row.sweep = label;
                row.grid_value = config.grid[g];
                row.estimator = config.estimators[e];
                row.iteration = static_cast<int>(i + 1);
                row.trials = config.trials;
                row.failures = failures;
                const int used = config.trials - failures;
                row.mse = used > 0 ? sum / used : std::numeric_limits<double>::quiet_NaN();
                row.crlb = bound;
                row.mse_over_crlb = bound > 0.0 ? row.mse / bound : std::numeric_limits<double>::quiet_NaN();
                row.seed = config.base_seed;
                row.max_abs_error = max_abs;
                report.rows.push_back(std::move(row));
            }
        }
    }
    return report;
}

std::vector<SummaryRow> summarize(const SweepReport& report) {
    if (report.rows.empty()) {
        throw InvalidArgument("summarize: empty report");
    }
    struct Acc {
        Variant estimator;
        int iteration;
        double min = std::numeric_limits<double>::infinity();
        double max = -std::numeric_limits<double>::infinity();
        double sum = 0.0;
        int count = 0;
        double argmin = 0.0;
    };
    std::vector<Acc> accs;
    for (const SweepRow& row : report.rows) {
        if (!std::isfinite(row.mse_over_crlb)) {
            continue;
        }
        auto it = std::ranges::find_if(accs, [&](const Acc& a) { return a.estimator == row.estimator && a.iteration == row.iteration; });
        if (it == accs.end()) {
            accs.push_back({row.estimator, row.iteration});
            it = std::prev(accs.end());
        }
        if (row.mse_over_crlb < it->min) {
            it->min = row.mse_over_crlb;
            it->argmin = row.grid_value;
        }
        it->max = std::max(it->max, row.mse_over_crlb);
        it->sum += row.mse_over_crlb;
        ++it->count;
    }
    std::vector<SummaryRow> out;
    for (const Acc& a : accs) {
        out.push_back({a.estimator, a.iteration, a.min, a.max, a.sum / a.count, a.argmin});
    }
    return out;
}

const SummaryRow* find_summary(const std::vector<SummaryRow>& rows, Variant estimator, int iteration) {
    const auto it = std::ranges::find_if(rows, [&](const SummaryRow& r) { return r.estimator == estimator && r.iteration == iteration; });
    return it == rows.end() ? nullptr : &*it;
}

std::vector<double> linspace(double first, double last, int count) {
    if (count < 1) {
        throw InvalidArgument("linspace: count must be >= 1");
    }
    if (count == 1) {
        return {first};
    }
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        out[static_cast<std::size_t>(i)] = first + (last - first) * i / (count - 1);
    }
    out.back() = last;
    return out;
}

} // namespace padefreq
