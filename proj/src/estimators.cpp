#include "padefreq/estimators.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <string>

#include <fmt/format.h>

#include "padefreq/errors.hpp"

namespace padefreq {

namespace {

constexpr double kAmShift = 0.5;

// Upper end of the HAQSE shift range: the gain formula needs sin(pi q_H) != 0.
constexpr double kMaxHaqseShift = 1.0;

double clamp_delta(double delta) { return std::clamp(delta, -0.5, 0.5); }

EstimateTrace start_trace(Variant variant, const SampleRecord& record, const PeakSearch& peak) {
    EstimateTrace trace;
    trace.variant = variant;
    trace.k_star_hat = peak.k_star_hat;
    trace.sample_rate = record.sample_rate();
    trace.n_samples = record.size();
    return trace;
}

void finish_trace(EstimateTrace& trace, const InterpCounter& counter) {
    trace.interp_count = counter.count();
    const double last = trace.delta_path.back();
    if (std::abs(last) > 0.5) {
        trace.fallbacks.push_back({0, Fallback::ClampedFinal});
    }
    trace.f_hat = trace.frequency_at(static_cast<int>(trace.xi_path.size()));
}

void append_step(EstimateTrace& trace, double xi, double rho) {
    trace.delta_path.push_back(trace.delta_path.back() + xi);
    trace.xi_path.push_back(xi);
    trace.rho_path.push_back(rho);
}

// One A&M step: straddle +-0.5 bins, magnitude ratio, xi = rho / 2.
void am_step(EstimateTrace& trace, const SampleRecord& record, InterpCounter& counter) {
    const double centre = trace.k_star_hat + trace.delta_path.back();
    const double plus = std::abs(dft_at(record, centre + kAmShift, counter));
    const double minus = std::abs(dft_at(record, centre - kAmShift, counter));
    const double denom = plus + minus;
    if (!(denom > 0.0)) {
        throw NumericalError("A&M step: zero signal energy at both interpolation points");
    }
    const double rho = (plus - minus) / denom;
    append_step(trace, rho / 2.0, rho);
}

EstimateTrace run_am_family(Variant variant, const SampleRecord& record, const PeakSearch& peak, const EstimatorConfig& config, double delta0) {
    config.validate();
    EstimateTrace trace = start_trace(variant, record, peak);
    if (variant == Variant::GAM) {
        trace.alpha = sign_test(peak.bins, peak.k_star_hat);
    }
    trace.delta_path.push_back(delta0 * trace.alpha);
    InterpCounter counter;
    for (int i = 1; i <= config.iterations; ++i) {
        am_step(trace, record, counter);
    }
    finish_trace(trace, counter);
    return trace;
}

EstimateTrace proposed(const SampleRecord& record, const PeakSearch& peak, const EstimatorConfig& config) {
    config.validate();
    const int n = record.size();
    EstimateTrace trace = start_trace(Variant::Proposed, record, peak);
    trace.alpha = sign_test(peak.bins, peak.k_star_hat);
    trace.delta_path.push_back(kDefaultShift * trace.alpha);

    InterpCounter counter;
    for (int i = 1; i <= config.iterations; ++i) {
        const double shift = config.shift_at(i);
        const auto model = PadeModel::cached(n, shift);
        std::optional<KnownCoefficient> known;
        if (i == 1) {
            // delta_0 -+ q_1 = 0 on the alpha side: that point is the peak bin.
            known = KnownCoefficient{trace.alpha < 0, peak.bins[static_cast<std::size_t>(peak.k_star_hat)]};
        }
        const RefineStep step = refine_once(record, trace.k_star_hat, trace.delta_path.back(), shift, *model, counter, known);
        if (step.inversion.linear_fallback) {
            trace.fallbacks.push_back({i, Fallback::LinearModel});
        }
        if (step.inversion.clamped) {
            trace.fallbacks.push_back({i, Fallback::ClampedUpdate});
        }
        append_step(trace, step.xi, step.rho);
    }
    finish_trace(trace, counter);
    return trace;
}

EstimateTrace haqse(const SampleRecord& record, const PeakSearch& peak, const EstimatorConfig& config) {
    config.validate();
    const double q_h = config.haqse_shift(record.size());
    if (!(q_h > 0.0 && q_h < kMaxHaqseShift)) {
        throw InvalidArgument(fmt::format("HAQSE shift q_H must lie in (0, {}), got {}", kMaxHaqseShift, q_h));
    }
    const double gain = haqse_gain(q_h);
    EstimateTrace trace = start_trace(Variant::HAQSE, record, peak);
    trace.delta_path.push_back(0.0);
    InterpCounter counter;
    am_step(trace, record, counter);
    for (int i = 2; i <= config.iterations; ++i) {
        const double centre = trace.k_star_hat + trace.delta_path.back();
        const Complex plus = dft_at(record, centre + q_h, counter);
        const Complex minus = dft_at(record, centre - q_h, counter);
        const Complex sum = plus + minus;
        if (std::norm(sum) == 0.0) {
            throw NumericalError("HAQSE step: S+ + S- vanished");
        }
        const double rho = ((plus - minus) / sum).real();
        append_step(trace, gain * rho, rho);
    }
    finish_trace(trace, counter);
    return trace;
}

} // namespace

std::string_view to_string(Variant v) noexcept {
    switch (v) {
    case Variant::Proposed: return "proposed";
    case Variant::AM: return "am";
    case Variant::GAM: return "gam";
    case Variant::HAQSE: return "haqse";
    }
    return "unknown";
}

Variant parse_variant(std::string_view name) {
    std::string lower(name);
    std::ranges::transform(lower, lower.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "proposed" || lower == "pade") return Variant::Proposed;
    if (lower == "am" || lower == "a&m") return Variant::AM;
    if (lower == "gam") return Variant::GAM;
    if (lower == "haqse") return Variant::HAQSE;
    throw InvalidArgument(fmt::format("unknown estimator variant '{}'", name));
}

std::string_view to_string(Fallback f) noexcept {
    switch (f) {
    case Fallback::LinearModel: return "linear_model";
    case Fallback::ClampedUpdate: return "clamped_update";
    case Fallback::ClampedFinal: return "clamped_final";
    }
    return "unknown";
}

void EstimatorConfig::validate() const {
    if (iterations < 1) {
        throw InvalidArgument(fmt::format("iterations must be >= 1, got {}", iterations));
    }
    for (const double q : shifts) {
        if (!(q > 0.0 && q <= 0.5)) {
            throw InvalidArgument(fmt::format("shift q_i must lie in (0, 0.5], got {}", q));
        }
    }
    if (q_h && !(*q_h > 0.0 && *q_h < kMaxHaqseShift)) {
        throw InvalidArgument(fmt::format("q_H must lie in (0, {}), got {}", kMaxHaqseShift, *q_h));
    }
    if (!(beta >= 0.0 && beta <= 0.5)) {
        throw InvalidArgument(fmt::format("beta must lie in [0, 0.5], got {}", beta));
    }
}

double EstimatorConfig::shift_at(int iteration) const {
    if (iteration <= 1) {
        return kDefaultShift;
    }
    const auto idx = static_cast<std::size_t>(iteration - 2);
    return idx < shifts.size() ? shifts[idx] : kDefaultShift;
}

double EstimatorConfig::haqse_shift(int n_samples) const {
    return q_h.value_or(1.0 / std::cbrt(static_cast<double>(n_samples)));
}

double EstimateTrace::delta_at(int iteration) const {
    return clamp_delta(delta_path.at(static_cast<std::size_t>(iteration)));
}

double EstimateTrace::frequency_at(int iteration) const {
    return sample_rate * (k_star_hat + delta_at(iteration)) / n_samples;
}

int sign_test(std::span<const Complex> dft_bins, int k_star_hat) {
    const auto n = static_cast<int>(dft_bins.size());
    if (n == 0 || k_star_hat < 0 || k_star_hat >= n) {
        throw InvalidArgument("sign_test: peak index outside the DFT bins");
    }
    const Complex below = dft_bins[static_cast<std::size_t>((k_star_hat - 1 + n) % n)];
    const Complex above = dft_bins[static_cast<std::size_t>((k_star_hat + 1) % n)];
    const Complex peak = dft_bins[static_cast<std::size_t>(k_star_hat)];
    const double arg = ((below - above) * std::conj(peak)).real();
    // on-bin tones leave only rounding noise in arg; treat that as zero
    return arg < -1e-12 * std::norm(peak) ? -1 : 1;
}

RefineStep refine_once(const SampleRecord& record, int k_star_hat, double delta_prev, double shift, const PadeModel& model, InterpCounter& counter, std::optional<KnownCoefficient> known) {
    const double centre = k_star_hat + delta_prev;
    const Complex plus = (known && known->at_plus) ? known->value : dft_at(record, centre + shift, counter);
    const Complex minus = (known && !known->at_plus) ? known->value : dft_at(record, centre - shift, counter);
    const double pp = std::norm(plus);
    const double pm = std::norm(minus);
    if (!(pp + pm > 0.0)) {
        throw NumericalError("refine_once: zero signal energy at both interpolation points");
    }
    const double rho = (pp - pm) / (pp + pm);
    const Inversion inv = invert_detailed(model, rho);
    return {delta_prev + inv.xi, inv.xi, rho, inv};
}

double haqse_gain(double q_h) {
    if (!(q_h > 0.0 && q_h < kMaxHaqseShift)) {
        throw InvalidArgument(fmt::format("q_H must lie in (0, {}), got {}", kMaxHaqseShift, q_h));
    }
    const double x = std::numbers::pi * q_h;
    const double c = std::cos(x);
    return q_h * c * c / (1.0 - x * c / std::sin(x));
}

EstimateTrace estimate_proposed(const SampleRecord& record, const EstimatorConfig& config) {
    return proposed(record, find_peak(record), config);
}

EstimateTrace estimate_am(const SampleRecord& record, const EstimatorConfig& config) {
    return run_am_family(Variant::AM, record, find_peak(record), config, 0.0);
}

EstimateTrace estimate_gam(const SampleRecord& record, const EstimatorConfig& config) {
    return run_am_family(Variant::GAM, record, find_peak(record), config, config.beta);
}

EstimateTrace estimate_haqse(const SampleRecord& record, const EstimatorConfig& config) {
    return haqse(record, find_peak(record), config);
}

EstimateTrace estimate(const SampleRecord& record, const EstimatorConfig& config) {
    return estimate(record, find_peak(record), config);
}

EstimateTrace estimate(const SampleRecord& record, const PeakSearch& peak, const EstimatorConfig& config) {
    switch (config.variant) {
    case Variant::Proposed: return proposed(record, peak, config);
    case Variant::AM: return run_am_family(Variant::AM, record, peak, config, 0.0);
    case Variant::GAM: return run_am_family(Variant::GAM, record, peak, config, config.beta);
    case Variant::HAQSE: return haqse(record, peak, config);
    }
    throw InvalidArgument("unknown estimator variant");
}

} // namespace padefreq
