#include "padefreq/signal.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <utility>

#include <fmt/format.h>

#include "padefreq/errors.hpp"

namespace padefreq {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// |x| below this is treated as the removable singularity of sin(pi x)/sin(pi x/N).
constexpr double kSingularityTol = 1e-12;

// Relative margin under which two bin powers count as a tie.
constexpr double kPeakTieTol = 1e-12;

} // namespace

ToneSpec::ToneSpec(const Params& params) : params_(params) {
    if (params.n_samples < 2) {
        throw InvalidArgument(fmt::format("n_samples must be >= 2, got {}", params.n_samples));
    }
    if (!(params.amplitude > 0.0) || !std::isfinite(params.amplitude)) {
        throw InvalidArgument(fmt::format("amplitude must be positive, got {}", params.amplitude));
    }
    if (!(params.sample_rate > 0.0) || !std::isfinite(params.sample_rate)) {
        throw InvalidArgument(fmt::format("sample_rate must be positive, got {}", params.sample_rate));
    }
    if (!std::isfinite(params.phase)) {
        throw InvalidArgument("phase must be finite");
    }
    if (params.bin_index < 0 || params.bin_index >= params.n_samples) {
        throw InvalidArgument(fmt::format("bin_index must lie in [0, {}], got {}", params.n_samples - 1, params.bin_index));
    }
    if (!(std::abs(params.frac_offset) <= 0.5)) {
        throw InvalidArgument(fmt::format("frac_offset must lie in [-0.5, 0.5], got {}", params.frac_offset));
    }
    if (params.snr && (!(*params.snr > 0.0) || std::isnan(*params.snr))) {
        throw InvalidArgument(fmt::format("snr must be positive, got {}", *params.snr));
    }
}

double ToneSpec::frequency() const noexcept {
    return (params_.bin_index + params_.frac_offset) * params_.sample_rate / params_.n_samples;
}

double ToneSpec::noise_variance() const noexcept {
    if (!params_.snr) {
        return 0.0;
    }
    return params_.amplitude * params_.amplitude / *params_.snr;
}

BinDecomposition decompose_frequency(double frequency, double sample_rate, int n_samples) {
    if (n_samples < 2 || !(sample_rate > 0.0)) {
        throw InvalidArgument("decompose_frequency: need n_samples >= 2 and sample_rate > 0");
    }
    const double bins = frequency * n_samples / sample_rate;
    // ceil(x - 0.5) sends exact half-way points to the lower bin.
    const double k = std::ceil(bins - 0.5);
    return {static_cast<int>(k), bins - k};
}

SampleRecord::SampleRecord(std::vector<Complex> samples, double sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
    if (samples_.empty()) {
        throw InvalidArgument("sample record must not be empty");
    }
    if (!(sample_rate_ > 0.0)) {
        throw InvalidArgument("sample_rate must be positive");
    }
}

SampleRecord::SampleRecord(std::vector<Complex> samples, ToneSpec spec, std::optional<std::uint64_t> noise_seed)
    : samples_(std::move(samples)), sample_rate_(spec.sample_rate()), spec_(std::move(spec)), noise_seed_(noise_seed) {
    if (static_cast<int>(samples_.size()) != spec_->n_samples()) {
        throw InvalidArgument("sample count does not match spec.n_samples");
    }
}

SampleRecord synthesize(const ToneSpec& spec, std::optional<std::uint64_t> seed) {
    const int n = spec.n_samples();
    const double omega = kTwoPi * spec.frequency() / spec.sample_rate();
    std::vector<Complex> samples(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        samples[static_cast<std::size_t>(i)] = std::polar(spec.amplitude(), omega * i + spec.phase());
    }
    if (!spec.noiseless()) {
        if (!seed) {
            throw InvalidArgument("a noisy spec requires a noise seed");
        }
        std::mt19937_64 rng(*seed);
        std::normal_distribution<double> gauss(0.0, std::sqrt(spec.noise_variance() / 2.0));
        for (auto& s : samples) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            s += Complex(re, im);
        }
    }
    return SampleRecord(std::move(samples), spec, spec.noiseless() ? std::nullopt : seed);
}

Complex dft_at(std::span<const Complex> samples, double k) {
    const double n = static_cast<double>(samples.size());
    Complex acc{0.0, 0.0};
    for (std::size_t i = 0; i < samples.size(); ++i) {
        // Reduce k*i mod N before scaling so large indices keep full precision.
        const double turns = std::fmod(k * static_cast<double>(i), n) / n;
        acc += samples[i] * std::polar(1.0, -kTwoPi * turns);
    }
    return acc;
}

Complex dft_at(const SampleRecord& record, double k, InterpCounter& counter) {
    counter.increment();
    return dft_at(record.samples(), k);
}

double dirichlet_ratio(int n_samples, double x) {
    const double n = n_samples;
    const double m = std::round(x / n);
    if (std::abs(x - m * n) < kSingularityTol) {
        // limit of sin(pi x)/sin(pi x/N) at x = mN is N (-1)^(m(N-1))
        const auto parity = static_cast<long long>(m) * (n_samples - 1);
        return (parity % 2 == 0) ? n : -n;
    }
    return std::sin(std::numbers::pi * x) / std::sin(std::numbers::pi * x / n);
}

Complex dirichlet_response(Complex amplitude, int n_samples, double x) {
    const double n = n_samples;
    return amplitude * std::polar(1.0, (n - 1.0) * std::numbers::pi * x / n) * dirichlet_ratio(n_samples, x);
}

PeakSearch find_peak(const SampleRecord& record) {
    const int n = record.size();
    PeakSearch out{0, std::vector<Complex>(static_cast<std::size_t>(n))};

    // Integer bins: twiddles come from one table of N roots of unity.
    std::vector<Complex> roots(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        roots[static_cast<std::size_t>(i)] = std::polar(1.0, -kTwoPi * i / n);
    }
    const auto samples = record.samples();
    double best = -1.0;
    for (int k = 0; k < n; ++k) {
        Complex acc{0.0, 0.0};
        for (int i = 0; i < n; ++i) {
            const auto idx = static_cast<std::size_t>((static_cast<long long>(k) * i) % n);
            acc += samples[static_cast<std::size_t>(i)] * roots[idx];
        }
        out.bins[static_cast<std::size_t>(k)] = acc;
        const double power = std::norm(acc);
        if (power > best * (1.0 + kPeakTieTol)) {
            best = power;
            out.k_star_hat = k;
        }
    }
    return out;
}

} // namespace padefreq
