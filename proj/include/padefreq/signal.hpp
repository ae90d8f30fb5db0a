#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace padefreq {

using Complex = std::complex<double>;

/// Ground-truth parameters of a single complex tone.
///
/// The frequency is stored in its bin decomposition f = (k* + delta) * fs / N
/// with delta in [-0.5, 0.5]. The constructor rejects anything outside the
/// documented domain. An empty `snr` means a noiseless record.
class ToneSpec {
public:
    struct Params {
        double amplitude = 1.0;
        double sample_rate = 1.0;
        double phase = 0.0;
        int n_samples = 16;
        int bin_index = 2;
        double frac_offset = 0.0;
        std::optional<double> snr; // linear power ratio A^2 / sigma0^2
    };

    explicit ToneSpec(const Params& params);

    [[nodiscard]] double amplitude() const noexcept { return params_.amplitude; }
    [[nodiscard]] double sample_rate() const noexcept { return params_.sample_rate; }
    [[nodiscard]] double phase() const noexcept { return params_.phase; }
    [[nodiscard]] int n_samples() const noexcept { return params_.n_samples; }
    [[nodiscard]] int bin_index() const noexcept { return params_.bin_index; }
    [[nodiscard]] double frac_offset() const noexcept { return params_.frac_offset; }
    [[nodiscard]] std::optional<double> snr() const noexcept { return params_.snr; }
    [[nodiscard]] bool noiseless() const noexcept { return !params_.snr.has_value(); }
    [[nodiscard]] const Params& params() const noexcept { return params_; }

    /// f = (k* + delta) * fs / N, in Hz.
    [[nodiscard]] double frequency() const noexcept;

    /// Total complex noise variance sigma0^2 = A^2 / snr (0 when noiseless).
    [[nodiscard]] double noise_variance() const noexcept;

private:
    Params params_;
};

/// Integer/fractional split of a frequency in bin units.
struct BinDecomposition {
    int bin_index;
    double frac_offset;
};

/// Inverse of ToneSpec::frequency(): rounds f*N/fs to the nearest bin.
/// Half-way values resolve to the smaller bin (delta = +0.5).
[[nodiscard]] BinDecomposition decompose_frequency(double frequency, double sample_rate, int n_samples);

/// An immutable block of N complex samples.
class SampleRecord {
public:
    /// Record of external data. Only the sample rate is known.
    SampleRecord(std::vector<Complex> samples, double sample_rate);
    /// Synthetic record; keeps the generating spec and noise seed.
    SampleRecord(std::vector<Complex> samples, ToneSpec spec, std::optional<std::uint64_t> noise_seed);

    [[nodiscard]] std::span<const Complex> samples() const noexcept { return samples_; }
    [[nodiscard]] int size() const noexcept { return static_cast<int>(samples_.size()); }
    [[nodiscard]] double sample_rate() const noexcept { return sample_rate_; }
    [[nodiscard]] const std::optional<ToneSpec>& spec() const noexcept { return spec_; }
    [[nodiscard]] std::optional<std::uint64_t> noise_seed() const noexcept { return noise_seed_; }

private:
    std::vector<Complex> samples_;
    double sample_rate_;
    std::optional<ToneSpec> spec_;
    std::optional<std::uint64_t> noise_seed_;
};

/// Counts fractional-bin DFT evaluations within one estimation run.
class InterpCounter {
public:
    void increment() noexcept { ++count_; }
    [[nodiscard]] int count() const noexcept { return count_; }

private:
    int count_ = 0;
};

/// s(n) = A exp(j(2 pi f n / fs + phi)) + z(n), z circular Gaussian with
/// variance A^2/snr. A noisy spec requires a seed.
[[nodiscard]] SampleRecord synthesize(const ToneSpec& spec, std::optional<std::uint64_t> seed = std::nullopt);

/// DFT sum at a (possibly fractional) bin k. Increments `counter`.
[[nodiscard]] Complex dft_at(const SampleRecord& record, double k, InterpCounter& counter);
[[nodiscard]] Complex dft_at(std::span<const Complex> samples, double k);

/// Closed form of the noiseless DFT at offset `x` bins from the tone
/// (x = xi -+ q): amplitude * exp(j(N-1) pi x / N) * sin(pi x) / sin(pi x / N).
[[nodiscard]] Complex dirichlet_response(Complex amplitude, int n_samples, double x);

/// sin(pi x) / sin(pi x / N), with the removable singularity at integer
/// multiples of N evaluated as its limit.
[[nodiscard]] double dirichlet_ratio(int n_samples, double x);

struct PeakSearch {
    int k_star_hat;
    std::vector<Complex> bins; // all N integer-bin DFT values
};

/// Coarse search: argmax_k |S(k)|^2 over integer bins. Ties go to the smallest index.
[[nodiscard]] PeakSearch find_peak(const SampleRecord& record);

} // namespace padefreq
