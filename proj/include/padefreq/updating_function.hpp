#pragma once

#include <array>
#include <complex>
#include <memory>
#include <string>

namespace padefreq {

/// Ratio of the two shifted Dirichlet powers as a function of the residual
/// offset xi:
///
///   f(xi) = (S(xi, q) - S(xi, -q)) / (S(xi, q) + S(xi, -q)),
///   S(xi, +-q) = sin^2(pi (xi -+ q)) / sin^2(pi (xi -+ q) / N).
///
/// f is odd and strictly increasing on |xi| <= q for 0 < q <= 0.5; outside
/// that interval the function is rejected.
[[nodiscard]] double eval_f(int n_samples, double shift, double xi);

/// Odd Taylor coefficients of f at xi = 0.
struct TaylorCoeffs {
    double c1;
    double c3;
    double c5;
};

/// Coefficients of the simplified (3,3) Pade approximant
/// f_hat(xi) = (a1 xi + a3 xi^3) / (1 + b2 xi^2).
struct PadeCoeffs {
    double a1;
    double a3;
    double b2;
};

/// Taylor coefficients for (N, q). Computed with truncated power-series
/// arithmetic, checked against eval_f, and cached per (N, q).
/// Throws NumericalError when the series disagrees with eval_f.
[[nodiscard]] TaylorCoeffs taylor_coeffs(int n_samples, double shift);

/// a1 = c1, a3 = c3 - c1 c5 / c3, b2 = -c5 / c3, so that the approximant's
/// series agrees with c1 xi + c3 xi^3 + c5 xi^5 and the error is O(xi^7).
/// Throws NumericalError on c3 == 0.
[[nodiscard]] PadeCoeffs build_pade(const TaylorCoeffs& taylor);

/// Evaluates the rational approximant at xi.
[[nodiscard]] double eval_pade(const PadeCoeffs& pade, double xi) noexcept;

/// Taylor + Pade coefficients for one (N, q). Immutable once built.
///
/// A model whose c3 vanishes cannot form the Pade approximant; it is kept
/// with `degenerate() == true` and inverts with the linear rule rho / c1.
class PadeModel {
public:
    PadeModel(int n_samples, double shift);

    /// Model from known Taylor coefficients (regression pinning, tests).
    [[nodiscard]] static PadeModel from_taylor(int n_samples, double shift, const TaylorCoeffs& taylor);

    /// Shared cached instance; concurrent readers are safe.
    [[nodiscard]] static std::shared_ptr<const PadeModel> cached(int n_samples, double shift);

    [[nodiscard]] int n_samples() const noexcept { return n_samples_; }
    [[nodiscard]] double shift() const noexcept { return shift_; }
    [[nodiscard]] const TaylorCoeffs& taylor() const noexcept { return taylor_; }
    [[nodiscard]] const PadeCoeffs& pade() const noexcept { return pade_; }
    [[nodiscard]] bool degenerate() const noexcept { return degenerate_; }

    /// Debug row: N,q,c1,c3,c5,a1,a3,b2 with 12 significant digits.
    [[nodiscard]] std::string csv_row() const;
    [[nodiscard]] static std::string csv_header();

private:
    PadeModel(int n_samples, double shift, const TaylorCoeffs& taylor);

    int n_samples_;
    double shift_;
    TaylorCoeffs taylor_{};
    PadeCoeffs pade_{};
    bool degenerate_ = false;
};

/// Monic cubic xi^3 + k2 xi^2 + k1 xi + k0 = 0 obtained by equating the
/// approximant to a measured ratio rho.
struct CubicProblem {
    double k0;
    double k1;
    double k2;
    double rho;
};

/// k2 = -rho b2 / a3, k1 = a1 / a3, k0 = -rho / a3. Requires a3 != 0.
[[nodiscard]] CubicProblem make_cubic(const PadeCoeffs& pade, double rho);

using CubicRoots = std::array<std::complex<double>, 3>;

/// All three roots of a monic real cubic (trigonometric form when all roots
/// are real, Cardano otherwise), each refined by Newton steps.
[[nodiscard]] CubicRoots solve_monic_cubic(double k2, double k1, double k0);

/// Roots of the cubic formed from `model` and `rho`. Throws NumericalError
/// when the model has a3 == 0 (use invert(), which falls back to linear).
[[nodiscard]] CubicRoots solve_cubic(const PadeModel& model, double rho);

/// Result of inverting a measured ratio.
struct Inversion {
    double xi = 0.0;
    bool linear_fallback = false; // c3 == 0 or a3 == 0
    bool clamped = false;         // |xi| hit the 1.5 q safety bound
};

/// Smallest-magnitude real root of the Pade cubic, clamped to +-1.5 q.
[[nodiscard]] Inversion invert_detailed(const PadeModel& model, double rho);
[[nodiscard]] double invert(const PadeModel& model, double rho);

/// Bound applied to every per-iteration correction, as a multiple of q.
inline constexpr double kSafetyClampFactor = 1.5;

} // namespace padefreq
