#include "padefreq/updating_function.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <shared_mutex>
#include <utility>

#include <fmt/format.h>

#include "padefreq/errors.hpp"
#include "padefreq/signal.hpp"

namespace padefreq {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr long double kPiL = std::numbers::pi_v<long double>;

// Slack on |xi| <= q so that xi = +-q computed as k*+delta+-q round trips.
constexpr double kDomainSlack = 1e-12;

// Relative imaginary part below which a cubic root is treated as real.
constexpr double kRealRootTol = 1e-7;

// |a3| / |a1| below this is treated as a3 == 0.
constexpr double kVanishingA3 = 1e-14;

void check_model_domain(int n_samples, double shift) {
    if (n_samples < 2) {
        throw InvalidArgument(fmt::format("n_samples must be >= 2, got {}", n_samples));
    }
    if (!(shift > 0.0 && shift <= 0.5)) {
        throw InvalidArgument(fmt::format("shift q must lie in (0, 0.5], got {}", shift));
    }
}

// Truncated power series in t, degree kDegree, in extended precision. Enough to read off the
// Taylor coefficients of f through t^7 (t^7 is used only for validation).
constexpr std::size_t kDegree = 7;

struct Series {
    std::array<long double, kDegree + 1> c{};

    friend Series operator+(const Series& a, const Series& b) {
        Series r;
        for (std::size_t i = 0; i <= kDegree; ++i) {
            r.c[i] = a.c[i] + b.c[i];
        }
        return r;
    }
    friend Series operator-(const Series& a, const Series& b) {
        Series r;
        for (std::size_t i = 0; i <= kDegree; ++i) {
            r.c[i] = a.c[i] - b.c[i];
        }
        return r;
    }
    friend Series operator*(const Series& a, const Series& b) {
        Series r;
        for (std::size_t i = 0; i <= kDegree; ++i) {
            for (std::size_t j = 0; i + j <= kDegree; ++j) {
                r.c[i + j] += a.c[i] * b.c[j];
            }
        }
        return r;
    }
    friend Series operator/(const Series& a, const Series& b) {
        if (b.c[0] == 0.0L) {
            throw NumericalError("power-series division by a series with zero constant term");
        }
        Series r;
        for (std::size_t i = 0; i <= kDegree; ++i) {
            long double acc = a.c[i];
            for (std::size_t j = 1; j <= i; ++j) {
                acc -= b.c[j] * r.c[i - j];
            }
            r.c[i] = acc / b.c[0];
        }
        return r;
    }

    [[nodiscard]] long double operator()(long double t) const {
        long double acc = 0.0L;
        for (std::size_t i = kDegree + 1; i-- > 0;) {
            acc = acc * t + c[i];
        }
        return acc;
    }
};

// sin(a + b t) = sum_k sin(a + k pi/2) b^k t^k / k!
Series sin_series(long double a, long double b) {
    Series s;
    long double scale = 1.0L;
    for (std::size_t k = 0; k <= kDegree; ++k) {
        s.c[k] = std::sin(a + static_cast<long double>(k) * kPiL / 2.0L) * scale;
        scale *= b / static_cast<long double>(k + 1);
    }
    return s;
}

// sin^2(pi x) / sin^2(pi x / N) expanded around x = x0.
Series dirichlet_power_series(int n_samples, double x0) {
    const long double n = n_samples;
    const Series num = sin_series(kPiL * x0, kPiL);
    const Series den = sin_series(kPiL * x0 / n, kPiL / n);
    return (num * num) / (den * den);
}

Series updating_series(int n_samples, double shift) {
    const Series plus = dirichlet_power_series(n_samples, -shift);  // S(xi, +q) = g(xi - q)
    const Series minus = dirichlet_power_series(n_samples, shift);  // S(xi, -q) = g(xi + q)
    return (plus - minus) / (plus + minus);
}

struct ModelKey {
    int n_samples;
    double shift;
    auto operator<=>(const ModelKey&) const = default;
};

struct ModelCache {
    std::shared_mutex mutex;
    std::map<ModelKey, std::shared_ptr<const PadeModel>> models;
    std::map<ModelKey, TaylorCoeffs> taylor;
};

ModelCache& cache() {
    static ModelCache instance;
    return instance;
}

TaylorCoeffs compute_taylor(int n_samples, double shift) {
    const Series series = updating_series(n_samples, shift);
    const TaylorCoeffs out{static_cast<double>(series.c[1]), static_cast<double>(series.c[3]), static_cast<double>(series.c[5])};

    if (!std::isfinite(out.c1) || !std::isfinite(out.c3) || !std::isfinite(out.c5)) {
        throw NumericalError(fmt::format("non-finite Taylor coefficients for N={}, q={}", n_samples, shift));
    }
    if (!(out.c1 > 0.0)) {
        throw NumericalError(fmt::format("expected c1 > 0 for N={}, q={}, got {}", n_samples, shift, out.c1));
    }
    // The even coefficients must vanish and the series must agree with the
    // direct formula near the origin.
    const long double scale = std::abs(series.c[1]) + std::abs(series.c[3]) + std::abs(series.c[5]);
    for (std::size_t k = 0; k <= kDegree; k += 2) {
        if (std::abs(series.c[k]) > 1e-9 * scale) {
            throw NumericalError(fmt::format("even Taylor term c{} = {} does not vanish for N={}, q={}", k, series.c[k], n_samples, shift));
        }
    }
    for (const double fraction : {0.01, 0.05}) {
        const double xi = fraction * shift;
        const double exact = eval_f(n_samples, shift, xi);
        const double approx = static_cast<double>(series(xi));
        if (std::abs(exact - approx) > 1e-6 * std::abs(exact)) {
            throw NumericalError(fmt::format("Taylor series for N={}, q={} disagrees with f at xi={}: {} vs {}", n_samples, shift, xi, approx, exact));
        }
    }
    return out;
}

std::complex<double> polish_root(double k2, double k1, double k0, std::complex<double> z) {
    auto residual = [&](std::complex<double> x) { return ((x + k2) * x + k1) * x + k0; };
    auto derivative = [&](std::complex<double> x) { return (3.0 * x + 2.0 * k2) * x + k1; };
    for (int iter = 0; iter < 3; ++iter) {
        const auto p = residual(z);
        const auto dp = derivative(z);
        if (p == 0.0 || dp == 0.0) {
            break;
        }
        const auto next = z - p / dp;
        if (std::abs(residual(next)) >= std::abs(p)) {
            break;
        }
        z = next;
    }
    return z;
}

// Newton on a3 x^3 - rho b2 x^2 + a1 x - rho, which stays well scaled when
// a3 is small and the monic coefficients are large.
double polish_on_pade(const PadeCoeffs& p, double rho, double x) {
    auto residual = [&](double v) { return ((p.a3 * v - rho * p.b2) * v + p.a1) * v - rho; };
    auto derivative = [&](double v) { return (3.0 * p.a3 * v - 2.0 * rho * p.b2) * v + p.a1; };
    for (int iter = 0; iter < 3; ++iter) {
        const double r = residual(x);
        const double d = derivative(x);
        if (r == 0.0 || d == 0.0) {
            break;
        }
        const double next = x - r / d;
        if (std::abs(residual(next)) >= std::abs(r)) {
            break;
        }
        x = next;
    }
    return x;
}

} // namespace

double eval_f(int n_samples, double shift, double xi) {
    check_model_domain(n_samples, shift);
    if (!(std::abs(xi) <= shift * (1.0 + kDomainSlack))) {
        throw InvalidArgument(fmt::format("eval_f: |xi| = {} exceeds q = {}", std::abs(xi), shift));
    }
    const double plus = dirichlet_ratio(n_samples, xi - shift);
    const double minus = dirichlet_ratio(n_samples, xi + shift);
    const double sp = plus * plus;
    const double sm = minus * minus;
    return (sp - sm) / (sp + sm);
}

TaylorCoeffs taylor_coeffs(int n_samples, double shift) {
    check_model_domain(n_samples, shift);
    const ModelKey key{n_samples, shift};
    auto& c = cache();
    {
        std::shared_lock lock(c.mutex);
        if (auto it = c.taylor.find(key); it != c.taylor.end()) {
            return it->second;
        }
    }
    const TaylorCoeffs computed = compute_taylor(n_samples, shift);
    std::unique_lock lock(c.mutex);
    c.taylor.emplace(key, computed);
    return computed;
}

PadeCoeffs build_pade(const TaylorCoeffs& t) {
    if (t.c3 == 0.0) {
        throw NumericalError("degenerate Pade model: c3 == 0");
    }
    // Matching (a1 xi + a3 xi^3)(1 - b2 xi^2 + ...) to c1 xi + c3 xi^3 + c5 xi^5
    // gives a3 - a1 b2 = c3 and -b2 c3 = c5.
    return {t.c1, t.c3 - t.c1 * t.c5 / t.c3, -t.c5 / t.c3};
}

double eval_pade(const PadeCoeffs& p, double xi) noexcept {
    const double xi2 = xi * xi;
    return (p.a1 * xi + p.a3 * xi2 * xi) / (1.0 + p.b2 * xi2);
}

PadeModel::PadeModel(int n_samples, double shift) : PadeModel(n_samples, shift, taylor_coeffs(n_samples, shift)) {}

PadeModel PadeModel::from_taylor(int n_samples, double shift, const TaylorCoeffs& taylor) {
    check_model_domain(n_samples, shift);
    return PadeModel(n_samples, shift, taylor);
}

PadeModel::PadeModel(int n_samples, double shift, const TaylorCoeffs& taylor)
    : n_samples_(n_samples), shift_(shift), taylor_(taylor) {
    if (taylor_.c3 == 0.0) {
        degenerate_ = true;
        pade_ = {taylor_.c1, 0.0, 0.0};
    } else {
        pade_ = build_pade(taylor_);
    }
}

std::shared_ptr<const PadeModel> PadeModel::cached(int n_samples, double shift) {
    check_model_domain(n_samples, shift);
    const ModelKey key{n_samples, shift};
    auto& c = cache();
    {
        std::shared_lock lock(c.mutex);
        if (auto it = c.models.find(key); it != c.models.end()) {
            return it->second;
        }
    }
    auto model = std::make_shared<const PadeModel>(n_samples, shift);
    std::unique_lock lock(c.mutex);
    return c.models.emplace(key, std::move(model)).first->second;
}

std::string PadeModel::csv_header() {
    return "n_samples,q,c1,c3,c5,a1,a3,b2";
}

std::string PadeModel::csv_row() const {
    return fmt::format("{},{:.12g},{:.12g},{:.12g},{:.12g},{:.12g},{:.12g},{:.12g}", n_samples_, shift_, taylor_.c1, taylor_.c3, taylor_.c5, pade_.a1, pade_.a3, pade_.b2);
}

CubicProblem make_cubic(const PadeCoeffs& p, double rho) {
    if (p.a3 == 0.0) {
        throw NumericalError("cubic undefined for a3 == 0");
    }
    return {-rho / p.a3, p.a1 / p.a3, -rho * p.b2 / p.a3, rho};
}

CubicRoots solve_monic_cubic(double k2, double k1, double k0) {
    const double shift = k2 / 3.0;
    const double q = (k2 * k2 - 3.0 * k1) / 9.0;
    const double r = (k2 * (2.0 * k2 * k2 - 9.0 * k1) + 27.0 * k0) / 54.0;
    const double q3 = q * q * q;

    CubicRoots roots;
    if (r * r < q3) {
        const double theta = std::acos(std::clamp(r / std::sqrt(q3), -1.0, 1.0));
        const double m = -2.0 * std::sqrt(q);
        roots[0] = m * std::cos(theta / 3.0) - shift;
        roots[1] = m * std::cos((theta + 2.0 * kPi) / 3.0) - shift;
        roots[2] = m * std::cos((theta - 2.0 * kPi) / 3.0) - shift;
    } else {
        const double a = -std::copysign(std::cbrt(std::abs(r) + std::sqrt(r * r - q3)), r);
        const double b = (a == 0.0) ? 0.0 : q / a;
        roots[0] = (a + b) - shift;
        const double re = -0.5 * (a + b) - shift;
        const double im = 0.5 * std::sqrt(3.0) * (a - b);
        roots[1] = {re, im};
        roots[2] = {re, -im};
    }
    for (auto& z : roots) {
        z = polish_root(k2, k1, k0, z);
    }
    return roots;
}

CubicRoots solve_cubic(const PadeModel& model, double rho) {
    const CubicProblem cubic = make_cubic(model.pade(), rho);
    return solve_monic_cubic(cubic.k2, cubic.k1, cubic.k0);
}

Inversion invert_detailed(const PadeModel& model, double rho) {
    if (!std::isfinite(rho)) {
        throw NumericalError("invert: non-finite ratio");
    }
    const double bound = kSafetyClampFactor * model.shift();
    const PadeCoeffs& p = model.pade();
    Inversion out;

    if (model.degenerate() || std::abs(p.a3) <= kVanishingA3 * std::abs(p.a1)) {
        out.linear_fallback = true;
        out.xi = rho / p.a1;
    } else {
        const CubicRoots roots = solve_cubic(model, rho);
        double best = std::numeric_limits<double>::infinity();
        bool found = false;
        for (const auto& z : roots) {
            if (std::abs(z.imag()) <= kRealRootTol * (1.0 + std::abs(z.real())) && std::abs(z.real()) < std::abs(best)) {
                best = z.real();
                found = true;
            }
        }
        if (!found) {
            throw NumericalError(fmt::format("invert: no real root for rho = {}", rho));
        }
        // past the peak of the rational model only the wrong-signed branch
        // survives; saturate toward rho instead
        if (rho != 0.0 && best != 0.0 && std::signbit(best) != std::signbit(rho)) {
            out.xi = std::copysign(bound, rho);
            out.clamped = true;
            return out;
        }
        out.xi = polish_on_pade(p, rho, best);
    }
    if (std::abs(out.xi) > bound) {
        out.xi = std::copysign(bound, out.xi);
        out.clamped = true;
    }
    return out;
}

double invert(const PadeModel& model, double rho) {
    return invert_detailed(model, rho).xi;
}

} // namespace padefreq
