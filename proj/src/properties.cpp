#include "padefreq/properties.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "padefreq/updating_function.hpp"

namespace padefreq {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kDecayBound = 1.0 / 64.0 + 0.05;

std::vector<double> symmetric_grid(double q, int points) {
    std::vector<double> xs(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
        xs[static_cast<std::size_t>(i)] = -q + 2.0 * q * i / (points - 1);
    }
    return xs;
}

long double dirichlet_power_extended(int n_samples, long double x) {
    const long double pi = std::numbers::pi_v<long double>;
    if (std::fabs(x) < 1e-15L) {
        return static_cast<long double>(n_samples) * n_samples;
    }
    const long double r = std::sin(pi * x) / std::sin(pi * x / n_samples);
    return r * r;
}

} // namespace

long double eval_f_extended(int n_samples, long double shift, long double xi) {
    const long double sp = dirichlet_power_extended(n_samples, xi - shift);
    const long double sm = dirichlet_power_extended(n_samples, xi + shift);
    return (sp - sm) / (sp + sm);
}

PropertyResult check_monotonicity(const PropertyGrid& grid, const UpdatingFunction& f) {
    for (const int n : grid.n_values) {
        for (const double q : grid.q_values) {
            const auto xs = symmetric_grid(q, grid.points);
            double prev = f(n, q, xs.front());
            for (std::size_t i = 1; i < xs.size(); ++i) {
                const double cur = f(n, q, xs[i]);
                if (!(cur > prev)) {
                    return {"monotonicity", false, fmt::format("N={} q={}: f({}) = {} <= f({}) = {}", n, q, xs[i], cur, xs[i - 1], prev)};
                }
                prev = cur;
            }
        }
    }
    return {"monotonicity", true, fmt::format("{} (N, q) pairs x {} points", grid.n_values.size() * grid.q_values.size(), grid.points)};
}

PropertyResult check_odd_symmetry(const PropertyGrid& grid, const UpdatingFunction& f) {
    double worst = 0.0;
    for (const int n : grid.n_values) {
        for (const double q : grid.q_values) {
            for (const double xi : symmetric_grid(q, grid.points)) {
                const double gap = std::abs(f(n, q, xi) + f(n, q, -xi));
                worst = std::max(worst, gap);
                if (!(gap <= kSymmetryTol)) {
                    return {"odd_symmetry", false, fmt::format("N={} q={} xi={}: |f(xi)+f(-xi)| = {:.3g}", n, q, xi, gap)};
                }
            }
        }
    }
    return {"odd_symmetry", true, fmt::format("max |f(xi)+f(-xi)| = {:.3g}", worst)};
}

PropertyResult check_pade_error_decay(const PropertyGrid& grid) {
    double worst = 0.0;
    for (const int n : grid.n_values) {
        for (const double q : grid.q_values) {
            const PadeModel model(n, q);
            if (model.degenerate()) {
                return {"pade_error_decay", false, fmt::format("N={} q={}: degenerate model", n, q)};
            }
            const PadeCoeffs& p = model.pade();
            auto error = [&](long double xi) {
                const long double approx = (p.a1 * xi + p.a3 * xi * xi * xi) / (1.0L + p.b2 * xi * xi);
                return std::fabs(eval_f_extended(n, q, xi) - approx);
            };
            for (const double divisor : {2.0, 4.0}) {
                const long double xi = q / divisor;
                const long double ratio = error(xi / 2) / error(xi);
                worst = std::max(worst, static_cast<double>(ratio));
                if (!(ratio <= kDecayBound)) {
                    return {"pade_error_decay", false, fmt::format("N={} q={} xi={}: e(xi/2)/e(xi) = {:.4g}", n, q, static_cast<double>(xi), static_cast<double>(ratio))};
                }
            }
        }
    }
    return {"pade_error_decay", true, fmt::format("worst e(xi/2)/e(xi) = {:.5f} (O(xi^7) gives {:.5f})", worst, 1.0 / 128.0)};
}

std::vector<PropertyResult> run_property_suite(const PropertyGrid& grid, const UpdatingFunction& f) {
    const UpdatingFunction evaluator = f ? f : UpdatingFunction(&eval_f);
    return {check_monotonicity(grid, evaluator), check_odd_symmetry(grid, evaluator), check_pade_error_decay(grid)};
}

} // namespace padefreq
