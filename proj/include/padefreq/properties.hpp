#pragma once

#include <functional>
#include <string>
#include <vector>

namespace padefreq {

/// Signature of an updating-function evaluator f(N, q, xi).
using UpdatingFunction = std::function<double(int, double, double)>;

struct PropertyGrid {
    std::vector<int> n_values{4, 8, 16, 32, 64};
    std::vector<double> q_values{0.1, 0.25, 0.32, 0.5};
    int points = 1001;
};

struct PropertyResult {
    std::string name;
    bool passed;
    std::string detail;
};

/// Strictly increasing on an evenly spaced grid over [-q, q].
[[nodiscard]] PropertyResult check_monotonicity(const PropertyGrid& grid, const UpdatingFunction& f);

/// |f(xi) + f(-xi)| <= 1e-12 on the same grid.
[[nodiscard]] PropertyResult check_odd_symmetry(const PropertyGrid& grid, const UpdatingFunction& f);

/// Pade error e(xi) = |f - f_hat| must shrink by at least 1/64 + 0.05 when
/// xi halves, for xi in {q/2, q/4}. Evaluated in extended precision.
[[nodiscard]] PropertyResult check_pade_error_decay(const PropertyGrid& grid);

/// f evaluated in long double; used where double rounding would hide the
/// approximation error.
[[nodiscard]] long double eval_f_extended(int n_samples, long double shift, long double xi);

/// Runs all three checks. The default evaluator is eval_f.
[[nodiscard]] std::vector<PropertyResult> run_property_suite(const PropertyGrid& grid, const UpdatingFunction& f = {});

} // namespace padefreq
