#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "padefreq/errors.hpp"
#include "padefreq/estimators.hpp"

using namespace padefreq;

namespace {

SampleRecord noiseless(int n, double delta, int k = 2, double phase = 0.0) {
    ToneSpec::Params p;
    p.n_samples = n;
    p.bin_index = k;
    p.frac_offset = delta;
    p.phase = phase;
    return synthesize(ToneSpec(p));
}

EstimatorConfig config_for(Variant v, int iterations) {
    EstimatorConfig c;
    c.variant = v;
    c.iterations = iterations;
    return c;
}

void check_update_identity(const EstimateTrace& t) {
    REQUIRE(t.delta_path.size() == t.xi_path.size() + 1);
    for (std::size_t i = 0; i < t.xi_path.size(); ++i) {
        CHECK(t.delta_path[i + 1] == t.delta_path[i] + t.xi_path[i]);
    }
    const int last = static_cast<int>(t.xi_path.size());
    CHECK(t.f_hat == t.sample_rate * (t.k_star_hat + std::clamp(t.delta_path.back(), -0.5, 0.5)) / t.n_samples);
    CHECK(t.f_hat == t.frequency_at(last));
}

} // namespace

TEST_CASE("sign_test: examples") {
    auto alpha = [](int n, double delta) {
        const auto peak = find_peak(noiseless(n, delta));
        return sign_test(peak.bins, peak.k_star_hat);
    };
    CHECK(alpha(16, 0.3) == 1);
    CHECK(alpha(16, -0.3) == -1);
    CHECK(alpha(16, 0.0) == 1);
}

TEST_CASE("sign_test: bin indices wrap modulo N") {
    for (const int k : {0, 15}) {
        for (const double delta : {0.3, -0.3}) {
            const auto peak = find_peak(noiseless(16, delta, k, 0.4));
            REQUIRE(peak.k_star_hat == k);
            CHECK(sign_test(peak.bins, peak.k_star_hat) == (delta > 0 ? 1 : -1));
        }
    }
    std::vector<Complex> bins(4);
    CHECK_THROWS_AS((void)sign_test(bins, 4), InvalidArgument);
}

TEST_CASE("sign_test: reliable for |delta| >= 0.02") {
    for (const int n : {8, 16, 32}) {
        for (int j = 1; j <= 99; ++j) {
            const double delta = -0.49 + 0.98 * (j - 1) / 98.0;
            if (std::abs(delta) < 0.02) {
                continue;
            }
            const auto peak = find_peak(noiseless(n, delta, 2, 0.1 * j));
            CHECK(sign_test(peak.bins, peak.k_star_hat) == (delta > 0 ? 1 : -1));
        }
    }
}

TEST_CASE("refine_once: examples") {
    const auto model = PadeModel::cached(16, 0.25);
    {
        const auto rec = noiseless(16, 0.25);
        InterpCounter counter;
        const auto step = refine_once(rec, 2, 0.25, 0.25, *model, counter);
        CHECK(std::abs(step.xi) < 1e-9);
        CHECK(std::abs(step.delta - 0.25) < 1e-9);
        CHECK(std::abs(step.rho) < 1e-9);
        CHECK(counter.count() == 2);
    }
    {
        const auto rec = noiseless(16, 0.35);
        InterpCounter counter;
        const auto step = refine_once(rec, 2, 0.25, 0.25, *model, counter);
        CHECK(std::abs(step.xi - 0.1) < 3e-6);
        CHECK(step.rho == doctest::Approx(eval_f(16, 0.25, 0.1)).epsilon(1e-10));
    }
    {
        const auto rec = noiseless(16, 0.15);
        InterpCounter counter;
        const auto step = refine_once(rec, 2, 0.25, 0.25, *model, counter);
        CHECK(std::abs(step.xi + 0.1) < 3e-6);
    }
    {
        const auto rec = noiseless(16, 0.1);
        InterpCounter counter;
        InterpCounter scratch;
        const KnownCoefficient known{false, dft_at(rec, 2.0, scratch)};
        const auto step = refine_once(rec, 2, 0.25, 0.25, *model, counter, known);
        CHECK(counter.count() == 1);
        CHECK(std::abs(step.delta - 0.1) < 3e-6);
    }
}

TEST_CASE("refine_once: zero signal is a numerical error") {
    const SampleRecord zeros(std::vector<Complex>(16), 1.0);
    InterpCounter counter;
    CHECK_THROWS_AS((void)refine_once(zeros, 2, 0.0, 0.25, *PadeModel::cached(16, 0.25), counter), NumericalError);
    CHECK_THROWS_AS((void)estimate_am(zeros, config_for(Variant::AM, 1)), NumericalError);
}

TEST_CASE("estimate_proposed: examples") {
    const auto a = estimate_proposed(noiseless(16, 0.3), config_for(Variant::Proposed, 2));
    CHECK(std::abs(a.delta_path.back() - 0.3) < 1e-6);
    CHECK(a.interp_count == 3);
    CHECK(a.alpha == 1);
    CHECK(a.delta_path.front() == 0.25);

    const auto b = estimate_proposed(noiseless(8, -0.45), config_for(Variant::Proposed, 2));
    CHECK(std::abs(b.delta_path.back() + 0.45) < 1e-5);
    CHECK(b.interp_count == 3);
    CHECK(b.alpha == -1);
    CHECK(b.delta_path.front() == -0.25);
    CHECK(b.f_hat == doctest::Approx((2.0 - 0.45) / 8.0).epsilon(1e-6));
    check_update_identity(a);
    check_update_identity(b);
}

TEST_CASE("estimate_proposed: noiseless accuracy over the delta grid") {
    for (const int n : {8, 16, 32}) {
        for (int j = 0; j < 99; ++j) {
            const double delta = -0.49 + 0.98 * j / 98.0;
            const auto t = estimate_proposed(noiseless(n, delta, 2, 0.05 * j), config_for(Variant::Proposed, 2));
            CAPTURE(n);
            CAPTURE(delta);
            CHECK(std::abs(t.delta_path.back() - delta) < 1e-5);
            CHECK(t.fallbacks.empty());
        }
    }
}

TEST_CASE("estimate_proposed: custom shift schedule") {
    EstimatorConfig c = config_for(Variant::Proposed, 3);
    c.shifts = {0.1, 0.4};
    CHECK(c.shift_at(1) == 0.25);
    CHECK(c.shift_at(2) == 0.1);
    CHECK(c.shift_at(3) == 0.4);
    CHECK(c.shift_at(4) == 0.25);
    const auto t = estimate_proposed(noiseless(12, -0.17), c);
    CHECK(std::abs(t.delta_path.back() + 0.17) < 1e-7);
    CHECK(t.interp_count == 5);
}

TEST_CASE("interpolation accounting: 2I-1 for the Pade estimator, 2I otherwise") {
    const auto rec = noiseless(16, 0.13);
    for (const int iters : {1, 2, 3}) {
        CHECK(estimate(rec, config_for(Variant::Proposed, iters)).interp_count == 2 * iters - 1);
        CHECK(estimate(rec, config_for(Variant::AM, iters)).interp_count == 2 * iters);
        CHECK(estimate(rec, config_for(Variant::GAM, iters)).interp_count == 2 * iters);
        CHECK(estimate(rec, config_for(Variant::HAQSE, iters)).interp_count == 2 * iters);
    }
}

TEST_CASE("estimate_am: examples") {
    const auto zero = estimate_am(noiseless(16, 0.0), config_for(Variant::AM, 1));
    CHECK(std::abs(zero.delta_path[1]) < 1e-12);
    CHECK(zero.delta_path[0] == 0.0);

    const auto one = estimate_am(noiseless(16, 0.3), config_for(Variant::AM, 1));
    const auto two = estimate_am(noiseless(16, 0.3), config_for(Variant::AM, 2));
    CHECK(std::abs(two.delta_path.back() - 0.3) < 1e-3);
    CHECK(std::abs(two.delta_path.back() - 0.3) <= std::abs(one.delta_path.back() - 0.3));
    check_update_identity(two);
}

TEST_CASE("estimate_gam: examples") {
    const auto t = estimate_gam(noiseless(16, 0.25), config_for(Variant::GAM, 1));
    CHECK(t.delta_path[0] == 0.25);
    CHECK(t.alpha == 1);

    const auto gam2 = estimate_gam(noiseless(16, 0.3), config_for(Variant::GAM, 2));
    const auto am1 = estimate_am(noiseless(16, 0.3), config_for(Variant::AM, 1));
    CHECK(std::abs(gam2.delta_path.back() - 0.3) < std::abs(am1.delta_path.back() - 0.3));
    check_update_identity(gam2);
}

TEST_CASE("estimate_gam: conjugate symmetry") {
    for (const double delta : {0.07, 0.21, 0.38, 0.49}) {
        const double phi = 0.9;
        const auto pos = estimate_gam(noiseless(16, delta, 2, phi), config_for(Variant::GAM, 3));
        // mirror the whole spectrum: k* -> N - k*, delta -> -delta, phi -> -phi
        const auto neg = estimate_gam(noiseless(16, -delta, 14, -phi), config_for(Variant::GAM, 3));
        CHECK(pos.alpha == -neg.alpha);
        for (std::size_t i = 0; i < pos.delta_path.size(); ++i) {
            CHECK(pos.delta_path[i] == doctest::Approx(-neg.delta_path[i]).epsilon(1e-9));
        }
    }
}

TEST_CASE("estimate_haqse: examples") {
    // delta_1 = delta after a noiseless A&M step on-bin, then a zero residual
    const auto on = estimate_haqse(noiseless(16, 0.0), config_for(Variant::HAQSE, 2));
    CHECK(std::abs(on.rho_path[1]) < 1e-12);
    CHECK(std::abs(on.xi_path[1]) < 1e-12);

    EstimatorConfig c = config_for(Variant::HAQSE, 2);
    c.q_h = std::cbrt(1.0 / 16.0);
    const auto t = estimate_haqse(noiseless(16, 0.3), c);
    // residual after one A&M step and one gain-scaled step (numpy reference)
    CHECK(t.delta_path.back() - 0.3 == doctest::Approx(-2.1011969155509957e-4).epsilon(1e-6));
    CHECK(t.delta_path[1] - 0.3 == doctest::Approx(-6.181049273116801e-4).epsilon(1e-6));
    check_update_identity(t);
}

TEST_CASE("haqse_gain: scalar formula") {
    // 0.25 cos^2(pi/4) / (1 - (pi/4) cot(pi/4)) = 0.125 / (1 - pi/4)
    const long double expected = 0.125L / (1.0L - std::numbers::pi_v<long double> / 4.0L);
    CHECK(haqse_gain(0.25) == doctest::Approx(static_cast<double>(expected)).epsilon(1e-14));
    CHECK(haqse_gain(0.25) == doctest::Approx(0.58247404579068596181).epsilon(1e-14));
    CHECK_THROWS_AS((void)haqse_gain(0.0), InvalidArgument);
    CHECK_THROWS_AS((void)haqse_gain(1.0), InvalidArgument);
}

TEST_CASE("noiseless fixed point: zero update at the true offset") {
    const double delta = 0.17;
    const auto rec = noiseless(16, delta);
    InterpCounter counter;
    const auto model = PadeModel::cached(16, 0.25);
    CHECK(std::abs(refine_once(rec, 2, delta, 0.25, *model, counter).xi) < 1e-9);

    // A&M / HAQSE steps evaluated at delta_prev = delta via a converged run
    for (const Variant v : {Variant::AM, Variant::GAM, Variant::HAQSE, Variant::Proposed}) {
        const auto t = estimate(rec, config_for(v, 30));
        CAPTURE(to_string(v));
        CHECK(std::abs(t.xi_path.back()) < 1e-9);
    }
}

TEST_CASE("config validation") {
    EstimatorConfig c;
    c.iterations = 0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c.iterations = 2;
    c.shifts = {0.6};
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c.shifts = {0.0};
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c.shifts = {0.5};
    CHECK_NOTHROW(c.validate());
    c.q_h = 0.0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c.q_h = 0.3;
    CHECK_NOTHROW(c.validate());
    CHECK(c.haqse_shift(8) == 0.3);
    c.q_h.reset();
    CHECK(c.haqse_shift(8) == doctest::Approx(0.5));
    CHECK(parse_variant("HAQSE") == Variant::HAQSE);
    CHECK(parse_variant("am") == Variant::AM);
    CHECK_THROWS_AS((void)parse_variant("quinn"), InvalidArgument);
}

TEST_CASE("final delta is clamped and flagged") {
    // AM with I=1 on a tone at the bin edge overshoots only through noise;
    // force it with a two-tone record whose interference drives |delta| > 0.5.
    std::vector<Complex> x(16);
    for (int n = 0; n < 16; ++n) {
        x[static_cast<std::size_t>(n)] = std::polar(1.0, 2.0 * std::numbers::pi * 2.0 * n / 16.0) + std::polar(0.999, 2.0 * std::numbers::pi * 3.0 * n / 16.0);
    }
    const SampleRecord rec(x, 1.0);
    const auto t = estimate(rec, config_for(Variant::Proposed, 4));
    for (std::size_t i = 0; i < t.delta_path.size(); ++i) {
        CHECK(std::abs(t.delta_at(static_cast<int>(i))) <= 0.5);
    }
    const bool clamped_final = std::ranges::any_of(t.fallbacks, [](const FallbackEvent& e) { return e.kind == Fallback::ClampedFinal; });
    CHECK(clamped_final == (std::abs(t.delta_path.back()) > 0.5));
}
