// Acceptance run: one PASS/FAIL line per criterion.
//
// Usage: acceptance [--expect-fail i,j,...]
// Exit status is 0 when the failing criteria are exactly the expected set.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>

#include "padefreq/estimators.hpp"
#include "padefreq/harness.hpp"
#include "padefreq/properties.hpp"
#include "padefreq/signal.hpp"
#include "padefreq/updating_function.hpp"

using namespace padefreq;

namespace {

constexpr int kTrials = 10000;
constexpr std::uint64_t kSeed = 20260101;

double db(double v) { return std::pow(10.0, v / 10.0); }

int workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

struct Outcome {
    bool passed = true;
    std::vector<std::string> notes;

    void check(bool ok, std::string note) {
        passed = passed && ok;
        notes.push_back(fmt::format("{}{}", ok ? "" : "!", std::move(note)));
    }
};

const SweepRow* find_row(const SweepReport& r, Variant v, int iteration, double grid) {
    for (const auto& row : r.rows) {
        if (row.estimator == v && row.iteration == iteration && row.grid_value == grid) {
            return &row;
        }
    }
    return nullptr;
}

std::vector<double> ratios(const SweepReport& r, Variant v, int iteration) {
    std::vector<double> out;
    for (const auto& row : r.rows) {
        if (row.estimator == v && row.iteration == iteration) {
            out.push_back(row.mse_over_crlb);
        }
    }
    return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SampleRecord noiseless(int n, double delta, double phase = 0.7) {
    ToneSpec::Params p;
    p.n_samples = n;
    p.bin_index = 2;
    p.frac_offset = delta;
    p.phase = phase;
    return synthesize(ToneSpec(p));
}

// 1. iteration-1 accuracy at 30 dB
Outcome iteration_one_accuracy() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    for (const auto& [n, target] : {std::pair{8, 1.079}, std::pair{32, 1.063}}) {
        SweepConfig c;
        c.kind = SweepKind::Snr;
        c.grid = {db(30.0)};
        c.fixed.n_samples = n;
        c.trials = kTrials;
        c.base_seed = kSeed;
        c.workers = workers();
        c.estimators = {Variant::Proposed};
        const auto report = run_sweep(c);
        const double v = find_row(report, Variant::Proposed, 1, c.grid[0])->mse_over_crlb;
        o.check(std::abs(v - target) <= 0.06, fmt::format("N={} it1 {:.4f} (target {} +- 0.06)", n, v, target));
    }
    const double dt = seconds_since(t0);
    o.check(dt < 60.0, fmt::format("{:.1f} s < 60 s", dt));
    return o;
}

SweepReport n_sweep() {
    SweepConfig c;
    c.kind = SweepKind::NSamples;
    for (int n = 6; n <= 64; n += 2) {
        c.grid.push_back(n);
    }
    c.fixed.snr = db(20.0);
    c.trials = kTrials;
    c.base_seed = kSeed;
    c.workers = workers();
    return run_sweep(c);
}

// 2. iteration-1 minima over N at 20 dB
Outcome n_sweep_first_iteration(const SweepReport& r) {
    Outcome o;
    const auto summary = summarize(r);
    const auto* p = find_summary(summary, Variant::Proposed, 1);
    o.check(std::abs(p->min - 1.065) <= 0.05, fmt::format("proposed min {:.4f} at N={:g} (target 1.065 +- 0.05)", p->min, p->argmin));
    for (const Variant v : {Variant::AM, Variant::GAM}) {
        const auto* s = find_summary(summary, v, 1);
        o.check(std::abs(s->min - 1.142) <= 0.05, fmt::format("{} min {:.4f} at N={:g} (target 1.142 +- 0.05)", to_string(v), s->min, s->argmin));
    }
    int below = 0;
    int total = 0;
    for (const auto& row : r.rows) {
        if (row.estimator != Variant::Proposed || row.iteration != 1) {
            continue;
        }
        ++total;
        const double am = find_row(r, Variant::AM, 1, row.grid_value)->mse_over_crlb;
        const double gam = find_row(r, Variant::GAM, 1, row.grid_value)->mse_over_crlb;
        below += (row.mse_over_crlb < am && row.mse_over_crlb < gam) ? 1 : 0;
    }
    o.check(below == total, fmt::format("proposed below AM and GAM at {}/{} N", below, total));
    return o;
}

// 3. second iteration across N
Outcome n_sweep_second_iteration(const SweepReport& r) {
    Outcome o;
    const auto v = ratios(r, Variant::Proposed, 2);
    const auto [lo, hi] = std::ranges::minmax(v);
    int inside = 0;
    for (const double x : v) {
        inside += (x >= 0.93 && x <= 1.08) ? 1 : 0;
    }
    o.check(inside == static_cast<int>(v.size()), fmt::format("proposed it2 in [0.93, 1.08] at {}/{} N (range {:.4f}..{:.4f})", inside, v.size(), lo, hi));
    for (const double n : {6.0, 8.0}) {
        const double h = find_row(r, Variant::HAQSE, 2, n)->mse_over_crlb;
        o.check(h > 1.08, fmt::format("haqse N={:g} {:.3f} outside band", n, h));
    }
    return o;
}

// 4. flatness over delta
Outcome delta_flatness() {
    Outcome o;
    SweepConfig c;
    c.kind = SweepKind::Delta;
    for (int j = 0; j < 100; ++j) {
        c.grid.push_back(-0.5 + (j + 0.5) / 100.0);
    }
    c.fixed.n_samples = 16;
    c.fixed.snr = db(20.0);
    c.trials = kTrials;
    c.base_seed = kSeed;
    c.workers = workers();
    c.record_per_iteration = false;
    const auto r = run_sweep(c);
    const auto p = ratios(r, Variant::Proposed, 2);
    const auto [pmin, pmax] = std::ranges::minmax(p);
    for (const Variant v : {Variant::AM, Variant::GAM, Variant::HAQSE}) {
        const double m = std::ranges::max(ratios(r, v, 2));
        o.check(pmax <= m, fmt::format("max proposed {:.4f} <= {} {:.4f}", pmax, to_string(v), m));
    }
    o.check(pmax - pmin <= 0.15, fmt::format("spread {:.4f} <= 0.15", pmax - pmin));
    return o;
}

// 5. robustness to q2 = q_H at N = 8
Outcome q_robustness() {
    Outcome o;
    SweepConfig c;
    c.kind = SweepKind::Q2;
    c.grid = linspace(0.1, 1.0 / std::cbrt(8.0), 20);
    c.fixed.n_samples = 8;
    c.fixed.snr = db(20.0);
    c.trials = kTrials;
    c.base_seed = kSeed;
    c.workers = workers();
    c.estimators = {Variant::Proposed, Variant::HAQSE};
    c.record_per_iteration = false;
    const auto r = run_sweep(c);
    const auto p = ratios(r, Variant::Proposed, 2);
    const auto h = ratios(r, Variant::HAQSE, 2);
    const auto [lo, hi] = std::ranges::minmax(p);
    o.check(hi - lo <= 0.1, fmt::format("variation {:.4f} <= 0.1 ({:.4f}..{:.4f})", hi - lo, lo, hi));
    int below = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        below += p[i] <= h[i] ? 1 : 0;
    }
    o.check(below == static_cast<int>(p.size()), fmt::format("proposed <= haqse at {}/{} q", below, p.size()));
    return o;
}

// 6. interpolation counts
Outcome interpolation_accounting() {
    Outcome o;
    int bad = 0;
    int runs = 0;
    for (const double delta : {-0.41, -0.1, 0.0, 0.23, 0.49}) {
        const auto rec = noiseless(16, delta);
        for (const Variant v : {Variant::Proposed, Variant::AM, Variant::GAM, Variant::HAQSE}) {
            for (const int iters : {1, 2, 3}) {
                EstimatorConfig c;
                c.variant = v;
                c.iterations = iters;
                const int expected = v == Variant::Proposed ? 2 * iters - 1 : 2 * iters;
                bad += estimate(rec, c).interp_count == expected ? 0 : 1;
                ++runs;
            }
        }
    }
    o.check(bad == 0, fmt::format("{}/{} runs match 2I-1 (proposed) / 2I (others)", runs - bad, runs));
    return o;
}

// 7. properties, inversion round trip, noiseless recovery
Outcome properties() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    for (const auto& r : run_property_suite(PropertyGrid{})) {
        o.check(r.passed, fmt::format("{} ({})", r.name, r.detail));
    }
    const PadeModel model(16, 0.25);
    double worst = 0.0;
    for (int i = -2400; i <= 2400; ++i) {
        const double xi = i * 1e-4;
        worst = std::max(worst, std::abs(invert(model, eval_f(16, 0.25, xi)) - xi));
    }
    o.check(worst <= 3e-6, fmt::format("round trip max err {:.2e} <= 3e-6", worst));
    double worst_delta = 0.0;
    for (const int n : {8, 16, 32}) {
        for (int j = 0; j <= 100; ++j) {
            const double delta = -0.5 + j / 100.0;
            EstimatorConfig c;
            const auto t = estimate(noiseless(n, delta), c);
            // +-0.5 sit on a bin boundary; compare frequencies
            const double err = std::abs((t.k_star_hat + t.delta_path.back()) - (2 + delta));
            worst_delta = std::max(worst_delta, err);
        }
    }
    o.check(worst_delta <= 1e-5, fmt::format("noiseless delta err {:.2e} <= 1e-5", worst_delta));
    const double dt = seconds_since(t0);
    o.check(dt < 10.0, fmt::format("{:.2f} s < 10 s", dt));
    return o;
}

// 8. reproducibility
Outcome determinism() {
    Outcome o;
    SweepConfig c;
    c.kind = SweepKind::Snr;
    c.grid = {db(0.0), db(10.0), db(20.0), db(30.0)};
    c.fixed.n_samples = 16;
    c.trials = 2000;
    c.base_seed = kSeed;
    auto csv = [](const SweepConfig& cfg) {
        std::ostringstream s;
        write_csv(s, run_sweep(cfg));
        return s.str();
    };
    c.workers = 1;
    const std::string a = csv(c);
    const std::string b = csv(c);
    c.workers = 4;
    const std::string d = csv(c);
    o.check(a == b, "repeat run identical");
    o.check(a == d, "1 vs 4 workers identical");
    return o;
}

std::set<int> parse_expected(int argc, char** argv) {
    std::set<int> out;
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--expect-fail") {
            std::stringstream ss(argv[i + 1]);
            for (std::string p; std::getline(ss, p, ',');) {
                out.insert(std::stoi(p));
            }
        }
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    const std::set<int> expected = parse_expected(argc, argv);

    const auto t0 = std::chrono::steady_clock::now();
    const SweepReport ns = n_sweep();
    fmt::print("(N sweep: {:.1f} s)\n", seconds_since(t0));

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"iteration-1 accuracy, 30 dB", iteration_one_accuracy},
        {"N sweep, iteration-1 minima", [&] { return n_sweep_first_iteration(ns); }},
        {"N sweep, iteration-2 band", [&] { return n_sweep_second_iteration(ns); }},
        {"delta flatness, N=16", delta_flatness},
        {"q2 = qH robustness, N=8", q_robustness},
        {"interpolation accounting", interpolation_accounting},
        {"property suite", properties},
        {"determinism", determinism},
    };

    std::set<int> failed;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        Outcome out;
        try {
            out = criteria[i].second();
        } catch (const std::exception& e) {
            out.check(false, fmt::format("exception: {}", e.what()));
        }
        if (!out.passed) {
            failed.insert(id);
        }
        std::string notes;
        for (const auto& n : out.notes) {
            notes += (notes.empty() ? "" : "; ") + n;
        }
        fmt::print("{} {}. {}: {}{}\n", out.passed ? "PASS" : "FAIL", id, criteria[i].first, notes,
                   !out.passed && expected.contains(id) ? " [expected failure]" : "");
        std::fflush(stdout);
    }
    fmt::print("{}/{} criteria passed ({:.1f} s)\n", criteria.size() - failed.size(), criteria.size(), seconds_since(t0));
    if (failed != expected) {
        for (const int id : expected) {
            if (!failed.contains(id)) {
                fmt::print("criterion {} was expected to fail but passed\n", id);
            }
        }
        return 1;
    }
    return 0;
}
