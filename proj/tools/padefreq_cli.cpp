// padefreq command-line front end.
//
// Exit codes: 0 success, 1 invalid input, 2 numerical or property failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "padefreq/errors.hpp"
#include "padefreq/estimators.hpp"
#include "padefreq/harness.hpp"
#include "padefreq/properties.hpp"
#include "padefreq/signal.hpp"
#include "padefreq/updating_function.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace padefreq;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitNumerical = 2;

// q_H above this is not recommended for small N.
constexpr double kMaxHaqseShift = 0.32;

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

int default_trials() {
    if (const char* env = std::getenv("PADEFREQ_TRIALS")) {
        try {
            const int v = std::stoi(env);
            if (v >= 1) {
                return v;
            }
        } catch (const std::exception&) {
        }
        throw InvalidArgument(fmt::format("PADEFREQ_TRIALS must be a positive integer, got '{}'", env));
    }
    return 10000;
}

// "a:step:b" (inclusive) or "v1,v2,..." or a single value.
std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> out;
    auto number = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s.size() || !std::isfinite(v)) {
            throw InvalidArgument(fmt::format("bad number '{}' in grid '{}'", s, text));
        }
        return v;
    };
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(text);
        for (std::string p; std::getline(ss, p, ':');) {
            parts.push_back(p);
        }
        if (parts.size() != 3) {
            throw InvalidArgument(fmt::format("range '{}' must be start:step:stop", text));
        }
        const double a = number(parts[0]);
        const double step = number(parts[1]);
        const double b = number(parts[2]);
        if (!(step > 0.0) || b < a) {
            throw InvalidArgument(fmt::format("range '{}' needs step > 0 and stop >= start", text));
        }
        const auto count = static_cast<long>(std::floor((b - a) / step + 1e-9)) + 1;
        if (count > 100000) {
            throw InvalidArgument(fmt::format("range '{}' is too long", text));
        }
        for (long i = 0; i < count; ++i) {
            out.push_back(a + static_cast<double>(i) * step);
        }
        return out;
    }
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');) {
        out.push_back(number(p));
    }
    if (out.empty()) {
        throw InvalidArgument("empty grid");
    }
    return out;
}

std::vector<int> parse_sizes(const std::string& text) {
    std::vector<int> out;
    for (const double v : parse_grid(text)) {
        if (v != std::floor(v) || v < 2 || v > 1e6) {
            throw InvalidArgument(fmt::format("N must be an integer >= 2, got {}", v));
        }
        out.push_back(static_cast<int>(v));
    }
    return out;
}

std::vector<Variant> parse_variants(const std::string& text) {
    std::vector<Variant> out;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');) {
        out.push_back(parse_variant(p));
    }
    if (out.empty()) {
        throw InvalidArgument("no estimators given");
    }
    return out;
}

// Sample file: optional '#' comments, then "N <int>" and "fs <real>" header
// lines, then one "re,im" sample per line.
SampleRecord read_samples(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidArgument(fmt::format("cannot open input file '{}'", path));
    }
    std::optional<int> n;
    std::optional<double> rate;
    std::vector<Complex> samples;
    int line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line.front() == '#') {
            continue;
        }
        std::istringstream ls(line);
        std::string key;
        if (!n || !rate) {
            ls >> key;
            if (key == "N") {
                int v = 0;
                if (!(ls >> v) || v < 2) {
                    throw InvalidArgument(fmt::format("{}:{}: bad N header", path, line_no));
                }
                n = v;
                continue;
            }
            if (key == "fs") {
                double v = 0.0;
                if (!(ls >> v) || !(v > 0.0)) {
                    throw InvalidArgument(fmt::format("{}:{}: bad fs header", path, line_no));
                }
                rate = v;
                continue;
            }
            throw InvalidArgument(fmt::format("{}:{}: expected 'N <int>' and 'fs <real>' before samples", path, line_no));
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw InvalidArgument(fmt::format("{}:{}: expected 're,im'", path, line_no));
        }
        try {
            std::size_t u1 = 0;
            std::size_t u2 = 0;
            const std::string re = line.substr(0, comma);
            const std::string im = line.substr(comma + 1);
            const double r = std::stod(re, &u1);
            const double i = std::stod(im, &u2);
            if (u1 != re.size() || u2 != im.size()) {
                throw std::invalid_argument("trailing text");
            }
            samples.emplace_back(r, i);
        } catch (const std::exception&) {
            throw InvalidArgument(fmt::format("{}:{}: cannot parse sample '{}'", path, line_no, line));
        }
    }
    if (!n || !rate) {
        throw InvalidArgument(fmt::format("{}: missing N or fs header", path));
    }
    if (static_cast<int>(samples.size()) != *n) {
        throw InvalidArgument(fmt::format("{}: header says N={} but {} samples follow", path, *n, samples.size()));
    }
    return SampleRecord(std::move(samples), *rate);
}

std::ostream& open_output(const std::string& path, std::ofstream& file) {
    if (path.empty() || path == "-") {
        return std::cout;
    }
    file.open(path);
    if (!file) {
        throw InvalidArgument(fmt::format("cannot write '{}'", path));
    }
    return file;
}

std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out += fmt::format("{}{:.9g}", i ? " " : "", v[i]);
    }
    return out;
}

// ---- estimate -------------------------------------------------------------

struct EstimateOptions {
    std::string input;
    int n = 16;
    int kstar = 2;
    double delta = 0.0;
    double phase = 0.0;
    double amplitude = 1.0;
    double fs = 1.0;
    std::optional<double> snr_db;
    bool noiseless = false;
    std::string variant = "proposed";
    int iters = 2;
    std::string shifts;
    std::optional<double> qh;
};

int cmd_estimate(const EstimateOptions& o, std::uint64_t seed, const std::string& format, const std::string& out_path) {
    std::optional<SampleRecord> record;
    if (!o.input.empty()) {
        record = read_samples(o.input);
    } else {
        ToneSpec::Params p;
        p.amplitude = o.amplitude;
        p.sample_rate = o.fs;
        p.phase = o.phase;
        p.n_samples = o.n;
        p.bin_index = o.kstar;
        p.frac_offset = o.delta;
        if (o.snr_db && !o.noiseless) {
            p.snr = db_to_linear(*o.snr_db);
        }
        const ToneSpec spec(p);
        record = synthesize(spec, spec.noiseless() ? std::nullopt : std::optional<std::uint64_t>(seed));
    }

    EstimatorConfig config;
    config.variant = parse_variant(o.variant);
    config.iterations = o.iters;
    if (!o.shifts.empty()) {
        config.shifts = parse_grid(o.shifts);
    }
    if (config.variant == Variant::HAQSE) {
        const double qh = o.qh.value_or(std::min(1.0 / std::cbrt(static_cast<double>(record->size())), kMaxHaqseShift));
        if (!(qh > 0.0 && qh <= kMaxHaqseShift)) {
            throw InvalidArgument(fmt::format("--qh must lie in (0, {}], got {}", kMaxHaqseShift, qh));
        }
        config.q_h = qh;
    } else if (o.qh) {
        throw InvalidArgument("--qh only applies to --variant haqse");
    }

    const EstimateTrace t = estimate(*record, config);

    std::ofstream file;
    std::ostream& out = open_output(out_path, file);
    if (format == "json") {
        json j;
        j["variant"] = std::string(to_string(t.variant));
        j["k_star"] = t.k_star_hat;
        j["alpha"] = t.alpha;
        j["delta_path"] = t.delta_path;
        j["xi_path"] = t.xi_path;
        j["rho_path"] = t.rho_path;
        j["interp_count"] = t.interp_count;
        j["f_hat"] = t.f_hat;
        j["fallbacks"] = json::array();
        for (const auto& f : t.fallbacks) {
            j["fallbacks"].push_back({{"iteration", f.iteration}, {"kind", std::string(to_string(f.kind))}});
        }
        out << j.dump(2) << '\n';
    } else {
        fmt::print(out, "variant: {}\n", to_string(t.variant));
        fmt::print(out, "k_star: {}\n", t.k_star_hat);
        fmt::print(out, "alpha: {}\n", t.alpha);
        fmt::print(out, "delta_path: {}\n", join(t.delta_path));
        fmt::print(out, "xi_path: {}\n", join(t.xi_path));
        fmt::print(out, "interp_count: {}\n", t.interp_count);
        fmt::print(out, "f_hat: {:.12g}\n", t.f_hat);
        for (const auto& f : t.fallbacks) {
            fmt::print(out, "fallback: iteration {} {}\n", f.iteration, to_string(f.kind));
        }
    }
    return kExitOk;
}

// ---- coeffs ---------------------------------------------------------------

int cmd_coeffs(int n, double q, const std::string& format, const std::string& out_path) {
    const PadeModel model(n, q);
    std::ofstream file;
    std::ostream& out = open_output(out_path, file);
    if (format == "json") {
        const auto& t = model.taylor();
        const auto& p = model.pade();
        const json j = {{"n_samples", n}, {"q", q}, {"c1", t.c1}, {"c3", t.c3}, {"c5", t.c5}, {"a1", p.a1}, {"a3", p.a3}, {"b2", p.b2}};
        out << j.dump(2) << '\n';
    } else {
        out << PadeModel::csv_header() << '\n' << model.csv_row() << '\n';
    }
    return model.degenerate() ? kExitNumerical : kExitOk;
}

// ---- props ----------------------------------------------------------------

int cmd_props(const std::string& n_text, const std::string& q_text, int points) {
    PropertyGrid grid;
    if (!n_text.empty()) {
        grid.n_values = parse_sizes(n_text);
    }
    if (!q_text.empty()) {
        grid.q_values = parse_grid(q_text);
    }
    grid.points = points;
    bool ok = true;
    for (const auto& r : run_property_suite(grid)) {
        fmt::print("{} {}: {}\n", r.passed ? "PASS" : "FAIL", r.name, r.detail);
        ok = ok && r.passed;
    }
    return ok ? kExitOk : kExitNumerical;
}

// ---- sweeps ---------------------------------------------------------------

struct SweepOptions {
    std::string n_text;
    std::string snr_db_text;
    int points = 0;
    int iters = 2;
    double q2 = kDefaultShift;
    std::optional<double> qh;
    std::string estimators = "proposed,am,gam,haqse";
    bool noiseless = false;
    bool final_only = false;
};

std::string plot_script(SweepKind kind, const std::string& csv_name) {
    const char* x_expr = "df['grid_value']";
    const char* x_label = "";
    const char* y_col = "mse_over_crlb";
    const char* y_label = "MSE / CRLB";
    const char* y_scale = "linear";
    switch (kind) {
    case SweepKind::Snr:
        x_expr = "10 * np.log10(df['grid_value'])";
        x_label = "SNR (dB)";
        y_col = "mse";
        y_label = "MSE (Hz^2)";
        y_scale = "log";
        break;
    case SweepKind::NSamples: x_label = "N"; break;
    case SweepKind::Delta: x_label = "delta"; break;
    case SweepKind::Q2: x_label = "q2 = qH"; break;
    }
    return fmt::format(R"(#!/usr/bin/env python3
# Plot for {csv}. Run next to the CSV: python3 <this file>
import os
import numpy as np
import pandas as pd
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
data = pd.read_csv(os.path.join(here, "{csv}"))
sweeps = list(dict.fromkeys(data["sweep"]))
iterations = sorted(data["iteration"].unique())
fig, axes = plt.subplots(len(sweeps), len(iterations), squeeze=False,
                         figsize=(5 * len(iterations), 3.5 * len(sweeps)))
for r, sweep in enumerate(sweeps):
    for c, it in enumerate(iterations):
        ax = axes[r][c]
        part = data[(data["sweep"] == sweep) & (data["iteration"] == it)]
        for name, df in part.groupby("estimator", sort=False):
            ax.plot({x}, df["{y}"], marker=".", label=name)
        if "{y}" == "mse":
            df = part[part["estimator"] == part["estimator"].iloc[0]]
            ax.plot({x}, df["crlb"], "k--", label="CRLB")
        ax.set_yscale("{scale}")
        ax.set_xlabel("{xl}")
        ax.set_ylabel("{yl}")
        ax.set_title(f"{{sweep}}, iteration {{it}}")
        ax.grid(True, which="both", alpha=0.3)
        ax.legend()
fig.tight_layout()
fig.savefig(os.path.join(here, os.path.splitext("{csv}")[0] + ".png"), dpi=150)
)",
                       fmt::arg("csv", csv_name), fmt::arg("x", x_expr), fmt::arg("y", y_col), fmt::arg("scale", y_scale),
                       fmt::arg("xl", x_label), fmt::arg("yl", y_label));
}

json row_json(const SweepRow& r) {
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    return {{"sweep", r.sweep},
            {"grid_value", r.grid_value},
            {"estimator", std::string(to_string(r.estimator))},
            {"iteration", r.iteration},
            {"trials", r.trials},
            {"mse", num(r.mse)},
            {"crlb", r.crlb},
            {"mse_over_crlb", num(r.mse_over_crlb)},
            {"failures", r.failures},
            {"seed", r.seed}};
}

int cmd_sweep(SweepKind kind, const SweepOptions& o, std::uint64_t seed, int trials, int workers, const std::string& format,
              const std::string& out_path, const std::string& command_line) {
    std::vector<SweepConfig> configs;
    auto base = [&](int n) {
        SweepConfig c;
        c.kind = kind;
        c.fixed.n_samples = n;
        c.iterations = o.iters;
        c.shift = o.q2;
        c.q_h = o.qh;
        c.trials = trials;
        c.base_seed = seed;
        c.workers = workers;
        c.estimators = parse_variants(o.estimators);
        c.record_per_iteration = !o.final_only;
        return c;
    };
    auto single_snr = [&]() -> std::optional<double> {
        if (o.noiseless) {
            return std::nullopt;
        }
        const auto g = parse_grid(o.snr_db_text);
        if (g.size() != 1) {
            throw InvalidArgument("--snr-db takes a single value for this sweep");
        }
        return db_to_linear(g.front());
    };

    switch (kind) {
    case SweepKind::Snr: {
        for (const int n : parse_sizes(o.n_text)) {
            SweepConfig c = base(n);
            for (const double db : parse_grid(o.snr_db_text)) {
                c.grid.push_back(db_to_linear(db));
            }
            c.label = fmt::format("snr;N={}", n);
            configs.push_back(std::move(c));
        }
        break;
    }
    case SweepKind::NSamples: {
        SweepConfig c = base(16);
        for (const int n : parse_sizes(o.n_text)) {
            c.grid.push_back(n);
        }
        c.fixed.snr = single_snr();
        if (!c.fixed.snr) {
            throw InvalidArgument("sweep-n needs noise (mse/crlb is undefined without it)");
        }
        c.label = fmt::format("n_samples;snr_db={}", o.snr_db_text);
        configs.push_back(std::move(c));
        break;
    }
    case SweepKind::Delta: {
        for (const int n : parse_sizes(o.n_text)) {
            SweepConfig c = base(n);
            const int p = o.points;
            if (p < 1) {
                throw InvalidArgument("--points must be >= 1");
            }
            // cell midpoints of [-0.5, 0.5): evenly spaced, symmetric, and
            // clear of the half-bin ambiguity at the edges
            for (int j = 0; j < p; ++j) {
                c.grid.push_back(-0.5 + (j + 0.5) / p);
            }
            c.fixed.snr = single_snr();
            c.label = fmt::format("delta;N={}", n);
            configs.push_back(std::move(c));
        }
        break;
    }
    case SweepKind::Q2: {
        for (const int n : parse_sizes(o.n_text)) {
            SweepConfig c = base(n);
            if (o.qh) {
                throw InvalidArgument("sweep-q pairs q_H with q2; --qh is not accepted");
            }
            const double top = std::min(1.0 / std::cbrt(static_cast<double>(n)), 0.5);
            if (!(top > 0.1)) {
                throw InvalidArgument(fmt::format("N={} leaves no q range above 0.1", n));
            }
            c.grid = linspace(0.1, top, o.points);
            c.fixed.snr = single_snr();
            c.label = fmt::format("q2;N={}", n);
            configs.push_back(std::move(c));
        }
        break;
    }
    }

    SweepReport all;
    for (const auto& c : configs) {
        SweepReport r = run_sweep(c);
        if (all.rows.empty()) {
            all.metadata = r.metadata;
        } else {
            all.metadata.config_hash = all.metadata.config_hash * 1099511628211ULL ^ r.metadata.config_hash;
        }
        all.rows.insert(all.rows.end(), r.rows.begin(), r.rows.end());
    }

    int invalid = 0;
    for (const auto& r : all.rows) {
        invalid += r.valid() ? 0 : 1;
    }

    std::ofstream file;
    std::ostream& out = open_output(out_path, file);
    const json meta = {{"seed", all.metadata.seed},
                       {"config_hash", fmt::format("{:016x}", all.metadata.config_hash)},
                       {"build_id", all.metadata.build_id},
                       {"trials", trials},
                       {"command", command_line}};
    if (format == "json") {
        json j = {{"metadata", meta}, {"rows", json::array()}};
        for (const auto& r : all.rows) {
            j["rows"].push_back(row_json(r));
        }
        out << j.dump(2) << '\n';
    } else {
        write_csv(out, all);
    }
    out.flush();
    if (!out) {
        throw InvalidArgument(fmt::format("write to '{}' failed", out_path));
    }

    if (!out_path.empty() && out_path != "-") {
        const fs::path path(out_path);
        const fs::path stem = path.parent_path() / path.stem();
        std::ofstream meta_file(stem.string() + ".meta.json");
        meta_file << meta.dump(2) << '\n';
        if (format == "csv") {
            std::ofstream script(stem.string() + "_plot.py");
            script << plot_script(kind, path.filename().string());
        }
        if (!meta_file) {
            throw InvalidArgument(fmt::format("cannot write sidecar files next to '{}'", out_path));
        }
    }

    if (kind == SweepKind::NSamples) {
        const auto summary = summarize(all);
        for (const int it : {1, o.iters}) {
            if (const auto* s = find_summary(summary, Variant::Proposed, it)) {
                fmt::print(std::cerr, "summary: proposed iteration {} min mse/crlb = {:.4f} at N = {:g}\n", it, s->min, s->argmin);
            }
            if (o.final_only) {
                break;
            }
        }
    }
    if (invalid > 0) {
        fmt::print(std::cerr, "warning: {} row(s) have more than 1% failed trials\n", invalid);
        return kExitNumerical;
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Single-tone frequency estimation by DFT interpolation"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for all subcommands");

    std::uint64_t seed = 1;
    int workers = 1;
    std::optional<int> trials;
    std::string format = "csv";
    std::string out_path;

    auto common = [&](CLI::App* sub, bool sweep) {
        sub->add_option("--seed", seed, "Base random seed")->capture_default_str();
        sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
        sub->add_option("--out", out_path, "Output file (default: stdout)");
        if (sweep) {
            sub->add_option("--workers", workers, "Worker threads")->check(CLI::Range(1, 1024))->capture_default_str();
            sub->add_option("--trials", trials, "Trials per grid point (default: $PADEFREQ_TRIALS or 10000)")->check(CLI::PositiveNumber);
        }
    };

    EstimateOptions eo;
    auto* est = app.add_subcommand("estimate", "Estimate the frequency of one record");
    common(est, false);
    est->add_option("--input", eo.input, "Sample file ('N <int>', 'fs <real>', then 're,im' lines)");
    est->add_option("--n", eo.n, "Samples N")->capture_default_str();
    est->add_option("--kstar", eo.kstar, "Integer bin k*")->capture_default_str();
    est->add_option("--delta", eo.delta, "Fractional offset in [-0.5, 0.5]")->capture_default_str();
    est->add_option("--phase", eo.phase, "Phase (rad)")->capture_default_str();
    est->add_option("--amplitude", eo.amplitude, "Amplitude")->capture_default_str();
    est->add_option("--fs", eo.fs, "Sample rate (Hz)")->capture_default_str();
    auto* snr_opt = est->add_option("--snr-db", eo.snr_db, "SNR in dB (omit for a noiseless record)");
    est->add_flag("--noiseless", eo.noiseless, "No noise")->excludes(snr_opt);
    est->add_option("--variant", eo.variant, "proposed | am | gam | haqse")->capture_default_str();
    est->add_option("--iters", eo.iters, "Iterations I")->capture_default_str();
    est->add_option("--q", eo.shifts, "Shifts q2,...,qI (proposed)");
    est->add_option("--qh", eo.qh, "HAQSE shift (<= 0.32; default min(N^(-1/3), 0.32))");

    int cn = 16;
    double cq = kDefaultShift;
    auto* coe = app.add_subcommand("coeffs", "Print Taylor and Pade coefficients");
    common(coe, false);
    coe->add_option("--n", cn, "Samples N")->capture_default_str();
    coe->add_option("--q", cq, "Shift q in (0, 0.5]")->capture_default_str();

    std::string pn;
    std::string pq;
    int ppoints = PropertyGrid{}.points;
    auto* props = app.add_subcommand("props", "Run the updating-function property checks");
    props->add_option("--n", pn, "N grid (list or start:step:stop)");
    props->add_option("--q", pq, "q grid (list or start:step:stop)");
    props->add_option("--points", ppoints, "Points per curve")->check(CLI::Range(3, 1000001))->capture_default_str();

    auto defaults = [](std::string n, std::string snr_db, int points) {
        SweepOptions o;
        o.n_text = std::move(n);
        o.snr_db_text = std::move(snr_db);
        o.points = points;
        return o;
    };
    SweepOptions snr_o = defaults("8,16,32", "0:2:40", 0);
    SweepOptions n_o = defaults("6:1:64", "20", 0);
    SweepOptions d_o = defaults("16", "20", 100);
    SweepOptions q_o = defaults("8", "20", 20);
    struct SweepCommand {
        const char* name;
        const char* help;
        SweepKind kind;
        SweepOptions* opts;
        CLI::App* app = nullptr;
    };
    std::vector<SweepCommand> sweeps{{"sweep-snr", "MSE against SNR", SweepKind::Snr, &snr_o},
                                     {"sweep-n", "MSE/CRLB against N", SweepKind::NSamples, &n_o},
                                     {"sweep-delta", "MSE/CRLB against delta", SweepKind::Delta, &d_o},
                                     {"sweep-q", "MSE/CRLB against q2 = qH", SweepKind::Q2, &q_o}};
    for (auto& s : sweeps) {
        auto* sub = app.add_subcommand(s.name, s.help);
        common(sub, true);
        SweepOptions& o = *s.opts;
        sub->add_option("--n", o.n_text, "N value(s): list or start:step:stop")->capture_default_str();
        sub->add_option("--snr-db", o.snr_db_text, s.kind == SweepKind::Snr ? "SNR grid in dB" : "SNR in dB")->capture_default_str();
        if (s.kind == SweepKind::Delta || s.kind == SweepKind::Q2) {
            sub->add_option("--points", o.points, "Grid points")->check(CLI::Range(1, 100000))->capture_default_str();
        }
        if (s.kind == SweepKind::Delta) {
            sub->add_flag("--noiseless", o.noiseless, "No noise");
        }
        sub->add_option("--iters", o.iters, "Iterations I")->capture_default_str();
        if (s.kind != SweepKind::Q2) {
            sub->add_option("--q2", o.q2, "Shift for iterations >= 2 (proposed)")->capture_default_str();
            sub->add_option("--qh", o.qh, "HAQSE shift (default N^(-1/3))");
        }
        sub->add_option("--estimators", o.estimators, "Comma-separated estimators")->capture_default_str();
        sub->add_flag("--final-only", o.final_only, "Only report the last iteration");
        s.app = sub;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n";
        const auto subs = app.get_subcommands();
        std::cerr << (subs.empty() ? app.help() : subs.front()->help());
        return kExitInvalid;
    }

    std::string command_line;
    for (int i = 0; i < argc; ++i) {
        command_line += (i ? " " : "") + std::string(argv[i]);
    }

    try {
        if (*est) {
            return cmd_estimate(eo, seed, format, out_path);
        }
        if (*coe) {
            return cmd_coeffs(cn, cq, format, out_path);
        }
        if (*props) {
            return cmd_props(pn, pq, ppoints);
        }
        for (const auto& s : sweeps) {
            if (*s.app) {
                return cmd_sweep(s.kind, *s.opts, seed, trials.value_or(default_trials()), workers, format, out_path, command_line);
            }
        }
    } catch (const InvalidArgument& e) {
        fmt::print(std::cerr, "error: {}\n", e.what());
        return kExitInvalid;
    } catch (const NumericalError& e) {
        fmt::print(std::cerr, "numerical error: {}\n", e.what());
        return kExitNumerical;
    }
    return kExitInvalid;
}
