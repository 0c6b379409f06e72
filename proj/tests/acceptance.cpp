// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <future>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "agn/distributions.hpp"
#include "agn/harness/cli.hpp"
#include "agn/harness/config.hpp"
#include "agn/harness/oracle.hpp"
#include "agn/harness/records.hpp"
#include "agn/harness/sweep.hpp"
#include "agn/harness/verify.hpp"
#include "agn/theory.hpp"
#include "agn/trainer.hpp"

using namespace agn;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(const std::string& name, double budget_seconds, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < budget_seconds;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::ostringstream line;
    line.precision(6);
    line << (pass ? "PASS " : "FAIL ") << name << " [" << secs << " s of " << budget_seconds << " s] " << o.detail;
    if (!in_time) line << " (over time budget)";
    std::cout << line.str() << std::endl;
}

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(8);
    s << v;
    return s.str();
}

ExperimentConfig baseline_config() {
    ExperimentConfig c;
    c.network.width = 200;
    c.train.iterations = 20000;
    c.train.step_size = 0.01;
    return c;
}

Outcome oracle_grid() {
    const std::vector<DistributionSpec> grid = default_oracle_grid();
    std::vector<std::future<OracleCell>> cells;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        cells.push_back(std::async(std::launch::async, [&grid, i] {
            return compare_with_oracle(grid[i], 1000000, derive_seed(2024, i));
        }));
    }
    double worst = 0.0;
    std::size_t two_gaussian_cells = 0;
    bool has_anchor = false;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const OracleCell c = cells[i].get();
        worst = std::max({worst, c.opt_lin_z, c.bayes_z});
        if (c.spec.kind == DistributionKind::two_gaussian_adversarial) {
            ++two_gaussian_cells;
            has_anchor = has_anchor || (c.spec.margin == 0.5 && c.spec.boundary == 2.04 && c.spec.rcn_rate == 0.1);
        }
    }
    return {worst <= 3.0 && two_gaussian_cells >= 10 && has_anchor,
            "cells=" + std::to_string(grid.size()) + " max|z|=" + fmt(worst)};
}

Outcome boundary_round_trip() {
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        const double opt = 0.11 + 0.02 * i;
        const double b = boundary_from_opt(0.5, 0.1, opt);
        worst = std::max(worst, std::abs(opt_lin_two_gaussian(0.5, b, 0.1) - opt));
    }
    return {worst <= 1e-10, "max error=" + fmt(worst)};
}

Outcome identity_suites() {
    const SuiteReport key = run_key_identity_suite(100000, 11);
    const SuiteReport leaky = run_general_identity_suite(10000, 12, ActivationKind::leaky_relu);
    const SuiteReport tanh = run_general_identity_suite(10000, 13, ActivationKind::tanh);
    const double worst = std::min({key.min_slack, leaky.min_slack, tanh.min_slack});
    return {worst >= -1e-9 && key.tuples == 100000 && leaky.tuples == 10000 && tanh.tuples == 10000,
            "min slack key=" + fmt(key.min_slack) + " leaky=" + fmt(leaky.min_slack) + " tanh=" + fmt(tanh.min_slack)};
}

Outcome pathwise() {
    const PathwiseReport r = run_pathwise_suite(5, 0.1, 200, 20000);
    const bool ok = r.steps_checked == 20000 && r.min_key_identity_slack >= -1e-9 &&
                    r.min_correlation_growth_slack >= -1e-9 && r.min_norm_growth_slack >= -1e-9 &&
                    r.min_cauchy_schwarz_slack >= 0.0;
    return {ok, "steps=" + std::to_string(r.steps_checked) + " checkpoints=" + std::to_string(r.checkpoints) +
                    " growth=" + fmt(r.min_correlation_growth_slack) + " norm=" + fmt(r.min_norm_growth_slack) +
                    " G-|H|=" + fmt(r.min_cauchy_schwarz_slack)};
}

Outcome gradients() {
    const SuiteReport r = run_gradient_suite(1000, 21);
    // min_slack = 1e-5 - max relative error.
    return {r.tuples == 1000 && r.min_slack >= 0.0, "max relative error=" + fmt(1e-5 - r.min_slack)};
}

Outcome markov_link() {
    const std::vector<double> opts = {0.12, 0.15, 0.2, 0.25, 0.3};
    std::vector<std::future<ExperimentResult>> runs;
    for (std::size_t i = 0; i < 10; ++i) {
        runs.push_back(std::async(std::launch::async, [&opts, i] {
            ExperimentConfig c = baseline_config();
            c.target_opt_lin = opts[i % opts.size()];
            c.train.iterations = 5000 + 3000 * i;
            c.train.seed = 100 + i;
            c.resolve();
            return train(c.distribution, c.network, c.train).result;
        }));
    }
    double worst = std::numeric_limits<double>::infinity();
    for (auto& f : runs) {
        const ExperimentResult r = f.get();
        const double n = 100000.0;
        const double se = std::sqrt(r.test_error * (1.0 - r.test_error) / n);
        worst = std::min(worst, markov_error_bound(r.surrogate_risk_at_best, LossSpec{}) + 3.0 * se - r.test_error);
    }
    return {worst >= 0.0, "min(bound + 3 SE - error)=" + fmt(worst)};
}

// Runs a 3-seed opt_lin sweep on a baseline network and returns per-cell
// (opt_lin, mean accuracy).
std::vector<std::pair<double, double>> opt_sweep(DistributionKind kind, const std::vector<double>& opts) {
    SweepSpec s;
    s.base = baseline_config();
    s.base.distribution.kind = kind;
    s.variable = SweepVariable::opt_lin;
    for (double o : opts) s.values.push_back(o);
    s.seeds = 3;
    const SweepResult r = run_sweep(s);
    std::vector<std::pair<double, double>> out;
    for (const CellSummary& c : r.cells) {
        if (c.failed()) throw std::runtime_error("cell " + std::to_string(c.index) + " failed: " + c.error);
        out.push_back({c.opt_lin, c.mean_accuracy});
    }
    return out;
}

Outcome accuracy_tracks_opt() {
    const auto cells = opt_sweep(DistributionKind::two_gaussian_adversarial, {0.12, 0.15, 0.20, 0.25, 0.30});
    double worst = 0.0;
    std::string detail;
    for (const auto& [opt, acc] : cells) {
        worst = std::max(worst, std::abs(acc - (1.0 - opt)));
        detail += " " + fmt(opt) + ":" + fmt(acc);
    }
    return {worst <= 0.02, "max|acc-(1-OPT)|=" + fmt(worst) + " cells" + detail};
}

Outcome absolute_boundary_beats_linear() {
    const auto cells = opt_sweep(DistributionKind::absolute_boundary, {0.08, 0.26, 0.40});
    bool ok = true;
    std::string detail;
    for (const auto& [opt, acc] : cells) {
        ok = ok && acc > 1.0 - opt && acc > 1.0 - std::sqrt(opt);
        detail += " " + fmt(opt) + ":" + fmt(acc);
    }
    return {ok, "cells" + detail};
}

Outcome theorem_closed_forms() {
    bool ok = true;
    std::size_t checked = 0;
    for (double alpha : {0.1, 0.3, 1.0}) {
        for (double opt : {0.01, 0.05, 0.2, 0.4}) {
            for (double c : {0.5, 1.0, 2.5}) {
                BoundInputs hm;
                hm.profile.opt_lin = opt;
                hm.profile.hard_margin = 0.5;
                hm.profile.subexp_norm = c;
                hm.profile.optimal_halfspace = {1.0, 0.0};
                hm.alpha = alpha;
                const BoundReport h = theorem_bound(hm);
                const double h_expected = 4.0 / alpha * (1.0 + c / 0.5 + c / 0.5 * std::log(1.0 / opt)) * opt;
                ok = ok && h.regime == BoundRegime::hard_margin && h.err_bound == h_expected;

                BoundInputs ac;
                ac.profile.opt_lin = opt;
                ac.profile.anticoncentration = 1.0 / std::sqrt(2.0 * M_PI);
                ac.profile.subexp_norm = c;
                ac.profile.optimal_halfspace = {0.0, -1.0};
                ac.alpha = alpha;
                const BoundReport a = theorem_bound(ac);
                const double g = std::sqrt(opt);
                const double u = *ac.profile.anticoncentration;
                const double a_expected = 4.0 / alpha * (2.0 * u * g + 3.0 * (c / g) * opt * std::log(1.0 / opt));
                ok = ok && a.regime == BoundRegime::anticoncentration && a.gamma == g && a.err_bound == a_expected;
                checked += 2;

                // Iteration bound: closed form, inverse scaling in eta and
                // alpha^2, linear in G0 above 1, flat below.
                BoundInputs t = hm;
                t.xi = 0.3;
                t.step_size = 0.01;
                t.initial_norm = 2.0;
                const double base = theorem_bound(t).t_bound;
                const double want = 4.0 / (0.01 * alpha * alpha * 0.25 * 0.09) * 2.0;
                ok = ok && std::abs(base - want) <= 1e-13 * want;
                t.step_size = 0.02;
                ok = ok && std::abs(theorem_bound(t).t_bound - base / 2.0) <= 1e-13 * base;
                t.step_size = 0.01;
                t.initial_norm = 4.0;
                ok = ok && std::abs(theorem_bound(t).t_bound - 2.0 * base) <= 1e-13 * base;
                t.initial_norm = 0.5;
                const double flat = theorem_bound(t).t_bound;
                t.initial_norm = 1.0;
                ok = ok && theorem_bound(t).t_bound == flat;
                t.xi = 0.6;
                ok = ok && theorem_bound(t).t_bound < flat;
            }
        }
    }
    return {ok, "cases=" + std::to_string(checked)};
}

Outcome determinism() {
    const fs::path dir = fs::temp_directory_path() / "agn_acceptance_determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    ExperimentConfig c = baseline_config();
    c.target_opt_lin = 0.2;
    write_json_file(to_json(c), dir / "config.json");
    auto run = [&](const std::string& sub) {
        const std::string out = (dir / sub).string();
        const std::string cfg = (dir / "config.json").string();
        const char* argv[] = {"agn", "train", "--config", cfg.c_str(), "--seed", "7", "--out", out.c_str()};
        std::ostringstream o, e;
        if (run_cli(8, argv, o, e) != kExitOk) throw std::runtime_error("train failed: " + e.str());
        return without_timing(read_json_file(dir / sub / "run.json")).dump(2);
    };
    const std::string a = run("a");
    const std::string b = run("b");
    return {a == b, a == b ? "identical result JSON" : "result JSON differs"};
}

}  // namespace

int main() {
    const auto start = std::chrono::steady_clock::now();
    criterion("analytic_vs_oracle", 120, oracle_grid);
    criterion("boundary_round_trip", 1, boundary_round_trip);
    criterion("key_identity_suites", 30, identity_suites);
    criterion("pathwise_growth_inequalities", 120, pathwise);
    criterion("gradient_correctness", 30, gradients);
    criterion("markov_link", 120, markov_link);
    criterion("accuracy_tracks_one_minus_opt", 600, accuracy_tracks_opt);
    criterion("absolute_boundary_beats_linear", 300, absolute_boundary_beats_linear);
    criterion("theorem_bound_closed_forms", 1, theorem_closed_forms);
    criterion("train_determinism", 60, determinism);
    const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << " total " << total << " s"
              << std::endl;
    return failures == 0 ? 0 : 1;
}
