#include "agn/harness/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "agn/error.hpp"
#include "agn/harness/oracle.hpp"
#include "agn/harness/records.hpp"

namespace agn {

using nlohmann::json;

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

json to_json(const SuiteReport& r) {
    return {{"name", r.name},
            {"tuples", r.tuples},
            {"seed", r.seed},
            {"min_slack", finite_or_null(r.min_slack)},
            {"worst_index", r.worst_index},
            {"worst_seed", r.worst_seed},
            {"threshold", r.threshold},
            {"violations", r.violations},
            {"seconds", r.seconds},
            {"passed", r.passed()}};
}

PathwiseReport run_pathwise_suite(std::uint64_t seed, double leaky_slope, std::size_t width, std::size_t iterations) {
    const auto start = std::chrono::steady_clock::now();
    DistributionSpec spec;
    NetworkConfig net;
    net.width = width;
    net.leaky_slope = leaky_slope;
    net.input_dim = spec.dimension;
    TrainConfig cfg;
    cfg.iterations = iterations;
    cfg.seed = seed;
    cfg.validation_size = 2000;
    cfg.test_size = 2000;
    const TrainOutput out = train(spec, net, cfg);
    const TheoryTrace& t = out.trace;

    PathwiseReport r;
    r.steps_checked = t.steps_checked;
    r.checkpoints = t.rows.size();
    r.min_key_identity_slack = t.min_key_identity_slack;
    r.min_correlation_growth_slack = t.min_correlation_growth_slack;
    r.min_norm_growth_slack = t.min_norm_growth_slack;
    r.min_cauchy_schwarz_slack = t.min_cauchy_schwarz_slack;
    r.suite.name = "pathwise";
    r.suite.tuples = t.steps_checked;
    r.suite.seed = seed;
    r.suite.worst_seed = seed;
    r.suite.min_slack = std::min({r.min_key_identity_slack, r.min_correlation_growth_slack, r.min_norm_growth_slack,
                                  r.min_cauchy_schwarz_slack});
    if (!t.pathwise_checks || t.steps_checked != iterations) {
        r.suite.violations = 1;  // the checks did not run on every step
    }
    for (const TraceRow& row : t.rows) {
        for (double s : {row.key_identity_slack, row.correlation_growth_slack, row.norm_growth_slack,
                         row.cauchy_schwarz_slack}) {
            if (!std::isnan(s) && s < r.suite.threshold) ++r.suite.violations;
        }
    }
    if (std::isnan(r.suite.min_slack)) ++r.suite.violations;
    r.suite.seconds = seconds_since(start);
    return r;
}

VerifyResult run_verify(const VerifyOptions& options) {
    for (const std::string& s : options.suites) {
        if (std::find(kVerifySuites.begin(), kVerifySuites.end(), s) == kVerifySuites.end()) {
            throw InvalidArgument("unknown suite '" + s + "'");
        }
    }
    if (options.tuples && *options.tuples == 0) throw InvalidArgument("tuple count must be >= 1");
    if (!(options.leaky_slope > 0.0 && options.leaky_slope <= 1.0)) {
        throw InvalidArgument("leaky slope must lie in (0,1], got " + std::to_string(options.leaky_slope));
    }
    auto count = [&](std::size_t fallback) { return options.tuples.value_or(fallback); };
    auto wants = [&](const char* name) {
        return std::find(options.suites.begin(), options.suites.end(), name) != options.suites.end();
    };

    json suites = json::array();
    bool passed = true;
    auto add = [&](const SuiteReport& r, json extra = json::object()) {
        json j = to_json(r);
        j.update(extra);
        suites.push_back(j);
        passed = passed && r.passed();
    };

    if (wants("key_identity")) add(run_key_identity_suite(count(100000), options.seed, options.threads));
    if (wants("general_leaky")) {
        add(run_general_identity_suite(count(10000), options.seed, ActivationKind::leaky_relu, options.threads));
    }
    if (wants("general_tanh")) {
        add(run_general_identity_suite(count(10000), options.seed, ActivationKind::tanh, options.threads));
    }
    if (wants("implication")) add(run_identity_implication_suite(count(10000), options.seed, options.threads));
    if (wants("gradient")) add(run_gradient_suite(count(1000), options.seed, options.threads));
    if (wants("pathwise")) {
        const PathwiseReport p = run_pathwise_suite(options.seed, options.leaky_slope);
        add(p.suite, {{"checkpoints", p.checkpoints},
                      {"min_key_identity_slack", finite_or_null(p.min_key_identity_slack)},
                      {"min_correlation_growth_slack", finite_or_null(p.min_correlation_growth_slack)},
                      {"min_norm_growth_slack", finite_or_null(p.min_norm_growth_slack)},
                      {"min_cauchy_schwarz_slack", finite_or_null(p.min_cauchy_schwarz_slack)}});
    }
    if (wants("oracle")) {
        const auto start = std::chrono::steady_clock::now();
        SuiteReport r;
        r.name = "oracle";
        r.seed = options.seed;
        r.min_slack = std::numeric_limits<double>::infinity();
        json cells = json::array();
        const auto grid = default_oracle_grid();
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const std::uint64_t cell_seed = derive_seed(options.seed, i);
            const OracleCell c = compare_with_oracle(grid[i], options.oracle_samples, cell_seed);
            const double slack = 3.0 - std::max(c.opt_lin_z, c.bayes_z);
            if (slack < r.min_slack) {
                r.min_slack = slack;
                r.worst_index = i;
                r.worst_seed = cell_seed;
            }
            if (slack < 0.0) ++r.violations;
            cells.push_back({{"kind", std::string(to_string(c.spec.kind))},
                             {"margin", c.spec.margin},
                             {"boundary", c.spec.boundary},
                             {"rcn_rate", c.spec.rcn_rate},
                             {"analytic_opt_lin", c.analytic_opt_lin},
                             {"oracle_opt_lin", c.opt_lin.estimate},
                             {"oracle_opt_lin_se", c.opt_lin.standard_error},
                             {"analytic_bayes", c.analytic_bayes},
                             {"oracle_bayes", c.bayes.estimate},
                             {"oracle_bayes_se", c.bayes.standard_error}});
        }
        r.tuples = grid.size();
        r.threshold = 0.0;
        r.seconds = seconds_since(start);
        add(r, {{"samples", options.oracle_samples}, {"cells", cells}});
    }

    VerifyResult out;
    out.passed = passed;
    out.report = {{"format", "agn-verify"},
                  {"artifact_version", artifact_version()},
                  {"seed", options.seed},
                  {"passed", passed},
                  {"suites", suites}};
    return out;
}

}  // namespace agn
