#include "agn/harness/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "agn/csv.hpp"
#include "agn/error.hpp"
#include "agn/harness/config.hpp"
#include "agn/harness/oracle.hpp"
#include "agn/harness/plot.hpp"
#include "agn/harness/records.hpp"
#include "agn/harness/sweep.hpp"
#include "agn/harness/verify.hpp"
#include "agn/network_io.hpp"

namespace agn {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const IoError*>(&e)) return kExitIo;
    if (dynamic_cast<const ParseError*>(&e)) return kExitParse;
    if (dynamic_cast<const InfeasibleSpec*>(&e)) return kExitInfeasible;
    if (dynamic_cast<const NonFiniteError*>(&e)) return kExitNonFinite;
    if (dynamic_cast<const InvalidArgument*>(&e) || dynamic_cast<const DimensionError*>(&e)) return kExitUsage;
    return kExitFailure;
}

namespace {

fs::path output_dir(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
    return "agn_out";
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    bool paper_scale = false;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool config_required) {
    auto* opt = cmd->add_option("--config", f.config, "JSON configuration file");
    if (config_required) opt->required();
    cmd->add_option("--seed", f.seed, "Override the experiment seed");
    cmd->add_option("--out", f.out, std::string("Output directory (default $") + kOutDirEnv + " or ./agn_out)");
    cmd->add_flag("--paper-scale", f.paper_scale, "Full-scale protocol (m = 1000, 10 seeds)");
}

int cmd_train(const CommonFlags& f, const std::string& stem, std::ostream& out) {
    ExperimentConfig config = experiment_from_json(read_json_file(f.config));
    if (f.seed) config.train.seed = *f.seed;
    if (f.paper_scale) apply_paper_scale(config);
    config.resolve();
    const TrainOutput result = train(config.distribution, config.network, config.train);
    const fs::path dir = output_dir(f.out);
    const RunFiles files = write_run(dir, stem, config, result);
    const ExperimentResult& r = result.result;
    out << "t*=" << r.best_iterate << " test_error=" << format_number(r.test_error)
        << " opt_lin=" << format_number(r.opt_lin) << " bayes_risk=" << format_number(r.bayes_risk)
        << " result=" << files.result.string() << '\n';
    return kExitOk;
}

int cmd_sweep(const CommonFlags& f, std::optional<std::size_t> threads, bool quiet, std::ostream& out,
              std::ostream& err) {
    SweepSpec spec = sweep_from_json(read_json_file(f.config));
    if (f.seed) spec.base.train.seed = *f.seed;
    if (f.paper_scale) apply_paper_scale(spec);
    if (threads) spec.threads = *threads;
    const fs::path dir = output_dir(f.out);
    ensure_dir(dir);
    SweepOptions options;
    options.out_dir = dir;
    options.progress = quiet ? nullptr : &err;
    const SweepResult result = run_sweep(spec, options);
    const std::string comment = header_comment(spec.base.train.seed);
    write_sweep_table(result, dir / "sweep_table.csv", comment);
    const std::vector<AccuracyRow> rows = accuracy_rows(result);
    write_accuracy_csv(rows, dir / "plot_data.csv", comment);
    if (!rows.empty()) write_accuracy_svg(rows, dir / "accuracy.svg", comment);
    write_json_file(sweep_summary_json(spec, result), dir / "sweep_summary.json");
    for (const CellSummary& c : result.cells) {
        out << "cell " << c.index << " " << c.value.dump() << " opt_lin=" << format_number(c.opt_lin)
            << " accuracy=" << format_number(c.mean_accuracy) << " sd=" << format_number(c.sd_accuracy) << " runs="
            << c.succeeded() << "/" << c.runs.size() << '\n';
    }
    if (!result.failed_cells.empty()) {
        out << "failed cells:";
        for (std::size_t i : result.failed_cells) out << ' ' << i;
        out << '\n';
        return kExitFailure;
    }
    return kExitOk;
}

int cmd_verify(const VerifyOptions& options, const std::string& out_flag, std::ostream& out) {
    const VerifyResult result = run_verify(options);
    out << result.report.dump(2) << '\n';
    if (!out_flag.empty()) {
        ensure_dir(out_flag);
        write_json_file(result.report, fs::path(out_flag) / "verify_report.json");
    }
    return result.passed ? kExitOk : kExitFailure;
}

json oracle_cell_json(const OracleCell& c) {
    return {{"kind", std::string(to_string(c.spec.kind))},
            {"margin", c.spec.margin},
            {"boundary", c.spec.boundary},
            {"rcn_rate", c.spec.rcn_rate},
            {"analytic_opt_lin", c.analytic_opt_lin},
            {"oracle_opt_lin", c.opt_lin.estimate},
            {"oracle_opt_lin_se", c.opt_lin.standard_error},
            {"opt_lin_z", c.opt_lin_z},
            {"analytic_bayes", c.analytic_bayes},
            {"oracle_bayes", c.bayes.estimate},
            {"oracle_bayes_se", c.bayes.standard_error},
            {"bayes_z", c.bayes_z}};
}

int cmd_oracle(const CommonFlags& f, std::size_t samples, std::ostream& out) {
    const std::uint64_t seed = f.seed.value_or(1);
    std::vector<DistributionSpec> specs;
    if (!f.config.empty()) {
        ExperimentConfig config = experiment_from_json(read_json_file(f.config));
        config.resolve();
        specs.push_back(config.distribution);
    } else {
        specs = default_oracle_grid();
    }
    json cells = json::array();
    bool within = true;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const OracleCell c = compare_with_oracle(specs[i], samples, derive_seed(seed, i));
        within = within && c.opt_lin_z <= 3.0 && c.bayes_z <= 3.0;
        cells.push_back(oracle_cell_json(c));
    }
    const json report = {{"format", "agn-oracle"},
                         {"artifact_version", artifact_version()},
                         {"seed", seed},
                         {"samples", samples},
                         {"within_3se", within},
                         {"cells", cells}};
    out << report.dump(2) << '\n';
    if (!f.out.empty()) {
        ensure_dir(f.out);
        write_json_file(report, fs::path(f.out) / "oracle_report.json");
    }
    return within ? kExitOk : kExitFailure;
}

int cmd_plot(const std::string& accuracy, const std::string& network, std::size_t resolution, const CommonFlags& f,
             std::ostream& out) {
    if (accuracy.empty() && network.empty()) throw InvalidArgument("plot needs --accuracy and/or --network");
    const fs::path dir = output_dir(f.out);
    ensure_dir(dir);
    const std::string comment = header_comment(f.seed.value_or(0));
    if (!accuracy.empty()) {
        const std::vector<AccuracyRow> rows = read_accuracy_csv(accuracy);
        write_accuracy_svg(rows, dir / "accuracy.svg", comment);
        out << "wrote " << (dir / "accuracy.svg").string() << '\n';
    }
    if (!network.empty()) {
        const NetworkParams params = load_network(network);
        const DecisionRaster raster = decision_raster(params, resolution);
        write_raster_csv(raster, dir / "decision_raster.csv", comment);
        write_raster_svg(raster, dir / "decision_raster.svg", comment);
        out << "wrote " << (dir / "decision_raster.csv").string() << " and " << (dir / "decision_raster.svg").string()
            << '\n';
    }
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Train and verify one-hidden-layer leaky ReLU networks on noisy synthetic data"};
    app.require_subcommand(1);

    CommonFlags train_flags;
    std::string stem = "run";
    auto* train_cmd = app.add_subcommand("train", "Run one training experiment");
    add_common(train_cmd, train_flags, true);
    train_cmd->add_option("--name", stem, "Stem of the output file names");

    CommonFlags sweep_flags;
    std::optional<std::size_t> threads;
    bool quiet = false;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run a parameter sweep");
    add_common(sweep_cmd, sweep_flags, true);
    sweep_cmd->add_option("--threads", threads, "Worker threads (default: all cores)");
    sweep_cmd->add_flag("--quiet", quiet, "No per-run progress lines");

    VerifyOptions verify;
    std::string verify_out;
    std::vector<std::string> suites;
    std::optional<std::size_t> tuples;
    auto* verify_cmd = app.add_subcommand("verify", "Run randomized verification suites");
    verify_cmd->add_option("--suite", suites, "Suites to run (default: all)")
        ->check(CLI::IsMember(kVerifySuites));
    verify_cmd->add_option("--tuples", tuples, "Random tuples per suite");
    verify_cmd->add_option("--seed", verify.seed, "Suite seed");
    verify_cmd->add_option("--leaky-slope", verify.leaky_slope, "Leaky ReLU slope of the pathwise run");
    verify_cmd->add_option("--threads", verify.threads, "Worker threads (default: all cores)");
    verify_cmd->add_option("--oracle-samples", verify.oracle_samples, "Samples per Monte-Carlo oracle");
    verify_cmd->add_option("--out", verify_out, "Also write verify_report.json here");

    CommonFlags oracle_flags;
    std::size_t samples = 1000000;
    auto* oracle_cmd = app.add_subcommand("oracle", "Compare closed forms with Monte-Carlo oracles");
    add_common(oracle_cmd, oracle_flags, false);
    oracle_cmd->add_option("--samples", samples, "Samples per oracle");

    CommonFlags plot_flags;
    std::string accuracy_path, network_path;
    std::size_t resolution = 300;
    auto* plot_cmd = app.add_subcommand("plot", "Render figures from result files");
    plot_cmd->add_option("--accuracy", accuracy_path, "Plot-data CSV from a sweep");
    plot_cmd->add_option("--network", network_path, "Network snapshot for a decision raster");
    plot_cmd->add_option("--resolution", resolution, "Raster cells per side");
    plot_cmd->add_option("--out", plot_flags.out, "Output directory");
    plot_cmd->add_option("--seed", plot_flags.seed, "Seed recorded in the file headers");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*train_cmd) return cmd_train(train_flags, stem, out);
        if (*sweep_cmd) return cmd_sweep(sweep_flags, threads, quiet, out, err);
        if (*verify_cmd) {
            if (!suites.empty()) verify.suites = suites;
            verify.tuples = tuples;
            return cmd_verify(verify, verify_out, out);
        }
        if (*oracle_cmd) return cmd_oracle(oracle_flags, samples, out);
        if (*plot_cmd) return cmd_plot(accuracy_path, network_path, resolution, plot_flags, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
    return kExitUsage;
}

}  // namespace agn
