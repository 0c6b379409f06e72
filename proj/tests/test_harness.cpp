#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "agn/error.hpp"
#include "agn/harness/cli.hpp"
#include "agn/harness/config.hpp"
#include "agn/harness/oracle.hpp"
#include "agn/harness/plot.hpp"
#include "agn/harness/records.hpp"
#include "agn/harness/sweep.hpp"
#include "agn/network_io.hpp"

using namespace agn;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("agn_harness_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

json small_config() {
    return json::parse(R"({
        "version": 1,
        "distribution": {"kind": "two_gaussian_adversarial", "margin": 0.5, "opt_lin": 0.2, "rcn_rate": 0.1},
        "network": {"width": 40},
        "train": {"iterations": 1500, "validation_size": 1000, "test_size": 4000, "seed": 3}
    })");
}

fs::path write_config(const fs::path& dir, const json& j, const std::string& name = "config.json") {
    const fs::path p = dir / name;
    std::ofstream(p) << j.dump(2);
    return p;
}

struct CliRun {
    int code = 0;
    std::string out;
    std::string err;
};

CliRun cli(std::vector<std::string> args) {
    args.insert(args.begin(), "agn");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    CliRun r;
    r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

json read_json(const fs::path& p) { return read_json_file(p); }

}  // namespace

TEST_CASE("config parsing is strict") {
    CHECK_NOTHROW(experiment_from_json(small_config()));

    json j = small_config();
    j["network"]["widht"] = 10;
    CHECK_THROWS_AS(experiment_from_json(j), ParseError);

    j = small_config();
    j["version"] = 2;
    CHECK_THROWS_AS(experiment_from_json(j), ParseError);

    j = small_config();
    j["distribution"]["boundary"] = 2.0;
    CHECK_THROWS_AS(experiment_from_json(j), ParseError);

    j = small_config();
    j["train"]["iterations"] = "many";
    CHECK_THROWS_AS(experiment_from_json(j), ParseError);

    j = small_config();
    j["train"]["batch_mode"] = {{"kind", "minibatch"}, {"batch_size", 16}, {"epochs", 2}};
    const ExperimentConfig c = experiment_from_json(j);
    CHECK(c.train.batch_mode.kind == BatchKind::minibatch);
    CHECK(c.train.batch_mode.batch_size == 16);
}

TEST_CASE("config round trip through JSON") {
    ExperimentConfig c = experiment_from_json(small_config());
    c.resolve();
    ExperimentConfig back = experiment_from_json(to_json(c));
    back.resolve();
    CHECK(to_json(back) == to_json(c));
    CHECK(c.distribution.boundary == doctest::Approx(boundary_from_opt(0.5, 0.1, 0.2)).epsilon(1e-15));
}

TEST_CASE("infeasible targets are rejected on resolve") {
    json j = small_config();
    j["distribution"]["opt_lin"] = 0.95;
    ExperimentConfig c = experiment_from_json(j);
    CHECK_THROWS_AS(c.resolve(), InfeasibleSpec);
}

TEST_CASE("sweep cells apply the swept variable") {
    json j = small_config();
    j["sweep"] = {{"variable", "width"}, {"values", {10, 20}}, {"seeds", 2}};
    SweepSpec s = sweep_from_json(j);
    CHECK(s.cell(1).network.width == 20);
    s.paper_scale = true;
    CHECK(s.cell(0).network.width == 10);

    j["sweep"] = {{"variable", "architecture"}, {"values", {"baseline", "bias_trainable", "deep3"}}};
    s = sweep_from_json(j);
    CHECK_FALSE(s.cell(0).network.biases);
    CHECK(s.cell(1).network.biases);
    CHECK(s.cell(1).network.outer_trainable);
    CHECK(s.cell(2).network.hidden_layers == 3);

    j["sweep"] = {{"variable", "colour"}, {"values", {1}}};
    CHECK_THROWS_AS(sweep_from_json(j), ParseError);
    j["sweep"] = {{"variable", "width"}, {"values", json::array()}};
    CHECK_THROWS(sweep_from_json(j).validate());
}

TEST_CASE("mean and sample standard deviation") {
    auto [m, sd] = mean_sd({1.0, 2.0, 3.0, 4.0});
    CHECK(m == 2.5);
    CHECK(sd == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-15));
    auto [m1, sd1] = mean_sd({0.7});
    CHECK(m1 == 0.7);
    CHECK(sd1 == 0.0);
}

TEST_CASE("cli exit codes") {
    const fs::path dir = scratch("codes");
    CHECK(cli({}).code == kExitUsage);
    CHECK(cli({"frobnicate"}).code == kExitUsage);
    CHECK(cli({"verify", "--tuples", "0"}).code == kExitUsage);
    CHECK(cli({"verify", "--suite", "nonsense"}).code == kExitUsage);
    CHECK(cli({"verify", "--suite", "pathwise", "--leaky-slope", "-0.1"}).code == kExitUsage);

    const CliRun missing = cli({"train", "--config", (dir / "nope.json").string()});
    CHECK(missing.code == kExitIo);
    CHECK(missing.err.find("nope.json") != std::string::npos);

    std::ofstream(dir / "broken.json") << "{\"version\": 1,";
    CHECK(cli({"train", "--config", (dir / "broken.json").string()}).code == kExitParse);

    json j = small_config();
    j["distribution"]["opt_lin"] = 0.95;
    CHECK(cli({"train", "--config", write_config(dir, j).string(), "--out", dir.string()}).code == kExitInfeasible);

    j = small_config();
    j["train"]["step_size"] = 1e308;
    CHECK(cli({"train", "--config", write_config(dir, j).string(), "--out", dir.string()}).code == kExitNonFinite);

    const CliRun ok = cli({"verify", "--suite", "key_identity", "--tuples", "200"});
    CHECK(ok.code == kExitOk);
    CHECK(json::parse(ok.out)["passed"] == true);
}

TEST_CASE("train writes a valid, deterministic result") {
    const fs::path dir = scratch("train");
    const fs::path cfg = write_config(dir, small_config());
    const CliRun a = cli({"train", "--config", cfg.string(), "--seed", "7", "--out", (dir / "a").string()});
    REQUIRE(a.code == kExitOk);
    const CliRun b = cli({"train", "--config", cfg.string(), "--seed", "7", "--out", (dir / "b").string()});
    REQUIRE(b.code == kExitOk);
    for (const char* f : {"run.json", "run_trace.csv", "run_validation.csv", "run_best.agnw"}) {
        CHECK(fs::exists(dir / "a" / f));
    }
    const json ra = read_json(dir / "a" / "run.json");
    CHECK_NOTHROW(validate_result_json(ra));
    CHECK(ra["seed"] == 7);
    CHECK(ra["config"]["train"]["seed"] == 7);
    CHECK(without_timing(ra).dump() == without_timing(read_json(dir / "b" / "run.json")).dump());

    json broken = ra;
    broken["result"].erase("test_error");
    CHECK_THROWS_AS(validate_result_json(broken), ParseError);

    // Saved snapshot classifies like the recorded best iterate.
    const NetworkParams best = load_network(dir / "a" / "run_best.agnw");
    CHECK(best.width() == 40);
}

TEST_CASE("a one-cell one-seed sweep equals a train run") {
    const fs::path dir = scratch("sweep1");
    json j = small_config();
    const fs::path train_cfg = write_config(dir, j, "train.json");
    j["sweep"] = {{"variable", "opt_lin"}, {"values", {0.2}}, {"seeds", 1}};
    const fs::path sweep_cfg = write_config(dir, j, "sweep.json");
    REQUIRE(cli({"train", "--config", train_cfg.string(), "--out", (dir / "t").string()}).code == kExitOk);
    REQUIRE(cli({"sweep", "--config", sweep_cfg.string(), "--quiet", "--out", (dir / "s").string()}).code == kExitOk);
    const json t = read_json(dir / "t" / "run.json");
    const json s = read_json(dir / "s" / "runs" / "cell0_seed3.json");
    CHECK(t["result"] == s["result"]);
    CHECK(t["config"] == s["config"]);
    for (const char* f : {"sweep_table.csv", "plot_data.csv", "accuracy.svg", "sweep_summary.json", "runs.jsonl"}) {
        CHECK(fs::exists(dir / "s" / f));
    }
}

TEST_CASE("sweep aggregation, run records and failed cells") {
    const fs::path dir = scratch("sweep3");
    json j = small_config();
    j["train"]["iterations"] = 800;
    j["sweep"] = {{"variable", "opt_lin"}, {"values", {0.15, 0.3, 0.97}}, {"seeds", 3}, {"threads", 4}};
    REQUIRE(cli({"sweep", "--config", write_config(dir, j).string(), "--quiet", "--out", dir.string()}).code ==
            kExitFailure);

    const json summary = read_json(dir / "sweep_summary.json");
    const json cells = summary["cells"];
    REQUIRE(cells.size() == 3);
    CHECK(summary["failed_cells"] == json::array({2}));
    CHECK_FALSE(cells[2]["error"].get<std::string>().empty());

    // Recompute mean/sd from the per-run result files.
    std::ifstream log(dir / "runs.jsonl");
    std::map<int, std::vector<double>> acc;
    std::string line;
    std::size_t records = 0;
    while (std::getline(log, line)) {
        const json rec = json::parse(line);
        if (!rec.contains("result")) continue;
        ++records;
        const json run = read_json(dir / rec["result"].get<std::string>());
        acc[rec["cell"].get<int>()].push_back(run["result"]["test_accuracy"].get<double>());

        if (records == 1) {
            // A record reproduces its run from the stored config alone.
            ExperimentConfig cfg = experiment_from_json(run["config"]);
            cfg.resolve();
            const TrainOutput again = train(cfg.distribution, cfg.network, cfg.train);
            CHECK(again.result.test_error == run["result"]["test_error"].get<double>());
        }
    }
    CHECK(records == 6);
    for (int c = 0; c < 2; ++c) {
        REQUIRE(acc[c].size() == 3);
        double mean = 0.0;
        for (double v : acc[c]) mean += v;
        mean /= 3.0;
        double ss = 0.0;
        for (double v : acc[c]) ss += (v - mean) * (v - mean);
        CHECK(cells[c]["mean_accuracy"].get<double>() == doctest::Approx(mean).epsilon(1e-12));
        CHECK(cells[c]["sd_accuracy"].get<double>() == doctest::Approx(std::sqrt(ss / 2.0)).epsilon(1e-12));
    }

    const std::vector<AccuracyRow> rows = read_accuracy_csv(dir / "plot_data.csv");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].opt_lin == doctest::Approx(0.15).epsilon(1e-12));
    CHECK(rows[0].linear_best == doctest::Approx(0.85).epsilon(1e-12));
}

TEST_CASE("plot inputs") {
    const fs::path dir = scratch("plot");
    save_network(zero_network(10, 2, 0.1), dir / "zero.agnw");
    REQUIRE(cli({"plot", "--network", (dir / "zero.agnw").string(), "--resolution", "50", "--out", dir.string()})
                .code == kExitOk);
    const DecisionRaster r = decision_raster(zero_network(10, 2, 0.1), 50);
    for (int s : r.sign) CHECK(s == 0);
    CHECK(fs::exists(dir / "decision_raster.svg"));

    std::ofstream(dir / "bad.csv") << "opt_lin,nn_mean,nn_sd,linear_best,bayes\n0.1,0.9,0.01,0.9,0.95\n0.2,oops,0,0.8,0.9\n";
    try {
        read_accuracy_csv(dir / "bad.csv");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find(":3:") != std::string::npos);
    }
    CHECK(cli({"plot", "--accuracy", (dir / "bad.csv").string(), "--out", dir.string()}).code == kExitParse);
    CHECK(cli({"plot", "--out", dir.string()}).code == kExitUsage);

    // A network that has learned sgn(x1) disagrees with it nowhere.
    NetworkParams p = zero_network(2, 2, 1.0);
    p.hidden_weights(0, 0) = 1.0;
    p.hidden_weights(1, 0) = -1.0;
    const DecisionRaster lin = decision_raster(p, 60);
    CHECK(raster_disagreement_with_x1(lin, 0.0) == 0.0);
}

TEST_CASE("oracle subcommand on the absolute boundary") {
    const fs::path dir = scratch("oracle");
    const json j = json::parse(R"({"version": 1, "distribution": {"kind": "absolute_boundary", "boundary": 1.0}})");
    const CliRun r = cli({"oracle", "--config", write_config(dir, j).string(), "--samples", "100000"});
    REQUIRE(r.code == kExitOk);
    const json report = json::parse(r.out);
    CHECK(report["cells"][0]["analytic_opt_lin"].get<double>() == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(report["within_3se"] == true);
}
