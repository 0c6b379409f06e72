#include "agn/harness/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include "agn/csv.hpp"
#include "agn/error.hpp"
#include "agn/harness/records.hpp"

namespace agn {

std::size_t CellSummary::succeeded() const {
    return static_cast<std::size_t>(std::count_if(runs.begin(), runs.end(), [](const SeedRun& r) { return r.ok; }));
}

bool CellSummary::failed() const { return succeeded() == 0; }

std::uint64_t sweep_run_seed(const SweepSpec& spec, std::size_t k) { return spec.base.train.seed + k; }

std::pair<double, double> mean_sd(const std::vector<double>& values) {
    if (values.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    if (values.size() == 1) return {mean, 0.0};
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

SweepResult run_sweep(const SweepSpec& spec, const SweepOptions& options) {
    spec.validate();
    SweepResult result;
    result.variable = spec.variable;
    const std::size_t ncells = spec.values.size();
    result.cells.resize(ncells);

    std::vector<std::optional<ExperimentConfig>> configs(ncells);
    for (std::size_t c = 0; c < ncells; ++c) {
        CellSummary& cell = result.cells[c];
        cell.index = c;
        cell.value = spec.values[c];
        cell.runs.resize(spec.seeds);
        for (std::size_t k = 0; k < spec.seeds; ++k) cell.runs[k].seed = sweep_run_seed(spec, k);
        try {
            configs[c] = spec.cell(c);
            configs[c]->network.validate();
            configs[c]->distribution.validate();
            const DistributionSpec& d = configs[c]->distribution;
            if (d.kind == DistributionKind::two_gaussian_adversarial) {
                cell.opt_lin = opt_lin_two_gaussian(d.margin, d.boundary, d.rcn_rate, d.cluster_offset);
                cell.bayes_risk = bayes_risk_two_gaussian(d.margin, d.boundary, d.rcn_rate, d.cluster_offset);
            } else {
                cell.opt_lin = opt_lin_absolute(d.boundary);
                cell.bayes_risk = 0.0;
            }
        } catch (const Error& e) {
            cell.error = e.what();
            for (SeedRun& r : cell.runs) r.error = e.what();
        }
    }

    if (options.out_dir) {
        std::error_code ec;
        std::filesystem::create_directories(*options.out_dir, ec);
        if (ec) throw IoError("cannot create " + options.out_dir->string() + ": " + ec.message());
    }
    std::ofstream log;
    if (options.out_dir) {
        log.open(*options.out_dir / "runs.jsonl");
        if (!log) throw IoError("cannot write " + (*options.out_dir / "runs.jsonl").string());
    }

    const std::size_t tasks = ncells * spec.seeds;
    std::size_t threads = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, std::max<std::size_t>(tasks, 1));
    std::atomic<std::size_t> next{0};
    std::mutex commit_mutex;
    std::exception_ptr fatal;

    // Single committer: every write to shared state or disk happens under
    // commit_mutex.
    auto commit = [&](std::size_t c, std::size_t k, SeedRun run, const TrainOutput* output) {
        std::lock_guard<std::mutex> lock(commit_mutex);
        if (output && options.out_dir) {
            const std::string stem = "cell" + std::to_string(c) + "_seed" + std::to_string(run.seed);
            ExperimentConfig run_config = *configs[c];
            run_config.train.seed = run.seed;
            const RunFiles files = write_run(*options.out_dir / "runs", stem, run_config, *output);
            nlohmann::json line = {{"cell", c},
                                   {"value", spec.values[c]},
                                   {"seed", run.seed},
                                   {"result", files.result.lexically_relative(*options.out_dir).generic_string()},
                                   {"test_error", run.test_error}};
            log << line.dump() << '\n';
            log.flush();
        } else if (!run.ok && options.out_dir) {
            nlohmann::json line = {{"cell", c}, {"value", spec.values[c]}, {"seed", run.seed}, {"error", run.error}};
            log << line.dump() << '\n';
            log.flush();
        }
        if (options.progress) {
            *options.progress << "cell " << c << " (" << spec.values[c].dump() << ") seed " << run.seed << ": "
                              << (run.ok ? "accuracy " + format_number(run.accuracy) : "FAILED " + run.error) << '\n';
        }
        result.cells[c].runs[k] = std::move(run);
    };

    auto worker = [&]() {
        for (;;) {
            const std::size_t task = next.fetch_add(1);
            if (task >= tasks) return;
            const std::size_t c = task / spec.seeds;
            const std::size_t k = task % spec.seeds;
            if (!configs[c]) continue;
            ExperimentConfig cfg = *configs[c];
            cfg.train.seed = sweep_run_seed(spec, k);
            SeedRun run;
            run.seed = cfg.train.seed;
            try {
                const TrainOutput out = train(cfg.distribution, cfg.network, cfg.train);
                run.ok = true;
                run.test_error = out.result.test_error;
                run.accuracy = 1.0 - out.result.test_error;
                run.best_iterate = out.result.best_iterate;
                run.min_lemma_slack = out.trace.pathwise_checks
                                          ? std::min({out.trace.min_key_identity_slack,
                                                      out.trace.min_correlation_growth_slack,
                                                      out.trace.min_norm_growth_slack})
                                          : std::numeric_limits<double>::quiet_NaN();
                commit(c, k, run, &out);
            } catch (const Error& e) {
                run.ok = false;
                run.error = e.what();
                try {
                    commit(c, k, run, nullptr);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(commit_mutex);
                    if (!fatal) fatal = std::current_exception();
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(commit_mutex);
                if (!fatal) fatal = std::current_exception();
            }
        }
    };

    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (fatal) std::rethrow_exception(fatal);

    for (CellSummary& cell : result.cells) {
        std::vector<double> acc;
        for (const SeedRun& r : cell.runs) {
            if (r.ok) acc.push_back(r.accuracy);
        }
        std::tie(cell.mean_accuracy, cell.sd_accuracy) = mean_sd(acc);
        if (cell.failed()) result.failed_cells.push_back(cell.index);
    }
    return result;
}

std::vector<AccuracyRow> accuracy_rows(const SweepResult& result) {
    std::vector<AccuracyRow> rows;
    for (const CellSummary& cell : result.cells) {
        if (cell.failed()) continue;
        rows.push_back({cell.opt_lin, cell.mean_accuracy, cell.sd_accuracy, 1.0 - cell.opt_lin, 1.0 - cell.bayes_risk});
    }
    return rows;
}

void write_sweep_table(const SweepResult& result, const std::filesystem::path& path, const std::string& comment) {
    CsvWriter csv(path,
                  {"cell", "variable", "value", "opt_lin", "bayes_risk", "seeds_ok", "seeds_failed", "mean_accuracy",
                   "sd_accuracy"},
                  comment);
    for (const CellSummary& cell : result.cells) {
        const std::string value = cell.value.is_string() ? cell.value.get<std::string>() : cell.value.dump();
        csv.field(cell.index)
            .field(to_string(result.variable))
            .field(value)
            .field(cell.opt_lin)
            .field(cell.bayes_risk)
            .field(cell.succeeded())
            .field(cell.runs.size() - cell.succeeded())
            .field(cell.mean_accuracy)
            .field(cell.sd_accuracy);
        csv.end_row();
    }
    csv.close();
}

nlohmann::json sweep_summary_json(const SweepSpec& spec, const SweepResult& result) {
    nlohmann::json cells = nlohmann::json::array();
    for (const CellSummary& cell : result.cells) {
        nlohmann::json runs = nlohmann::json::array();
        for (const SeedRun& r : cell.runs) {
            nlohmann::json j = {{"seed", r.seed}, {"ok", r.ok}};
            if (r.ok) {
                j["test_error"] = r.test_error;
                j["best_iterate"] = r.best_iterate;
            } else {
                j["error"] = r.error;
            }
            runs.push_back(j);
        }
        nlohmann::json c = {{"cell", cell.index},
                            {"value", cell.value},
                            {"opt_lin", cell.opt_lin},
                            {"bayes_risk", cell.bayes_risk},
                            {"runs", runs}};
        if (!cell.failed()) {
            c["mean_accuracy"] = cell.mean_accuracy;
            c["sd_accuracy"] = cell.sd_accuracy;
        }
        if (!cell.error.empty()) c["error"] = cell.error;
        cells.push_back(c);
    }
    return {{"format", "agn-sweep"},
            {"version", kResultVersion},
            {"artifact_version", artifact_version()},
            {"seed", spec.base.train.seed},
            {"config", to_json(spec)},
            {"cells", cells},
            {"failed_cells", result.failed_cells}};
}

}  // namespace agn
