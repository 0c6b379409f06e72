#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "agn/harness/config.hpp"
#include "agn/harness/plot.hpp"

namespace agn {

struct SeedRun {
    std::uint64_t seed = 0;
    bool ok = false;
    double test_error = 0.0;
    double accuracy = 0.0;
    std::size_t best_iterate = 0;
    double min_lemma_slack = 0.0;  // min over the pathwise slacks, NaN if unchecked
    std::string error;             // failure message when !ok
};

struct CellSummary {
    std::size_t index = 0;
    nlohmann::json value;
    double opt_lin = 0.0;
    double bayes_risk = 0.0;
    std::vector<SeedRun> runs;  // in seed order
    double mean_accuracy = 0.0;
    double sd_accuracy = 0.0;   // sample standard deviation; 0 for one run
    std::string error;          // set when the cell could not be built at all

    std::size_t succeeded() const;
    bool failed() const;  // no successful run
};

struct SweepResult {
    SweepVariable variable = SweepVariable::opt_lin;
    std::vector<CellSummary> cells;
    std::vector<std::size_t> failed_cells;
};

struct SweepOptions {
    // Per-run files and the run log go here when set.
    std::optional<std::filesystem::path> out_dir;
    std::ostream* progress = nullptr;
};

/// Seed of run k in every cell: base seed + k, so cells share random
/// streams and a one-cell, one-seed sweep equals a single train run.
std::uint64_t sweep_run_seed(const SweepSpec& spec, std::size_t k);

/// Runs every (cell, seed) pair in a thread pool. Failures are recorded per
/// run and the sweep continues.
SweepResult run_sweep(const SweepSpec& spec, const SweepOptions& options = {});

/// Mean and sample standard deviation.
std::pair<double, double> mean_sd(const std::vector<double>& values);

std::vector<AccuracyRow> accuracy_rows(const SweepResult& result);
void write_sweep_table(const SweepResult& result, const std::filesystem::path& path, const std::string& comment);
nlohmann::json sweep_summary_json(const SweepSpec& spec, const SweepResult& result);

}  // namespace agn
