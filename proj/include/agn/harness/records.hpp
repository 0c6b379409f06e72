#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "agn/harness/config.hpp"
#include "agn/trainer.hpp"

namespace agn {

inline constexpr int kResultVersion = 1;

/// Build identifier (short git hash, or "unknown").
std::string artifact_version();

/// "agn version=<hash> seed=<seed>", the header comment of every output file.
std::string header_comment(std::uint64_t seed);

/// Result record. Wall time and the creation timestamp live under "timing"
/// so the rest of the document is a deterministic function of the config.
nlohmann::json result_to_json(const ExperimentConfig& config, const TrainOutput& output);

/// Removes the "timing" member; used for determinism comparisons.
nlohmann::json without_timing(nlohmann::json record);

/// Checks the schema of a result record, throwing ParseError naming the
/// first offending field.
void validate_result_json(const nlohmann::json& record);

struct RunFiles {
    std::filesystem::path result;
    std::filesystem::path trace;
    std::filesystem::path validation;
    std::filesystem::path checkpoint;
};

/// Writes <stem>.json, <stem>_trace.csv, <stem>_validation.csv and the best
/// snapshot <stem>_best.agnw under `dir` (created if missing).
RunFiles write_run(const std::filesystem::path& dir, const std::string& stem, const ExperimentConfig& config,
                   const TrainOutput& output);

void write_json_file(const nlohmann::json& j, const std::filesystem::path& path);

}  // namespace agn
