#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "agn/distributions.hpp"
#include "agn/network.hpp"
#include "agn/trainer.hpp"

namespace agn {

inline constexpr int kConfigVersion = 1;

/// One experiment: distribution, network shape and training protocol.
struct ExperimentConfig {
    DistributionSpec distribution;
    // When set, the two-Gaussian boundary (or the absolute-boundary slope)
    // is solved from this OPT_lin target instead of read from the file.
    std::optional<double> target_opt_lin;
    NetworkConfig network;
    TrainConfig train;

    // Resolves target_opt_lin into distribution.boundary and syncs the
    // network input dimension. Throws InfeasibleSpec if the target is
    // unreachable.
    void resolve();
};

enum class SweepVariable { opt_lin, learning_rate, init_variance, width, activation, batch_mode, architecture };
enum class Architecture { baseline, bias_trainable, deep3 };

std::string to_string(SweepVariable v);
SweepVariable sweep_variable_from_string(const std::string& name);
std::string to_string(Architecture a);
Architecture architecture_from_string(const std::string& name);

struct SweepSpec {
    ExperimentConfig base;
    SweepVariable variable = SweepVariable::opt_lin;
    std::vector<nlohmann::json> values;
    std::size_t seeds = 3;
    std::size_t threads = 0;  // 0 = hardware concurrency
    bool paper_scale = false;

    void validate() const;
    // Resolved config of one grid cell, at full scale if requested.
    ExperimentConfig cell(std::size_t index) const;
};

/// Copy of `base` with the swept variable set to `value`.
ExperimentConfig apply_sweep_value(const ExperimentConfig& base, SweepVariable variable, const nlohmann::json& value);

void apply_architecture(ExperimentConfig& config, Architecture arch);

/// Full scale: m = 1000, and T = 100000 for the bias + trainable-outer
/// architecture. For sweeps this also sets 10 seeds per cell.
void apply_paper_scale(ExperimentConfig& config);
void apply_paper_scale(SweepSpec& sweep);

// Strict parsing: unknown keys and wrong types raise ParseError.
ExperimentConfig experiment_from_json(const nlohmann::json& j);
SweepSpec sweep_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& config);
nlohmann::json to_json(const SweepSpec& sweep);

/// Reads a JSON file; IoError if unreadable, ParseError on malformed JSON.
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace agn
