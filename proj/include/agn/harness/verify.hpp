#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "agn/theory.hpp"
#include "agn/trainer.hpp"

namespace agn {

// Suite names accepted by run_verify.
inline const std::vector<std::string> kVerifySuites = {"key_identity", "general_leaky", "general_tanh", "implication",
                                                       "pathwise",     "gradient",      "oracle"};

struct VerifyOptions {
    std::vector<std::string> suites = kVerifySuites;
    std::optional<std::size_t> tuples;  // overrides every suite's default count
    std::uint64_t seed = 1;
    double leaky_slope = 0.1;           // slope of the pathwise training run
    std::size_t threads = 0;
    std::size_t oracle_samples = 1000000;
};

struct PathwiseReport {
    SuiteReport suite;  // min_slack over all per-step inequalities and checkpoints
    std::size_t steps_checked = 0;
    std::size_t checkpoints = 0;
    double min_key_identity_slack = 0.0;
    double min_correlation_growth_slack = 0.0;
    double min_norm_growth_slack = 0.0;
    double min_cauchy_schwarz_slack = 0.0;
};

/// Baseline training run on the default two-Gaussian distribution with every
/// per-step growth inequality checked.
PathwiseReport run_pathwise_suite(std::uint64_t seed, double leaky_slope = 0.1, std::size_t width = 200,
                                  std::size_t iterations = 20000);

nlohmann::json to_json(const SuiteReport& report);

struct VerifyResult {
    nlohmann::json report;
    bool passed = false;
};

/// Runs the selected suites. Throws InvalidArgument on an unknown suite name,
/// a zero tuple count or an invalid leaky slope, before running anything.
VerifyResult run_verify(const VerifyOptions& options);

}  // namespace agn
