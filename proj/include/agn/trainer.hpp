#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "agn/distributions.hpp"
#include "agn/error.hpp"
#include "agn/network.hpp"

namespace agn {

enum class BatchKind { online, minibatch };

struct BatchMode {
    BatchKind kind = BatchKind::online;
    std::size_t batch_size = 1;
    std::size_t epochs = 1;
};

struct TrainConfig {
    double step_size = 0.01;
    // Online: number of SGD steps (one fresh sample each). Minibatch: size
    // of the fixed training set.
    std::size_t iterations = 20000;
    BatchMode batch_mode;
    std::size_t validation_size = 10000;
    std::size_t validation_cadence = 100;
    std::size_t test_size = 100000;
    LossSpec loss;
    std::uint64_t seed = 1;
    std::vector<double> diag_gamma_grid = {0.05, 0.1, 0.25, 0.5, 1.0};
    // Enforce eta <= B_X^{-2} with B_X^2 = E||x||^2 estimated from samples.
    bool theorem_mode = false;
    // Hidden-weight initialization override; when set it replaces the
    // random draw from NetworkConfig
    std::optional<NetworkParams> initial_params;

    void validate() const;
};

/// One diagnostic row, recorded at the validation cadence.
struct TraceRow {
    std::size_t t = 0;
    double h = 0.0;                 // <W_t, V>
    double g = 0.0;                 // ||W_t||_F
    double window_surrogate = 0.0;  // mean -l'(y f) over the last window
    std::vector<double> xi;         // xi_hat at the sample consumed at step t-1
    std::vector<double> xi_window;  // window mean of xi_hat per gamma
    // Minimum slacks over the steps since the previous row.
    double key_identity_slack = std::numeric_limits<double>::quiet_NaN();
    double correlation_growth_slack = std::numeric_limits<double>::quiet_NaN();
    double norm_growth_slack = std::numeric_limits<double>::quiet_NaN();
    double cauchy_schwarz_slack = 0.0;  // G - |H|
};

struct TheoryTrace {
    std::vector<double> gamma_grid;
    std::vector<TraceRow> rows;
    // Per-step checks run only for bias-free, fixed-outer, single-layer
    // homogeneous networks under online SGD.
    bool pathwise_checks = false;
    std::size_t steps_checked = 0;
    double min_key_identity_slack = std::numeric_limits<double>::infinity();
    double min_correlation_growth_slack = std::numeric_limits<double>::infinity();
    double min_norm_growth_slack = std::numeric_limits<double>::infinity();
    double min_cauchy_schwarz_slack = std::numeric_limits<double>::infinity();
    // Sums over all steps, for trajectory-level growth checks:
    // sum_t eta * a*sqrt(m) * gamma * (alpha E_t - xi_t) per gamma.
    std::vector<double> accumulated_growth_floor;
};

struct ValidationPoint {
    std::size_t t = 0;
    double error = 0.0;
};

struct ExperimentResult {
    std::size_t best_iterate = 0;
    double test_error = 0.0;
    double surrogate_risk_at_best = 0.0;  // test-set mean of -l'(y f)
    double markov_bound = 0.0;
    double opt_lin = 0.0;
    double bayes_risk = 0.0;
    std::uint64_t seed = 0;
    double wall_time = 0.0;
    std::size_t steps = 0;
};

struct TrainOutput {
    ExperimentResult result;
    TheoryTrace trace;
    std::vector<ValidationPoint> validation_curve;
    NetworkParams best_params;
    NetworkParams final_params;
};

/// Thrown when an update produces a non-finite parameter. Carries the
/// snapshot from before the failing step.
class TrainingDiverged : public NonFiniteError {
public:
    TrainingDiverged(const std::string& what, NetworkParams snapshot, std::size_t step)
        : NonFiniteError(what), snapshot_(std::move(snapshot)), step_(step) {}
    const NetworkParams& snapshot() const { return snapshot_; }
    std::size_t step() const { return step_; }

private:
    NetworkParams snapshot_;
    std::size_t step_;
};

/// W <- W - eta * grad l(y f_x(W)) on every trainable block, in place.
/// Returns -l'(y f) at the pre-update weights.
double apply_sgd_step(NetworkParams& params, std::span<const double> x, int y, double step_size,
                      const LossSpec& loss);

/// Value-returning form of apply_sgd_step.
NetworkParams sgd_step(const NetworkParams& params, std::span<const double> x, int y, double step_size,
                       const LossSpec& loss);

/// Index of the smallest validation error; ties go to the earliest index.
std::size_t select_best_iterate(std::span<const double> validation_curve);

/// Fraction of samples with y * f(x) <= 0 (f = 0 counts as an error).
double classification_error(const NetworkParams& params, const Dataset& data);

/// Mean of -l'(y f(x)) over the data.
double surrogate_risk(const NetworkParams& params, const Dataset& data, const LossSpec& loss);

TrainOutput train(const DistributionSpec& spec, const NetworkConfig& net, const TrainConfig& config);

// CSV writers with stable column order. `header_comment` goes on a leading
// "# ..." line.
void write_trace_csv(const TheoryTrace& trace, const std::filesystem::path& path, std::string_view header_comment);
void write_validation_csv(std::span<const ValidationPoint> curve, const std::filesystem::path& path,
                          std::string_view header_comment);

}  // namespace agn
