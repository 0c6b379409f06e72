#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "agn/matrix.hpp"

namespace agn {

class Rng;

enum class ActivationKind { leaky_relu, relu, tanh, hard_tanh };

std::string_view to_string(ActivationKind kind);
ActivationKind activation_from_string(std::string_view name);

/// Pointwise nondecreasing activation. `slope` is only read by leaky_relu.
///
/// Derivatives at kinks use the right derivative, so the leaky ReLU has
/// sigma'(0) = 1.
struct Activation {
    ActivationKind kind = ActivationKind::leaky_relu;
    double slope = 0.1;

    double value(double z) const;
    double derivative(double z) const;

    // sigma(z) = sigma'(z) * z for every z.
    bool positively_homogeneous() const {
        return kind == ActivationKind::leaky_relu || kind == ActivationKind::relu;
    }
};

enum class LossKind { cross_entropy };

/// A convex, decreasing, 1-Lipschitz margin loss with -l'(0) > 0 and
/// -l'(z) <= 1/z for z >= 1. Construction through make() checks those
/// conditions on a grid and throws InvalidArgument if any fails.
struct LossSpec {
    LossKind kind = LossKind::cross_entropy;

    static LossSpec make(LossKind kind);
    // Accepts "cross_entropy"; known losses outside the supported class
    // (e.g. "squared") are rejected with an explanatory message.
    static LossSpec from_string(std::string_view name);

    double value(double z) const;
    double derivative(double z) const;
    // -l'(z), the surrogate used for the Markov bound.
    double neg_derivative(double z) const;

    void validate() const;
};

std::string_view to_string(LossKind kind);

/// Weights of a one-hidden-layer network f_x(W) = sum_j a_j sigma(<w_j,x> + b_j),
/// optionally extended with square hidden layers (deep variant):
///   h1 = sigma(W x + b), h_{l+1} = sigma(W_l h_l), f = <a, h_L>.
struct NetworkParams {
    Matrix hidden_weights;               // m x d
    std::vector<double> outer_weights;   // length m
    double leaky_slope = 0.1;
    ActivationKind activation = ActivationKind::leaky_relu;
    std::optional<std::vector<double>> hidden_biases;
    bool outer_trainable = false;
    std::vector<Matrix> depth_extension;  // each m x m

    std::size_t width() const { return hidden_weights.rows(); }
    std::size_t input_dim() const { return hidden_weights.cols(); }
    Activation activation_fn() const { return {activation, leaky_slope}; }
    bool has_biases() const { return hidden_biases.has_value(); }
    bool is_deep() const { return !depth_extension.empty(); }

    // Bias-free, fixed outer layer, single hidden layer with a homogeneous
    // activation: the configuration the per-step growth inequalities need.
    bool is_baseline_shape() const;

    // Throws InvalidArgument/DimensionError on a broken invariant.
    void validate() const;

    bool operator==(const NetworkParams&) const = default;
};

/// Network shape plus initialization scheme.
struct NetworkConfig {
    std::size_t width = 200;
    std::size_t input_dim = 2;
    double leaky_slope = 0.1;
    ActivationKind activation = ActivationKind::leaky_relu;
    std::optional<double> outer_magnitude;  // default 1/sqrt(m)
    bool biases = false;
    bool outer_trainable = false;
    std::size_t hidden_layers = 1;          // 1 or 3
    std::optional<double> init_variance;    // default 1/m
    bool permute_outer = false;

    double resolved_outer_magnitude() const;
    double resolved_init_variance() const;
    void validate() const;
};

/// Balanced outer layer: the first ceil(m/2) entries are +a, the rest -a,
/// optionally shuffled by `rng`.
std::vector<double> balanced_outer_weights(std::size_t m, double magnitude, Rng* rng);

NetworkParams initialize_network(const NetworkConfig& config, Rng& rng);

NetworkParams zero_network(std::size_t m, std::size_t d, double leaky_slope);

/// Gradient with respect to every trainable block. Blocks that are not
/// trainable are left empty.
struct Gradient {
    Matrix hidden;
    std::vector<double> biases;
    std::vector<double> outer;
    std::vector<Matrix> deep;

    double squared_norm() const;
};

double forward(const NetworkParams& params, std::span<const double> x);

struct SurrogateLosses {
    double loss;       // l(y f)
    double surrogate;  // -l'(y f)
};

SurrogateLosses surrogate_losses(const NetworkParams& params, std::span<const double> x, int y,
                                 const LossSpec& loss);

/// Gradient of f_x with respect to all trainable blocks.
Gradient network_gradient(const NetworkParams& params, std::span<const double> x);

/// Gradient of l(y f_x) with respect to all trainable blocks.
Gradient loss_gradient(const NetworkParams& params, std::span<const double> x, int y,
                       const LossSpec& loss);

/// y <grad_W f_x(W), V> over the first-layer weights only. V must have unit
/// Frobenius norm (tolerance 1e-10).
double network_gradient_correlation(const NetworkParams& params, std::span<const double> x, int y,
                                    const Matrix& V);

void check_label(int y);

}  // namespace agn
