#include "agn/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "agn/error.hpp"
#include "agn/rng.hpp"

namespace agn {

std::string_view to_string(ActivationKind kind) {
    switch (kind) {
        case ActivationKind::leaky_relu: return "leaky_relu";
        case ActivationKind::relu: return "relu";
        case ActivationKind::tanh: return "tanh";
        case ActivationKind::hard_tanh: return "hard_tanh";
    }
    return "unknown";
}

ActivationKind activation_from_string(std::string_view name) {
    if (name == "leaky_relu") return ActivationKind::leaky_relu;
    if (name == "relu") return ActivationKind::relu;
    if (name == "tanh") return ActivationKind::tanh;
    if (name == "hard_tanh") return ActivationKind::hard_tanh;
    throw InvalidArgument("unknown activation '" + std::string(name) + "'");
}

double Activation::value(double z) const {
    switch (kind) {
        case ActivationKind::leaky_relu: return z >= 0.0 ? z : slope * z;
        case ActivationKind::relu: return z >= 0.0 ? z : 0.0;
        case ActivationKind::tanh: return std::tanh(z);
        case ActivationKind::hard_tanh: return std::clamp(z, -1.0, 1.0);
    }
    return 0.0;
}

double Activation::derivative(double z) const {
    switch (kind) {
        case ActivationKind::leaky_relu: return z >= 0.0 ? 1.0 : slope;
        case ActivationKind::relu: return z >= 0.0 ? 1.0 : 0.0;
        case ActivationKind::tanh: {
            const double t = std::tanh(z);
            return 1.0 - t * t;
        }
        case ActivationKind::hard_tanh: return (z >= -1.0 && z < 1.0) ? 1.0 : 0.0;
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// Loss

std::string_view to_string(LossKind kind) {
    switch (kind) {
        case LossKind::cross_entropy: return "cross_entropy";
    }
    return "unknown";
}

LossSpec LossSpec::make(LossKind kind) {
    LossSpec spec{kind};
    spec.validate();
    return spec;
}

LossSpec LossSpec::from_string(std::string_view name) {
    if (name == "cross_entropy") return make(LossKind::cross_entropy);
    if (name == "squared" || name == "hinge" || name == "exponential") {
        throw InvalidArgument("loss '" + std::string(name) +
                              "' is unsupported: it is not a convex, decreasing, 1-Lipschitz "
                              "loss with -l'(z) <= 1/z for z >= 1");
    }
    throw InvalidArgument("unknown loss '" + std::string(name) + "'");
}

double LossSpec::value(double z) const {
    // log(1 + exp(-z)) without overflow.
    return z > 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
}

double LossSpec::neg_derivative(double z) const {
    if (z >= 0.0) {
        const double e = std::exp(-z);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(z));
}

double LossSpec::derivative(double z) const { return -neg_derivative(z); }

void LossSpec::validate() const {
    constexpr double h = 1e-2;
    for (double z = -20.0; z <= 20.0; z += h) {
        if (!(value(z + h) < value(z))) throw InvalidArgument("loss is not decreasing");
        if (value(z - h) + value(z + h) - 2.0 * value(z) < -1e-12) {
            throw InvalidArgument("loss is not convex");
        }
        if (std::abs(derivative(z)) > 1.0) throw InvalidArgument("loss is not 1-Lipschitz");
    }
    if (!(neg_derivative(0.0) > 0.0)) throw InvalidArgument("loss has -l'(0) <= 0");
    for (double z = 1.0; z <= 100.0; z += 0.25) {
        if (neg_derivative(z) > 1.0 / z) throw InvalidArgument("loss violates -l'(z) <= 1/z");
    }
}

// ---------------------------------------------------------------------------
// Parameters

void check_label(int y) {
    if (y != 1 && y != -1) throw InvalidArgument("label must be -1 or +1");
}

bool NetworkParams::is_baseline_shape() const {
    return !has_biases() && !outer_trainable && !is_deep() &&
           activation_fn().positively_homogeneous();
}

void NetworkParams::validate() const {
    const std::size_t m = width();
    if (m == 0 || input_dim() == 0) throw DimensionError("network needs m >= 1 and d >= 1");
    if (!(leaky_slope > 0.0 && leaky_slope <= 1.0)) {
        throw InvalidArgument("leaky slope must lie in (0,1], got " + std::to_string(leaky_slope));
    }
    if (outer_weights.size() != m) throw DimensionError("outer weights must have length m");
    if (hidden_biases && hidden_biases->size() != m) {
        throw DimensionError("hidden biases must have length m");
    }
    for (const Matrix& layer : depth_extension) {
        if (layer.rows() != m || layer.cols() != m) {
            throw DimensionError("depth extension layers must be m x m");
        }
    }
    auto all_finite = [](std::span<const double> v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    bool finite = all_finite(hidden_weights.flat()) && all_finite(outer_weights);
    if (hidden_biases) finite = finite && all_finite(*hidden_biases);
    for (const Matrix& layer : depth_extension) finite = finite && all_finite(layer.flat());
    if (!finite) throw NonFiniteError("network parameters contain non-finite entries");
    if (!outer_trainable) {
        const double a = std::abs(outer_weights.front());
        for (double w : outer_weights) {
            if (std::abs(std::abs(w) - a) > 1e-12 * std::max(1.0, a)) {
                throw InvalidArgument("fixed outer weights must share one magnitude");
            }
        }
        if (a == 0.0) throw InvalidArgument("fixed outer weights must be nonzero");
    }
}

double NetworkConfig::resolved_outer_magnitude() const {
    return outer_magnitude.value_or(1.0 / std::sqrt(static_cast<double>(width)));
}

double NetworkConfig::resolved_init_variance() const {
    return init_variance.value_or(1.0 / static_cast<double>(width));
}

void NetworkConfig::validate() const {
    if (width == 0 || input_dim == 0) throw InvalidArgument("network width and dimension must be >= 1");
    if (!(leaky_slope > 0.0 && leaky_slope <= 1.0)) {
        throw InvalidArgument("leaky slope must lie in (0,1], got " + std::to_string(leaky_slope));
    }
    if (hidden_layers != 1 && hidden_layers != 3) {
        throw InvalidArgument("hidden_layers must be 1 or 3");
    }
    if (!(resolved_outer_magnitude() > 0.0)) throw InvalidArgument("outer magnitude must be > 0");
    if (!(resolved_init_variance() >= 0.0)) throw InvalidArgument("init variance must be >= 0");
}

std::vector<double> balanced_outer_weights(std::size_t m, double magnitude, Rng* rng) {
    std::vector<double> a(m, -magnitude);
    const std::size_t positives = (m + 1) / 2;
    for (std::size_t j = 0; j < positives; ++j) a[j] = magnitude;
    if (rng != nullptr) {
        const auto perm = random_permutation(m, *rng);
        std::vector<double> shuffled(m);
        for (std::size_t j = 0; j < m; ++j) shuffled[j] = a[perm[j]];
        a = std::move(shuffled);
    }
    return a;
}

NetworkParams initialize_network(const NetworkConfig& config, Rng& rng) {
    config.validate();
    const std::size_t m = config.width;
    const double sd = std::sqrt(config.resolved_init_variance());

    NetworkParams params;
    params.leaky_slope = config.leaky_slope;
    params.activation = config.activation;
    params.hidden_weights = Matrix(m, config.input_dim);
    for (double& w : params.hidden_weights.flat()) w = sd * rng.normal();
    if (config.biases) {
        params.hidden_biases = std::vector<double>(m);
        for (double& b : *params.hidden_biases) b = sd * rng.normal();
    }
    for (std::size_t l = 1; l < config.hidden_layers; ++l) {
        Matrix layer(m, m);
        for (double& w : layer.flat()) w = sd * rng.normal();
        params.depth_extension.push_back(std::move(layer));
    }
    // Outer signs come from their own stream so changing the
    // permutation flag does not perturb the hidden-weight draw.
    Rng outer_rng(derive_seed(rng.seed(), stream::outer));
    params.outer_weights = balanced_outer_weights(m, config.resolved_outer_magnitude(),
                                                  config.permute_outer ? &outer_rng : nullptr);
    params.outer_trainable = config.outer_trainable || config.hidden_layers > 1;
    params.validate();
    return params;
}

NetworkParams zero_network(std::size_t m, std::size_t d, double leaky_slope) {
    NetworkParams params;
    params.leaky_slope = leaky_slope;
    params.hidden_weights = Matrix(m, d);
    params.outer_weights = balanced_outer_weights(m, 1.0 / std::sqrt(static_cast<double>(m)), nullptr);
    params.validate();
    return params;
}

double Gradient::squared_norm() const {
    double s = frobenius_norm_sq(hidden) + dot(biases, biases) + dot(outer, outer);
    for (const Matrix& layer : deep) s += frobenius_norm_sq(layer);
    return s;
}

// ---------------------------------------------------------------------------
// Forward / backward

namespace {

void check_input(const NetworkParams& params, std::span<const double> x) {
    if (x.size() != params.input_dim()) {
        throw DimensionError("input has dimension " + std::to_string(x.size()) +
                             ", network expects " + std::to_string(params.input_dim()));
    }
}

// Pre-activations and activations of every hidden layer.
struct Tape {
    std::vector<std::vector<double>> pre;
    std::vector<std::vector<double>> post;
};

Tape run_forward(const NetworkParams& params, std::span<const double> x) {
    const Activation act = params.activation_fn();
    const std::size_t m = params.width();
    Tape tape;
    tape.pre.reserve(1 + params.depth_extension.size());
    tape.post.reserve(1 + params.depth_extension.size());

    std::vector<double> z(m);
    for (std::size_t j = 0; j < m; ++j) {
        z[j] = dot(params.hidden_weights.row(j), x);
        if (params.hidden_biases) z[j] += (*params.hidden_biases)[j];
    }
    std::vector<double> h(m);
    for (std::size_t j = 0; j < m; ++j) h[j] = act.value(z[j]);
    tape.pre.push_back(std::move(z));
    tape.post.push_back(std::move(h));

    for (const Matrix& layer : params.depth_extension) {
        const std::vector<double>& prev = tape.post.back();
        std::vector<double> zl(m), hl(m);
        for (std::size_t j = 0; j < m; ++j) {
            zl[j] = dot(layer.row(j), prev);
            hl[j] = act.value(zl[j]);
        }
        tape.pre.push_back(std::move(zl));
        tape.post.push_back(std::move(hl));
    }
    return tape;
}

}  // namespace

double forward(const NetworkParams& params, std::span<const double> x) {
    check_input(params, x);
    if (params.is_deep()) {
        const Tape tape = run_forward(params, x);
        return dot(params.outer_weights, tape.post.back());
    }
    const Activation act = params.activation_fn();
    const std::size_t m = params.width();
    double f = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        double z = dot(params.hidden_weights.row(j), x);
        if (params.hidden_biases) z += (*params.hidden_biases)[j];
        f += params.outer_weights[j] * act.value(z);
    }
    return f;
}

SurrogateLosses surrogate_losses(const NetworkParams& params, std::span<const double> x, int y,
                                 const LossSpec& loss) {
    check_label(y);
    const double margin = static_cast<double>(y) * forward(params, x);
    return {loss.value(margin), loss.neg_derivative(margin)};
}

Gradient network_gradient(const NetworkParams& params, std::span<const double> x) {
    check_input(params, x);
    const Activation act = params.activation_fn();
    const std::size_t m = params.width();
    const std::size_t d = params.input_dim();
    const Tape tape = run_forward(params, x);
    const std::size_t layers = tape.pre.size();

    Gradient grad;
    if (params.outer_trainable) grad.outer = tape.post.back();

    // delta = df/dz for the current layer, walking backwards.
    std::vector<double> delta(m);
    for (std::size_t j = 0; j < m; ++j) {
        delta[j] = params.outer_weights[j] * act.derivative(tape.pre.back()[j]);
    }
    grad.deep.resize(layers - 1);
    for (std::size_t l = layers - 1; l >= 1; --l) {
        const Matrix& weights = params.depth_extension[l - 1];
        const std::vector<double>& input = tape.post[l - 1];
        Matrix g(m, m);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t k = 0; k < m; ++k) g(i, k) = delta[i] * input[k];
        }
        grad.deep[l - 1] = std::move(g);
        std::vector<double> next(m, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t k = 0; k < m; ++k) next[k] += weights(i, k) * delta[i];
        }
        for (std::size_t k = 0; k < m; ++k) next[k] *= act.derivative(tape.pre[l - 1][k]);
        delta = std::move(next);
    }

    grad.hidden = Matrix(m, d);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t k = 0; k < d; ++k) grad.hidden(j, k) = delta[j] * x[k];
    }
    if (params.hidden_biases) grad.biases = delta;
    return grad;
}

Gradient loss_gradient(const NetworkParams& params, std::span<const double> x, int y,
                       const LossSpec& loss) {
    check_label(y);
    Gradient grad = network_gradient(params, x);
    const double f = dot(params.outer_weights, run_forward(params, x).post.back());
    const double scale = loss.derivative(static_cast<double>(y) * f) * static_cast<double>(y);
    for (double& g : grad.hidden.flat()) g *= scale;
    for (double& g : grad.biases) g *= scale;
    for (double& g : grad.outer) g *= scale;
    for (Matrix& layer : grad.deep) {
        for (double& g : layer.flat()) g *= scale;
    }
    return grad;
}

double network_gradient_correlation(const NetworkParams& params, std::span<const double> x, int y,
                                    const Matrix& V) {
    check_label(y);
    check_input(params, x);
    if (V.rows() != params.width() || V.cols() != params.input_dim()) {
        throw DimensionError("comparator must be m x d");
    }
    if (std::abs(std::sqrt(frobenius_norm_sq(V)) - 1.0) > 1e-10) {
        throw InvalidArgument("comparator must have unit Frobenius norm");
    }
    if (params.is_deep()) {
        const Gradient grad = network_gradient(params, x);
        return static_cast<double>(y) * frobenius_dot(grad.hidden, V);
    }
    // Single hidden layer: sum_j a_j sigma'(z_j) <v_j, x>, no allocation.
    const Activation act = params.activation_fn();
    double s = 0.0;
    for (std::size_t j = 0; j < params.width(); ++j) {
        double z = dot(params.hidden_weights.row(j), x);
        if (params.hidden_biases) z += (*params.hidden_biases)[j];
        s += params.outer_weights[j] * act.derivative(z) * dot(V.row(j), x);
    }
    return static_cast<double>(y) * s;
}

}  // namespace agn
