#include <algorithm>
#include <cmath>
#include <limits>

#include "agn/error.hpp"
#include "agn/theory.hpp"

namespace agn {

namespace {

double loss_at(const NetworkParams& params, std::span<const double> x, int y, const LossSpec& loss) {
    return loss.value(static_cast<double>(y) * forward(params, x));
}

// Visits every trainable scalar of `params` together with the matching
// analytic partial in `grad`.
template <typename Fn>
void for_each_trainable(NetworkParams& params, const Gradient& grad, Fn&& fn) {
    auto hidden = params.hidden_weights.flat();
    for (std::size_t i = 0; i < hidden.size(); ++i) fn(hidden[i], grad.hidden.flat()[i]);
    if (params.hidden_biases) {
        for (std::size_t i = 0; i < params.hidden_biases->size(); ++i) fn((*params.hidden_biases)[i], grad.biases[i]);
    }
    if (params.outer_trainable) {
        for (std::size_t i = 0; i < params.outer_weights.size(); ++i) fn(params.outer_weights[i], grad.outer[i]);
    }
    for (std::size_t l = 0; l < params.depth_extension.size(); ++l) {
        auto layer = params.depth_extension[l].flat();
        for (std::size_t i = 0; i < layer.size(); ++i) fn(layer[i], grad.deep[l].flat()[i]);
    }
}

}  // namespace

double min_preactivation_magnitude(const NetworkParams& params, std::span<const double> x) {
    const Activation act = params.activation_fn();
    const std::size_t m = params.width();
    double smallest = std::numeric_limits<double>::infinity();
    std::vector<double> h(m), next(m);
    for (std::size_t j = 0; j < m; ++j) {
        double z = dot(params.hidden_weights.row(j), x);
        if (params.hidden_biases) z += (*params.hidden_biases)[j];
        smallest = std::min(smallest, std::abs(z));
        h[j] = act.value(z);
    }
    for (const Matrix& layer : params.depth_extension) {
        for (std::size_t j = 0; j < m; ++j) {
            const double z = dot(layer.row(j), h);
            smallest = std::min(smallest, std::abs(z));
            next[j] = act.value(z);
        }
        std::swap(h, next);
    }
    return smallest;
}

double gradient_check(const NetworkParams& params, std::span<const double> x, int y, const LossSpec& loss,
                      const GradientCheckOptions& options) {
    const Gradient grad = loss_gradient(params, x, y, loss);
    NetworkParams probe = params;
    double worst = 0.0;
    for_each_trainable(probe, grad, [&](double& p, double analytic) {
        const double saved = p;
        p = saved + options.step;
        const double up = loss_at(probe, x, y, loss);
        p = saved - options.step;
        const double down = loss_at(probe, x, y, loss);
        p = saved;
        const double numeric = (up - down) / (2.0 * options.step);
        const double scale = std::max({std::abs(analytic), std::abs(numeric), options.magnitude_floor});
        worst = std::max(worst, std::abs(analytic - numeric) / scale);
    });
    return worst;
}

}  // namespace agn
