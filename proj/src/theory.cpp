#include "agn/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "agn/error.hpp"

namespace agn {

Comparator make_comparator(std::span<const double> outer_weights, std::span<const double> v_star) {
    if (outer_weights.empty()) throw DimensionError("comparator needs m >= 1");
    const double norm = std::sqrt(dot(v_star, v_star));
    if (std::abs(norm - 1.0) > 1e-12) throw InvalidArgument("v* must be a unit vector");
    const std::size_t m = outer_weights.size();
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    Comparator c;
    c.v_star.assign(v_star.begin(), v_star.end());
    c.V = Matrix(m, v_star.size());
    for (std::size_t j = 0; j < m; ++j) {
        const double s = outer_weights[j] > 0.0 ? scale : -scale;
        for (std::size_t k = 0; k < v_star.size(); ++k) c.V(j, k) = s * v_star[k];
    }
    return c;
}

double xi_hat(std::span<const double> v_star, std::span<const double> x, int y, double gamma) {
    if (!(gamma > 0.0)) throw InvalidArgument("xi_hat: gamma must be > 0");
    const double proj = dot(v_star, x);
    const double margin = static_cast<double>(y) * proj;
    if (margin < 0.0) return 1.0 + std::abs(proj) / gamma;
    if (margin < gamma) return 1.0;
    return 0.0;
}

double outer_magnitude(const NetworkParams& params) {
    const double a = std::abs(params.outer_weights.front());
    for (double w : params.outer_weights) {
        if (std::abs(std::abs(w) - a) > 1e-12 * std::max(1.0, a)) {
            throw InvalidArgument("identity checks need outer weights of one common magnitude");
        }
    }
    return a;
}

namespace {

void require_single_layer(const NetworkParams& params) {
    if (params.is_deep()) throw InvalidArgument("identity checks need a single hidden layer");
}

double preactivation(const NetworkParams& params, std::span<const double> x, std::size_t j) {
    double z = dot(params.hidden_weights.row(j), x);
    if (params.hidden_biases) z += (*params.hidden_biases)[j];
    return z;
}

}  // namespace

double verify_key_identity(const NetworkParams& params, std::span<const double> x, int y,
                           const Comparator& comparator, double gamma) {
    if (params.activation != ActivationKind::leaky_relu || params.has_biases() || params.is_deep()) {
        throw InvalidArgument("key identity needs a bias-free single-layer leaky-ReLU network");
    }
    const double a = outer_magnitude(params);
    const double m = static_cast<double>(params.width());
    const double lhs = network_gradient_correlation(params, x, y, comparator.V);
    const double rhs = a * gamma * std::sqrt(m) * (params.leaky_slope - xi_hat(comparator.v_star, x, y, gamma));
    return lhs - rhs;
}

GeneralIdentityCheck verify_general_key_identity(const NetworkParams& params, std::span<const double> x,
                                                 int y, const Comparator& comparator, double gamma,
                                                 const Activation& activation) {
    check_label(y);
    require_single_layer(params);
    const double a = outer_magnitude(params);
    const std::size_t m = params.width();
    GeneralIdentityCheck out;
    double lhs = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double ds = activation.derivative(preactivation(params, x, j));
        out.derivative_sum += ds;
        lhs += params.outer_weights[j] * ds * dot(comparator.V.row(j), x);
    }
    out.lhs = static_cast<double>(y) * lhs;
    const double xi = xi_hat(comparator.v_star, x, y, gamma);
    out.rhs = a * gamma / std::sqrt(static_cast<double>(m)) * (1.0 - xi) * out.derivative_sum;
    out.slack = out.lhs - out.rhs;
    return out;
}

double factored_general_rhs(const NetworkParams& params, std::span<const double> x, int y,
                            const Comparator& comparator, double gamma, const Activation& activation) {
    check_label(y);
    require_single_layer(params);
    const double a = outer_magnitude(params);
    const std::size_t m = params.width();
    double derivative_sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) derivative_sum += activation.derivative(preactivation(params, x, j));
    const double proj = dot(comparator.v_star, x);
    const double margin = static_cast<double>(y) * proj;
    const double band = (margin >= 0.0 && margin < gamma) ? 1.0 : 0.0;
    const double wrong = margin < 0.0 ? (1.0 + 1.0 / gamma) * std::abs(proj) : 0.0;
    return a * gamma / std::sqrt(static_cast<double>(m)) * (1.0 - band - wrong) * derivative_sum;
}

// ---------------------------------------------------------------------------
// Bounds

double SoftMarginCurve::operator()(double gamma) const {
    if (points.empty()) throw InvalidArgument("soft margin curve is empty");
    auto it = std::lower_bound(points.begin(), points.end(), gamma,
                               [](const auto& p, double g) { return p.first < g; });
    if (it == points.end()) return 1.0;
    return it->second;
}

double markov_error_bound(double surrogate_risk, const LossSpec& loss) {
    if (!(surrogate_risk >= 0.0)) throw InvalidArgument("surrogate risk must be >= 0");
    return surrogate_risk / loss.neg_derivative(0.0);
}

namespace {

double general_err(double prefactor, double opt, double c, double gamma, double phi) {
    const double log_term = opt > 0.0 ? (c / gamma) * opt * std::log(1.0 / opt) : 0.0;
    return prefactor * ((1.0 + c / gamma) * opt + log_term + phi);
}

double golden_section_min(const std::function<double(double)>& f, double lo, double hi) {
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - ratio * (b - a), d = a + ratio * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 200 && (b - a) > 1e-10; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    return fc < fd ? c : d;
}

}  // namespace

BoundReport theorem_bound(const BoundInputs& in) {
    const double opt = in.profile.opt_lin;
    if (!(opt >= 0.0 && opt < 0.5)) throw InvalidArgument("theorem_bound: OPT_lin must lie in [0, 1/2)");
    if (!(in.alpha > 0.0 && in.alpha <= 1.0)) throw InvalidArgument("theorem_bound: alpha must lie in (0,1]");
    if (!(in.step_size > 0.0)) throw InvalidArgument("theorem_bound: step size must be > 0");
    if (in.gamma && !(*in.gamma > 0.0)) throw InvalidArgument("theorem_bound: gamma must be > 0");
    const double c = in.profile.subexp_norm;
    if (!(c > 0.0)) throw InvalidArgument("theorem_bound: sub-exponential norm must be > 0");

    BoundReport r;
    const double prefactor = 2.0 / in.loss.neg_derivative(0.0) / in.alpha;
    r.components.prefactor = prefactor;

    const auto& margin = in.profile.hard_margin;
    const auto& u = in.profile.anticoncentration;

    auto phi_at = [&](double g) -> double {
        if (margin && g <= *margin) return 0.0;
        if (u) return 2.0 * *u * g;
        if (in.soft_margin) return (*in.soft_margin)(g);
        throw InvalidArgument("theorem_bound: no soft-margin function available at gamma = " + std::to_string(g));
    };

    if (opt == 0.0) {
        r.regime = BoundRegime::noiseless;
        r.noiseless = true;
        r.gamma = in.gamma.value_or(margin ? *margin : 1.0);
        r.components.phi = phi_at(r.gamma);
        r.err_bound = prefactor * r.components.phi;
        r.note = "noiseless regime: OPT_lin = 0, log(1/OPT_lin) undefined; OPT terms dropped";
    } else if (margin && (!in.gamma || *in.gamma == *margin)) {
        r.regime = BoundRegime::hard_margin;
        r.gamma = *margin;
        r.components.phi = 0.0;
        r.components.opt_term = (1.0 + c / r.gamma) * opt;
        r.components.log_term = (c / r.gamma) * opt * std::log(1.0 / opt);
        r.err_bound = prefactor * (1.0 + c / r.gamma + c / r.gamma * std::log(1.0 / opt)) * opt;
    } else if (u && !margin) {
        r.regime = BoundRegime::anticoncentration;
        r.gamma = in.gamma.value_or(std::sqrt(opt));
        r.components.phi = 2.0 * *u * r.gamma;
        r.components.opt_term = (1.0 + c / r.gamma) * opt;
        r.components.log_term = (c / r.gamma) * opt * std::log(1.0 / opt);
        r.err_bound = prefactor * (2.0 * *u * r.gamma + 3.0 * (c / r.gamma) * opt * std::log(1.0 / opt));
        r.note = "closed form with (1 + C/g) OPT + (C/g) OPT log(1/OPT) <= 3 (C/g) OPT log(1/OPT)";
    } else {
        r.regime = BoundRegime::empirical;
        if (in.gamma) {
            r.gamma = *in.gamma;
        } else {
            auto objective = [&](double g) { return general_err(prefactor, opt, c, g, phi_at(g)); };
            double best = golden_section_min(objective, 1e-6, 1.0);
            double best_val = objective(best);
            // The soft-margin curve is a step function; its grid points are
            // candidates golden-section can step over.
            if (in.soft_margin) {
                for (const auto& [g, value] : in.soft_margin->points) {
                    if (g <= 0.0 || g > 1.0) continue;
                    if (const double v = objective(g); v < best_val) {
                        best = g;
                        best_val = v;
                    }
                }
            }
            r.gamma = best;
        }
        r.components.phi = phi_at(r.gamma);
        r.components.opt_term = (1.0 + c / r.gamma) * opt;
        r.components.log_term = (c / r.gamma) * opt * std::log(1.0 / opt);
        r.err_bound = general_err(prefactor, opt, c, r.gamma, r.components.phi);
    }

    r.xi_supplied = in.xi.has_value();
    r.xi = in.xi.value_or(r.components.phi + opt);
    const double g0 = std::max(in.initial_norm, 1.0);
    if (r.xi > 0.0) {
        r.t_bound = 4.0 / (in.step_size * in.alpha * in.alpha * r.gamma * r.gamma * r.xi * r.xi) * g0;
    } else {
        r.t_bound = std::numeric_limits<double>::infinity();
    }
    return r;
}

// ---------------------------------------------------------------------------
// xi estimation

XiEstimate xi_estimate(const Dataset& samples, std::span<const double> v_star, double gamma,
                       const AnalyticProfile* profile) {
    if (samples.empty()) throw InvalidArgument("xi_estimate: empty sample set");
    if (!(gamma > 0.0)) throw InvalidArgument("xi_estimate: gamma must be > 0");
    XiEstimate est;
    const std::size_t n = samples.size();
    est.samples = n;
    double sum = 0.0, sum_sq = 0.0, band = 0.0, wrong = 0.0, wrong_rate = 0.0, wrong_margin = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = xi_hat(v_star, samples.x(i), samples.y(i), gamma);
        sum += xi;
        sum_sq += xi * xi;
        const double margin = samples.y(i) * dot(v_star, samples.x(i));
        if (margin < 0.0) {
            wrong += xi;
            wrong_rate += 1.0;
            wrong_margin += -margin;
        } else if (margin < gamma) {
            band += 1.0;
        }
    }
    const double nn = static_cast<double>(n);
    est.mean = sum / nn;
    const double var = n > 1 ? std::max(0.0, (sum_sq - nn * est.mean * est.mean) / (nn - 1.0)) : 0.0;
    est.standard_error = std::sqrt(var / nn);
    est.ci_low = est.mean - 1.96 * est.standard_error;
    est.ci_high = est.mean + 1.96 * est.standard_error;
    est.band_mean = band / nn;
    est.misclassified_mean = wrong / nn;
    est.misclassified_rate = wrong_rate / nn;
    est.misclassified_margin = wrong_margin / nn;

    if (profile != nullptr) {
        const double grid[] = {gamma};
        const double phi = estimate_soft_margin(samples, v_star, grid).front().second;
        const double opt = profile->opt_lin;
        est.bounded_support_bound = phi + (1.0 + 1.0 / gamma) * opt;
        if (std::isfinite(profile->subexp_norm) && profile->subexp_norm > 0.0) {
            const double c = profile->subexp_norm;
            est.truncation_bound = opt > 0.0 ? phi + opt + (c / gamma) * opt * (1.0 + std::log(1.0 / opt)) : phi;
        }
    }
    return est;
}

XiEstimate xi_estimate(const DistributionSpec& spec, double gamma, std::size_t n, std::uint64_t seed,
                       const AnalyticProfile* profile) {
    if (n < 10000) throw InvalidArgument("xi_estimate: needs >= 1e4 samples");
    Rng rng(seed);
    const Dataset data = sample(spec, rng, n);
    return xi_estimate(data, optimal_halfspace(spec), gamma, profile);
}

}  // namespace agn
