#include "agn/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "agn/csv.hpp"
#include "agn/rng.hpp"
#include "agn/theory.hpp"

namespace agn {

void TrainConfig::validate() const {
    if (!(step_size >= 0.0) || !std::isfinite(step_size)) throw InvalidArgument("step_size must be finite and >= 0");
    if (iterations < 1) throw InvalidArgument("iterations must be >= 1");
    if (validation_size < 1) throw InvalidArgument("validation_size must be >= 1");
    if (validation_cadence < 1) throw InvalidArgument("validation_cadence must be >= 1");
    if (test_size < 1) throw InvalidArgument("test_size must be >= 1");
    if (batch_mode.kind == BatchKind::minibatch) {
        if (batch_mode.batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
        if (batch_mode.epochs < 1) throw InvalidArgument("epochs must be >= 1");
    }
    for (double g : diag_gamma_grid) {
        if (!(g > 0.0) || !std::isfinite(g)) throw InvalidArgument("diagnostic gamma values must be positive");
    }
    loss.validate();
    if (initial_params) initial_params->validate();
}

namespace {

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

bool gradient_finite(const Gradient& g) {
    if (!all_finite(g.hidden.flat()) || !all_finite(g.biases) || !all_finite(g.outer)) return false;
    for (const Matrix& m : g.deep) {
        if (!all_finite(m.flat())) return false;
    }
    return true;
}

void axpy(std::span<double> y, std::span<const double> x, double scale) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += scale * x[i];
}

// params += scale * g on the trainable blocks present in g.
void add_gradient(NetworkParams& params, const Gradient& g, double scale) {
    axpy(params.hidden_weights.flat(), g.hidden.flat(), scale);
    if (!g.biases.empty()) axpy(*params.hidden_biases, g.biases, scale);
    if (!g.outer.empty()) axpy(params.outer_weights, g.outer, scale);
    for (std::size_t l = 0; l < g.deep.size(); ++l) {
        axpy(params.depth_extension[l].flat(), g.deep[l].flat(), scale);
    }
}

void accumulate(Gradient& into, const Gradient& g) {
    if (into.hidden.size() == 0) {
        into = g;
        return;
    }
    axpy(into.hidden.flat(), g.hidden.flat(), 1.0);
    axpy(into.biases, g.biases, 1.0);
    axpy(into.outer, g.outer, 1.0);
    for (std::size_t l = 0; l < g.deep.size(); ++l) axpy(into.deep[l].flat(), g.deep[l].flat(), 1.0);
}

bool params_finite(const NetworkParams& p) {
    if (!all_finite(p.hidden_weights.flat()) || !all_finite(p.outer_weights)) return false;
    if (p.hidden_biases && !all_finite(*p.hidden_biases)) return false;
    for (const Matrix& m : p.depth_extension) {
        if (!all_finite(m.flat())) return false;
    }
    return true;
}

// Step with rollback: on a non-finite result the parameters are restored.
void guarded_step(NetworkParams& params, const Gradient& g, double scale, std::size_t step,
                  const NetworkParams* snapshot_source) {
    if (!gradient_finite(g)) {
        throw TrainingDiverged("non-finite gradient at step " + std::to_string(step),
                               snapshot_source ? *snapshot_source : params, step);
    }
    if (scale == 0.0) return;
    NetworkParams before = params;
    add_gradient(params, g, scale);
    if (!params_finite(params)) {
        throw TrainingDiverged("non-finite parameters after step " + std::to_string(step), std::move(before), step);
    }
}

double sq_norm(std::span<const double> x) { return dot(x, x); }

double frob_sq(const NetworkParams& p) { return frobenius_norm_sq(p.hidden_weights); }

struct Profile {
    double opt_lin = std::numeric_limits<double>::quiet_NaN();
    double bayes = std::numeric_limits<double>::quiet_NaN();
};

Profile closed_form_profile(const DistributionSpec& spec) {
    Profile p;
    switch (spec.kind) {
        case DistributionKind::two_gaussian_adversarial:
            p.opt_lin = opt_lin_two_gaussian(spec.margin, spec.boundary, spec.rcn_rate, spec.cluster_offset);
            p.bayes = bayes_risk_two_gaussian(spec.margin, spec.boundary, spec.rcn_rate, spec.cluster_offset);
            break;
        case DistributionKind::absolute_boundary:
            p.opt_lin = opt_lin_absolute(spec.boundary);
            p.bayes = 0.0;
            break;
        case DistributionKind::custom_sampler:
            break;
    }
    return p;
}

}  // namespace

double apply_sgd_step(NetworkParams& params, std::span<const double> x, int y, double step_size,
                      const LossSpec& loss) {
    check_label(y);
    const double f = forward(params, x);
    if (!std::isfinite(f)) throw TrainingDiverged("non-finite network output", params, 0);
    const double e_hat = loss.neg_derivative(y * f);
    if (step_size == 0.0) return e_hat;
    const Gradient g = loss_gradient(params, x, y, loss);
    guarded_step(params, g, -step_size, 0, nullptr);
    return e_hat;
}

NetworkParams sgd_step(const NetworkParams& params, std::span<const double> x, int y, double step_size,
                       const LossSpec& loss) {
    NetworkParams next = params;
    apply_sgd_step(next, x, y, step_size, loss);
    return next;
}

std::size_t select_best_iterate(std::span<const double> validation_curve) {
    if (validation_curve.empty()) throw InvalidArgument("validation curve is empty");
    std::size_t best = 0;
    for (std::size_t i = 1; i < validation_curve.size(); ++i) {
        if (validation_curve[i] < validation_curve[best]) best = i;
    }
    return best;
}

double classification_error(const NetworkParams& params, const Dataset& data) {
    if (data.empty()) throw InvalidArgument("empty dataset");
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data.y(i) * forward(params, data.x(i)) <= 0.0) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(data.size());
}

double surrogate_risk(const NetworkParams& params, const Dataset& data, const LossSpec& loss) {
    if (data.empty()) throw InvalidArgument("empty dataset");
    double sum = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) sum += loss.neg_derivative(data.y(i) * forward(params, data.x(i)));
    return sum / static_cast<double>(data.size());
}

TrainOutput train(const DistributionSpec& spec, const NetworkConfig& net, const TrainConfig& config) {
    const auto started = std::chrono::steady_clock::now();
    spec.validate();
    net.validate();
    config.validate();

    Rng init_rng(derive_seed(config.seed, stream::init));
    NetworkParams params = config.initial_params ? *config.initial_params : initialize_network(net, init_rng);
    params.validate();
    if (params.input_dim() != spec.dimension) {
        throw DimensionError("network input dimension " + std::to_string(params.input_dim()) +
                             " does not match distribution dimension " + std::to_string(spec.dimension));
    }

    Rng val_rng(derive_seed(config.seed, stream::validation));
    const Dataset validation = sample(spec, val_rng, config.validation_size);

    if (config.theorem_mode) {
        double mean_sq = 0.0;
        for (std::size_t i = 0; i < validation.size(); ++i) mean_sq += sq_norm(validation.x(i));
        mean_sq /= static_cast<double>(validation.size());
        if (config.step_size > 1.0 / mean_sq) {
            throw InvalidArgument("step size " + format_number(config.step_size) + " exceeds 1/B_X^2 = " +
                                  format_number(1.0 / mean_sq));
        }
    }

    TrainOutput out;
    TheoryTrace& trace = out.trace;
    trace.gamma_grid = config.diag_gamma_grid;
    const std::size_t ng = trace.gamma_grid.size();
    trace.accumulated_growth_floor.assign(ng, 0.0);

    const bool online = config.batch_mode.kind == BatchKind::online;
    const bool have_vstar = spec.kind != DistributionKind::custom_sampler && !params.outer_trainable &&
                            !params.outer_weights.empty();
    std::optional<Comparator> comparator;
    double a = 0.0;
    if (have_vstar) {
        try {
            a = outer_magnitude(params);
            comparator = make_comparator(params.outer_weights, optimal_halfspace(spec));
        } catch (const InvalidArgument&) {
            comparator.reset();
        }
    }
    trace.pathwise_checks = comparator && online && params.is_baseline_shape() &&
                            params.activation == ActivationKind::leaky_relu;
    const double m = static_cast<double>(params.width());
    const double alpha = params.leaky_slope;
    const double eta = config.step_size;

    auto current_h = [&]() { return comparator ? frobenius_dot(params.hidden_weights, comparator->V) : 0.0; };

    // Window accumulators, reset at each recorded row.
    double win_e = 0.0;
    std::vector<double> win_xi(ng, 0.0);
    std::vector<double> last_xi(ng, std::numeric_limits<double>::quiet_NaN());
    std::size_t win_n = 0;
    double win_key = std::numeric_limits<double>::infinity();
    double win_growth = std::numeric_limits<double>::infinity();
    double win_norm = std::numeric_limits<double>::infinity();

    std::vector<double> errors;
    NetworkParams best = params;
    double best_error = std::numeric_limits<double>::infinity();

    auto record = [&](std::size_t t) {
        const double err = classification_error(params, validation);
        out.validation_curve.push_back({t, err});
        errors.push_back(err);
        if (err < best_error) {
            best_error = err;
            best = params;
        }
        TraceRow row;
        row.t = t;
        row.h = current_h();
        row.g = std::sqrt(frob_sq(params));
        row.cauchy_schwarz_slack = row.g - std::abs(row.h);
        trace.min_cauchy_schwarz_slack = std::min(trace.min_cauchy_schwarz_slack, row.cauchy_schwarz_slack);
        row.xi = last_xi;
        row.xi_window.assign(ng, std::numeric_limits<double>::quiet_NaN());
        if (win_n > 0) {
            row.window_surrogate = win_e / static_cast<double>(win_n);
            for (std::size_t k = 0; k < ng; ++k) row.xi_window[k] = win_xi[k] / static_cast<double>(win_n);
        } else {
            row.window_surrogate = std::numeric_limits<double>::quiet_NaN();
        }
        if (trace.pathwise_checks && win_n > 0) {
            row.key_identity_slack = win_key;
            row.correlation_growth_slack = win_growth;
            row.norm_growth_slack = win_norm;
        }
        trace.rows.push_back(std::move(row));
        win_e = 0.0;
        std::fill(win_xi.begin(), win_xi.end(), 0.0);
        win_n = 0;
        win_key = win_growth = win_norm = std::numeric_limits<double>::infinity();
    };

    record(0);
    std::size_t steps = 0;

    if (online) {
        Rng train_rng(derive_seed(config.seed, stream::train));
        std::vector<double> x(spec.dimension);
        for (std::size_t t = 0; t < config.iterations; ++t) {
            const int y = draw(spec, train_rng, x);
            const double h0 = comparator ? current_h() : 0.0;
            const double g0 = trace.pathwise_checks ? frob_sq(params) : 0.0;
            double key_slack = 0.0;
            if (trace.pathwise_checks) {
                const double corr = network_gradient_correlation(params, x, y, comparator->V);
                key_slack = std::numeric_limits<double>::infinity();
                for (std::size_t k = 0; k < ng; ++k) {
                    const double gamma = trace.gamma_grid[k];
                    const double rhs = a * gamma * std::sqrt(m) * (alpha - xi_hat(comparator->v_star, x, y, gamma));
                    key_slack = std::min(key_slack, corr - rhs);
                }
            }

            const double f = forward(params, x);
            if (!std::isfinite(f)) throw TrainingDiverged("non-finite network output at step " + std::to_string(t), params, t);
            const double e_hat = config.loss.neg_derivative(y * f);
            if (eta != 0.0) guarded_step(params, loss_gradient(params, x, y, config.loss), -eta, t, nullptr);
            ++steps;

            win_e += e_hat;
            ++win_n;
            if (comparator) {
                for (std::size_t k = 0; k < ng; ++k) {
                    last_xi[k] = xi_hat(comparator->v_star, x, y, trace.gamma_grid[k]);
                    win_xi[k] += last_xi[k];
                }
            }
            if (trace.pathwise_checks) {
                const double h1 = current_h();
                const double g1 = frob_sq(params);
                double growth = std::numeric_limits<double>::infinity();
                for (std::size_t k = 0; k < ng; ++k) {
                    const double floor = eta * a * trace.gamma_grid[k] * std::sqrt(m) * (alpha * e_hat - last_xi[k]);
                    trace.accumulated_growth_floor[k] += floor;
                    growth = std::min(growth, (h1 - h0) - floor);
                }
                const double norm = g0 + 2.0 * eta + eta * eta * m * a * a * sq_norm(x) - g1;
                win_key = std::min(win_key, key_slack);
                win_growth = std::min(win_growth, growth);
                win_norm = std::min(win_norm, norm);
                trace.min_key_identity_slack = std::min(trace.min_key_identity_slack, key_slack);
                trace.min_correlation_growth_slack = std::min(trace.min_correlation_growth_slack, growth);
                trace.min_norm_growth_slack = std::min(trace.min_norm_growth_slack, norm);
                ++trace.steps_checked;
            }

            const std::size_t done = t + 1;
            if (done % config.validation_cadence == 0 || done == config.iterations) record(done);
        }
    } else {
        Rng train_rng(derive_seed(config.seed, stream::train));
        const Dataset train_set = sample(spec, train_rng, config.iterations);
        Rng shuffle_rng(derive_seed(config.seed, stream::shuffle));
        const std::size_t bs = config.batch_mode.batch_size;
        const std::size_t n = train_set.size();
        std::size_t step = 0;
        for (std::size_t epoch = 0; epoch < config.batch_mode.epochs; ++epoch) {
            const std::vector<std::size_t> order = random_permutation(n, shuffle_rng);
            for (std::size_t start = 0; start < n; start += bs) {
                const std::size_t end = std::min(n, start + bs);
                Gradient sum;
                for (std::size_t i = start; i < end; ++i) {
                    const std::size_t idx = order[i];
                    const double f = forward(params, train_set.x(idx));
                    win_e += config.loss.neg_derivative(train_set.y(idx) * f);
                    ++win_n;
                    accumulate(sum, loss_gradient(params, train_set.x(idx), train_set.y(idx), config.loss));
                }
                if (eta != 0.0) guarded_step(params, sum, -eta / static_cast<double>(end - start), step, nullptr);
                ++step;
                ++steps;
                if (step % config.validation_cadence == 0) record(step);
            }
        }
        if (step % config.validation_cadence != 0) record(step);
    }

    const std::size_t best_index = select_best_iterate(errors);
    ExperimentResult& result = out.result;
    result.best_iterate = out.validation_curve[best_index].t;

    Rng test_rng(derive_seed(config.seed, stream::test));
    const Dataset test = sample(spec, test_rng, config.test_size);
    result.test_error = classification_error(best, test);
    result.surrogate_risk_at_best = surrogate_risk(best, test, config.loss);
    result.markov_bound = markov_error_bound(result.surrogate_risk_at_best, config.loss);
    const Profile profile = closed_form_profile(spec);
    result.opt_lin = profile.opt_lin;
    result.bayes_risk = profile.bayes;
    result.seed = config.seed;
    result.steps = steps;
    out.best_params = std::move(best);
    out.final_params = std::move(params);
    result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return out;
}

void write_trace_csv(const TheoryTrace& trace, const std::filesystem::path& path, std::string_view header_comment) {
    std::vector<std::string> header = {"t", "H", "G", "window_surrogate"};
    for (double g : trace.gamma_grid) header.push_back("xi_" + format_number(g));
    for (double g : trace.gamma_grid) header.push_back("xi_window_" + format_number(g));
    for (const char* name :
         {"key_identity_slack", "correlation_growth_slack", "norm_growth_slack", "cauchy_schwarz_slack"}) {
        header.emplace_back(name);
    }
    CsvWriter csv(path, header, header_comment);
    for (const TraceRow& row : trace.rows) {
        csv.field(row.t).field(row.h).field(row.g).field(row.window_surrogate);
        for (std::size_t k = 0; k < trace.gamma_grid.size(); ++k) {
            csv.field(k < row.xi.size() ? row.xi[k] : std::numeric_limits<double>::quiet_NaN());
        }
        for (std::size_t k = 0; k < trace.gamma_grid.size(); ++k) {
            csv.field(k < row.xi_window.size() ? row.xi_window[k] : std::numeric_limits<double>::quiet_NaN());
        }
        csv.field(row.key_identity_slack)
            .field(row.correlation_growth_slack)
            .field(row.norm_growth_slack)
            .field(row.cauchy_schwarz_slack);
        csv.end_row();
    }
    csv.close();
}

void write_validation_csv(std::span<const ValidationPoint> curve, const std::filesystem::path& path,
                          std::string_view header_comment) {
    CsvWriter csv(path, {"t", "validation_error"}, header_comment);
    for (const ValidationPoint& p : curve) {
        csv.field(p.t).field(p.error);
        csv.end_row();
    }
    csv.close();
}

}  // namespace agn
