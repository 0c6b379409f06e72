#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "agn/distributions.hpp"
#include "agn/matrix.hpp"
#include "agn/network.hpp"

namespace agn {

/// Rank-one comparator with rows sgn(a_j) v* / sqrt(m); unit Frobenius norm.
struct Comparator {
    Matrix V;
    std::vector<double> v_star;
};

Comparator make_comparator(std::span<const double> outer_weights, std::span<const double> v_star);

/// Per-sample penalty
///   1(y<v*,x> in [0,gamma)) + (1 + |<v*,x>|/gamma) 1(y<v*,x> < 0).
/// The band is half-open, so y<v*,x> == 0 counts as in-band.
double xi_hat(std::span<const double> v_star, std::span<const double> x, int y, double gamma);

/// Common magnitude |a_j| of a fixed outer layer.
double outer_magnitude(const NetworkParams& params);

/// LHS - RHS of
///   y <grad_W f, V> >= a gamma sqrt(m) [alpha - xi_hat(gamma)]
/// for a bias-free leaky-ReLU network with a fixed outer layer.
double verify_key_identity(const NetworkParams& params, std::span<const double> x, int y,
                           const Comparator& comparator, double gamma);

struct GeneralIdentityCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
    double derivative_sum = 0.0;  // sum_j sigma'(<w_j,x>)
};

/// Key identity for any nondecreasing activation:
///   y <grad_W f, V> >= a gamma m^{-1/2} [1 - xi_hat(gamma)] sum_j sigma'(<w_j,x>).
/// The bracket is 1 - xi_hat with xi_hat as defined above, i.e. the
/// misclassified term enters as (1 + |<v*,x>|/gamma). See
/// factored_general_rhs for the alternative grouping.
GeneralIdentityCheck verify_general_key_identity(const NetworkParams& params, std::span<const double> x,
                                                 int y, const Comparator& comparator, double gamma,
                                                 const Activation& activation);

/// The same right-hand side with the misclassified term grouped as
/// (1 + 1/gamma)|<v*,x>|. This grouping is NOT a valid lower bound when a
/// misclassified point has |<v*,x>| < 1; exposed so tests can document that.
double factored_general_rhs(const NetworkParams& params, std::span<const double> x, int y,
                            const Comparator& comparator, double gamma, const Activation& activation);

/// Soft-margin function phi(gamma) as a right-continuous step curve over a
/// sorted grid; values between grid points take the next grid value.
struct SoftMarginCurve {
    std::vector<std::pair<double, double>> points;
    double operator()(double gamma) const;
};

struct BoundComponents {
    double phi = 0.0;        // phi_{v*}(gamma)
    double opt_term = 0.0;   // (1 + C_m/gamma) OPT
    double log_term = 0.0;   // (C_m/gamma) OPT log(1/OPT)
    double prefactor = 0.0;  // 2 |l'(0)|^{-1} alpha^{-1}
};

enum class BoundRegime { hard_margin, anticoncentration, empirical, noiseless };

struct BoundReport {
    BoundRegime regime = BoundRegime::empirical;
    double gamma = 0.0;
    double xi = 0.0;        // value of xi(gamma) used in the iteration bound
    bool xi_supplied = false;
    double t_bound = 0.0;   // iterations, explicit-constant variant; +inf if xi == 0
    double err_bound = 0.0;
    BoundComponents components;
    bool noiseless = false;
    std::string note;
};

struct BoundInputs {
    AnalyticProfile profile;
    double alpha = 0.1;
    LossSpec loss;
    std::optional<double> gamma;
    double step_size = 0.01;
    double initial_norm = 1.0;                 // G0 = ||W0||_F
    std::optional<SoftMarginCurve> soft_margin;  // used when no closed form applies
    std::optional<double> xi;                  // measured xi(gamma), overrides the proxy
};

/// Generalization and iteration bounds.
///
/// err_bound = 2|l'(0)|^{-1} alpha^{-1} [(1 + C/g + (C/g) log(1/OPT)) OPT + phi(g)]
/// in general; the hard-margin regime (g = margin, phi = 0) and the
/// anti-concentration regime (g = sqrt(OPT),
/// err_bound = 2|l'(0)|^{-1} alpha^{-1} [2 U g + 3 (C/g) OPT log(1/OPT)])
/// are reported through their closed forms. Otherwise gamma is found by
/// golden-section search over (0,1].
///
/// t_bound = 4 / (eta alpha^2 g^2 xi^2) * max(G0, 1), with xi the supplied
/// value or the proxy phi(g) + OPT.
BoundReport theorem_bound(const BoundInputs& inputs);

/// Markov bound on classification error from the surrogate risk E[-l'(y f)].
double markov_error_bound(double surrogate_risk, const LossSpec& loss);

struct XiEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double band_mean = 0.0;          // E 1(y<v*,x> in [0,gamma))
    double misclassified_mean = 0.0; // E (1 + |<v*,x>|/gamma) 1(y<v*,x> < 0)
    double misclassified_rate = 0.0; // E 1(y<v*,x> < 0)
    double misclassified_margin = 0.0;  // E |<v*,x>| 1(y<v*,x> < 0)
    std::size_t samples = 0;
    // phi + (1 + 1/gamma) OPT; valid only when ||x|| <= 1 a.s.
    std::optional<double> bounded_support_bound;
    // phi + OPT + (C_m/gamma) OPT (1 + log(1/OPT)), the truncation bound.
    std::optional<double> truncation_bound;
};

/// Monte-Carlo estimate of E xi_hat(gamma) with a 95% normal interval. When
/// `profile` is given the analytic upper bounds are filled in with phi
/// estimated from the same samples.
XiEstimate xi_estimate(const Dataset& samples, std::span<const double> v_star, double gamma,
                       const AnalyticProfile* profile = nullptr);

XiEstimate xi_estimate(const DistributionSpec& spec, double gamma, std::size_t n, std::uint64_t seed,
                       const AnalyticProfile* profile = nullptr);

// ---------------------------------------------------------------------------
// Randomized verification suites

struct SuiteReport {
    std::string name;
    std::size_t tuples = 0;
    std::uint64_t seed = 0;
    double min_slack = 0.0;
    std::size_t worst_index = 0;
    std::uint64_t worst_seed = 0;   // derived seed reproducing the worst tuple
    double threshold = -1e-9;
    std::size_t violations = 0;
    double seconds = 0.0;
    bool passed() const { return violations == 0; }
};

/// Randomized key-identity check on `tuples` random (W, x, y, v*, gamma).
SuiteReport run_key_identity_suite(std::size_t tuples, std::uint64_t seed, std::size_t threads = 0);

/// General-activation identity on random tuples for the given activation.
SuiteReport run_general_identity_suite(std::size_t tuples, std::uint64_t seed, ActivationKind activation,
                                       std::size_t threads = 0);

/// For leaky ReLU: the general right-hand side dominates the specialized one
/// on every tuple. min_slack is min(general_rhs - specialized_rhs).
SuiteReport run_identity_implication_suite(std::size_t tuples, std::uint64_t seed, std::size_t threads = 0);

struct GradientCheckOptions {
    double step = 1e-6;
    double tolerance = 1e-5;
    double magnitude_floor = 1e-3;
    double kink_margin = 1e-4;
};

/// Largest relative error between loss_gradient and central differences of
/// the loss over every trainable parameter.
double gradient_check(const NetworkParams& params, std::span<const double> x, int y, const LossSpec& loss,
                      const GradientCheckOptions& options = {});

/// Smallest |pre-activation| over every hidden unit of every layer.
double min_preactivation_magnitude(const NetworkParams& params, std::span<const double> x);

/// Gradient check across random configurations covering biases, trainable
/// outer layers, the deep variant and tanh. min_slack = tolerance - max error.
SuiteReport run_gradient_suite(std::size_t configs, std::uint64_t seed, std::size_t threads = 0,
                               const GradientCheckOptions& options = {});

/// Runs `work(i)` for i in [0, n) across threads and merges the (slack, i)
/// minimum. Each call must be independent of the others.
std::pair<double, std::size_t> parallel_min(std::size_t n, std::size_t threads,
                                            const std::function<double(std::size_t)>& work,
                                            std::size_t* violations, double threshold);

}  // namespace agn
