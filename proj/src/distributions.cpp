#include "agn/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "agn/error.hpp"
#include "agn/matrix.hpp"
#include "agn/normal.hpp"

namespace agn {

void Dataset::push_back(std::span<const double> x, int y) {
    if (x.size() != dim_) throw DimensionError("sample dimension mismatch");
    if (y != 1 && y != -1) throw InvalidArgument("label must be -1 or +1");
    features_.insert(features_.end(), x.begin(), x.end());
    labels_.push_back(y);
}

void Dataset::reserve(std::size_t n) {
    features_.reserve(n * dim_);
    labels_.reserve(n);
}

std::string_view to_string(DistributionKind kind) {
    switch (kind) {
        case DistributionKind::two_gaussian_adversarial: return "two_gaussian_adversarial";
        case DistributionKind::absolute_boundary: return "absolute_boundary";
        case DistributionKind::custom_sampler: return "custom_sampler";
    }
    return "unknown";
}

DistributionKind distribution_kind_from_string(std::string_view name) {
    if (name == "two_gaussian_adversarial") return DistributionKind::two_gaussian_adversarial;
    if (name == "absolute_boundary") return DistributionKind::absolute_boundary;
    if (name == "custom_sampler") return DistributionKind::custom_sampler;
    throw InvalidArgument("unknown distribution kind '" + std::string(name) + "'");
}

void DistributionSpec::validate() const {
    if (dimension == 0) throw InvalidArgument("dimension must be >= 1");
    switch (kind) {
        case DistributionKind::two_gaussian_adversarial:
            if (!(margin >= 0.0)) throw InvalidArgument("margin must be >= 0");
            if (!(boundary >= margin)) throw InvalidArgument("boundary must be >= margin");
            if (!(rcn_rate >= 0.0 && rcn_rate < 0.5)) throw InvalidArgument("rcn_rate must lie in [0, 1/2)");
            if (!std::isfinite(cluster_offset)) throw InvalidArgument("cluster_offset must be finite");
            break;
        case DistributionKind::absolute_boundary:
            if (!(boundary > 0.0)) throw InvalidArgument("absolute boundary must be > 0");
            if (dimension < 2) throw InvalidArgument("absolute_boundary needs dimension >= 2");
            break;
        case DistributionKind::custom_sampler:
            if (!custom) throw InvalidArgument("custom_sampler needs a sampler function");
            break;
    }
}

// ---------------------------------------------------------------------------
// Sampling

namespace {

int draw_two_gaussian(const DistributionSpec& spec, Rng& rng, std::span<double> x) {
    double x1 = 0.0;
    int attempts = 0;
    do {
        if (++attempts > kMaxRejectionAttempts) {
            throw InfeasibleSpec("two-Gaussian rejection sampler exhausted its attempt cap; "
                                 "margin is too wide for the cluster offset");
        }
        const double centre = rng.uniform() < 0.5 ? -spec.cluster_offset : spec.cluster_offset;
        x1 = centre + rng.normal();
    } while (std::abs(x1) <= spec.margin);
    x[0] = x1;
    for (std::size_t k = 1; k < x.size(); ++k) x[k] = rng.normal();

    int y = x1 > 0.0 ? 1 : -1;
    if (std::abs(x1) <= spec.boundary) {
        y = -y;
    } else if (spec.rcn_rate > 0.0 && rng.bernoulli(spec.rcn_rate)) {
        y = -y;
    }
    return y;
}

int draw_absolute(const DistributionSpec& spec, Rng& rng, std::span<double> x) {
    for (double& v : x) v = rng.normal();
    return x[1] < spec.boundary * std::abs(x[0]) ? 1 : -1;
}

}  // namespace

int draw(const DistributionSpec& spec, Rng& rng, std::span<double> x) {
    if (x.size() != spec.dimension) throw DimensionError("draw: output buffer has wrong dimension");
    switch (spec.kind) {
        case DistributionKind::two_gaussian_adversarial: return draw_two_gaussian(spec, rng, x);
        case DistributionKind::absolute_boundary: return draw_absolute(spec, rng, x);
        case DistributionKind::custom_sampler: {
            const int y = spec.custom(rng, x);
            if (y != 1 && y != -1) throw InvalidArgument("custom sampler returned an invalid label");
            return y;
        }
    }
    return 1;
}

Dataset sample(const DistributionSpec& spec, Rng& rng, std::size_t n) {
    spec.validate();
    if (n == 0) throw InvalidArgument("sample: n must be >= 1");
    Dataset data(spec.dimension);
    data.reserve(n);
    std::vector<double> x(spec.dimension);
    for (std::size_t i = 0; i < n; ++i) {
        const int y = draw(spec, rng, x);
        data.push_back(x, y);
    }
    return data;
}

// ---------------------------------------------------------------------------
// Closed forms

namespace {

void check_two_gaussian(double margin, double boundary, double rcn_rate) {
    if (!(margin >= 0.0)) throw InvalidArgument("margin must be >= 0");
    if (!(boundary >= margin)) throw InvalidArgument("boundary must be >= margin");
    if (!(rcn_rate >= 0.0 && rcn_rate < 0.5)) throw InvalidArgument("rcn_rate must lie in [0, 1/2)");
}

}  // namespace

double opt_lin_two_gaussian(double margin, double boundary, double rcn_rate, double offset) {
    check_two_gaussian(margin, boundary, rcn_rate);
    // (Phi(c - g) - (1 - p) Phi(c - b)) / Phi(c - g); at b = g this is p.
    const double inner = normal_cdf(offset - margin);
    return (inner - (1.0 - rcn_rate) * normal_cdf(offset - boundary)) / inner;
}

double bayes_risk_two_gaussian(double margin, double boundary, double rcn_rate, double offset) {
    check_two_gaussian(margin, boundary, rcn_rate);
    return rcn_rate * normal_cdf(offset - boundary) / normal_cdf(offset - margin);
}

double boundary_from_opt(double margin, double rcn_rate, double opt, double offset) {
    if (!(margin >= 0.0)) throw InvalidArgument("margin must be >= 0");
    if (!(rcn_rate >= 0.0 && rcn_rate < 0.5)) throw InvalidArgument("rcn_rate must lie in [0, 1/2)");
    // Past 1/2 the flipped halfspace wins, so no boundary has this OPT_lin.
    if (!(opt < 0.5)) throw InfeasibleSpec("OPT_lin target " + std::to_string(opt) + " must be below 1/2");
    const double arg = (1.0 - opt) / (1.0 - rcn_rate) * normal_cdf(offset - margin);
    if (!(arg > 0.0 && arg < 1.0)) {
        throw InfeasibleSpec("OPT_lin target " + std::to_string(opt) +
                             " is unreachable: quantile argument outside (0,1)");
    }
    const double b = offset - normal_quantile(arg);
    if (b < margin) {
        // Rounding can land a hair below the margin when opt == rcn_rate.
        if (margin - b <= 1e-12 * std::max(1.0, margin)) return margin;
        throw InfeasibleSpec("OPT_lin target " + std::to_string(opt) +
                             " is below the noise floor p = " + std::to_string(rcn_rate));
    }
    return b;
}

double opt_lin_absolute(double boundary) {
    if (!(boundary > 0.0)) throw InvalidArgument("absolute boundary must be > 0");
    return 0.5 - std::atan(1.0 / boundary) / std::numbers::pi;
}

double absolute_boundary_from_opt(double opt) {
    if (!(opt > 0.0 && opt < 0.5)) throw InfeasibleSpec("absolute-boundary OPT_lin must lie in (0, 1/2)");
    const double theta = std::numbers::pi * (0.5 - opt);
    return 1.0 / std::tan(theta);
}

int bayes_predict(const DistributionSpec& spec, std::span<const double> x) {
    switch (spec.kind) {
        case DistributionKind::two_gaussian_adversarial: {
            const int s = x[0] > 0.0 ? 1 : -1;
            return std::abs(x[0]) <= spec.boundary ? -s : s;
        }
        case DistributionKind::absolute_boundary:
            return x[1] < spec.boundary * std::abs(x[0]) ? 1 : -1;
        case DistributionKind::custom_sampler: break;
    }
    throw InvalidArgument("no Bayes rule is known for a custom sampler");
}

std::vector<double> optimal_halfspace(const DistributionSpec& spec) {
    std::vector<double> v(spec.dimension, 0.0);
    switch (spec.kind) {
        case DistributionKind::two_gaussian_adversarial: v[0] = 1.0; return v;
        case DistributionKind::absolute_boundary: v[1] = -1.0; return v;
        case DistributionKind::custom_sampler: break;
    }
    throw InvalidArgument("no optimal halfspace is known for a custom sampler");
}

AnalyticProfile analytic_profile(const DistributionSpec& spec, std::uint64_t seed,
                                 std::size_t estimate_samples) {
    spec.validate();
    AnalyticProfile profile;
    profile.optimal_halfspace = optimal_halfspace(spec);
    switch (spec.kind) {
        case DistributionKind::two_gaussian_adversarial: {
            profile.opt_lin = opt_lin_two_gaussian(spec.margin, spec.boundary, spec.rcn_rate, spec.cluster_offset);
            profile.bayes_risk =
                bayes_risk_two_gaussian(spec.margin, spec.boundary, spec.rcn_rate, spec.cluster_offset);
            if (spec.margin > 0.0) profile.hard_margin = spec.margin;
            Rng rng(derive_seed(seed, stream::diagnostics));
            const Dataset data = sample(spec, rng, estimate_samples);
            profile.subexp_norm = estimate_subexp_norm(data, {.seed = seed}).c;
            profile.subexp_norm_estimated = true;
            break;
        }
        case DistributionKind::absolute_boundary:
            profile.opt_lin = opt_lin_absolute(spec.boundary);
            profile.bayes_risk = 0.0;
            // Every 1D marginal is N(0,1): sup_t t / -log P(|Z| >= t) is the
            // t -> 0 limit sqrt(pi/2), and the density peaks at 1/sqrt(2 pi).
            profile.subexp_norm = std::sqrt(std::numbers::pi / 2.0);
            profile.subexp_norm_estimated = false;
            profile.anticoncentration = 1.0 / std::sqrt(2.0 * std::numbers::pi);
            break;
        case DistributionKind::custom_sampler:
            throw InvalidArgument("no analytic profile is known for a custom sampler");
    }
    return profile;
}

// ---------------------------------------------------------------------------
// Estimators

std::vector<std::pair<double, double>> estimate_soft_margin(const Dataset& samples,
                                                            std::span<const double> v,
                                                            std::span<const double> gamma_grid) {
    if (samples.empty()) throw InvalidArgument("estimate_soft_margin: empty sample set");
    if (v.size() != samples.dim()) throw DimensionError("estimate_soft_margin: direction dimension mismatch");
    if (std::abs(std::sqrt(dot(v, v)) - 1.0) > 1e-10) {
        throw InvalidArgument("estimate_soft_margin: direction must be a unit vector");
    }
    std::vector<double> proj(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) proj[i] = std::abs(dot(v, samples.x(i)));
    std::sort(proj.begin(), proj.end());
    std::vector<std::pair<double, double>> out;
    out.reserve(gamma_grid.size());
    const double n = static_cast<double>(samples.size());
    for (double g : gamma_grid) {
        const auto count = std::upper_bound(proj.begin(), proj.end(), g) - proj.begin();
        out.emplace_back(g, static_cast<double>(count) / n);
    }
    return out;
}

SubexpEstimate estimate_subexp_norm(const Dataset& samples, const SubexpOptions& options) {
    if (samples.size() < 10000) throw InvalidArgument("estimate_subexp_norm needs >= 1e4 samples");
    const std::size_t n = samples.size();
    const std::size_t d = samples.dim();

    std::vector<std::vector<double>> directions;
    for (std::size_t k = 0; k < d; ++k) {
        std::vector<double> e(d, 0.0);
        e[k] = 1.0;
        directions.push_back(std::move(e));
    }
    Rng rng(derive_seed(options.seed, stream::diagnostics));
    for (std::size_t k = 0; k < options.random_directions; ++k) {
        std::vector<double> v(d);
        rng.unit_vector(v);
        directions.push_back(std::move(v));
    }

    const double q_max = 0.9;
    const double q_min = std::min(q_max, static_cast<double>(options.min_tail_count) / static_cast<double>(n));
    const std::size_t levels = std::max<std::size_t>(options.tail_grid_points, 2);

    SubexpEstimate est;
    std::vector<double> proj(n);
    for (const auto& v : directions) {
        for (std::size_t i = 0; i < n; ++i) proj[i] = std::abs(dot(v, samples.x(i)));
        std::sort(proj.begin(), proj.end(), std::greater<>());
        double worst = 0.0;
        std::size_t worst_level = 0;
        for (std::size_t l = 0; l < levels; ++l) {
            const double frac = static_cast<double>(l) / static_cast<double>(levels - 1);
            const double q = q_max * std::pow(q_min / q_max, frac);
            const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(q * static_cast<double>(n))));
            const double t = proj[k - 1];
            // Count of |<v,x>| >= t, ties included.
            const auto count = std::upper_bound(proj.begin(), proj.end(), t, std::greater<>()) - proj.begin();
            const double tail = static_cast<double>(count) / static_cast<double>(n);
            double required = 0.0;
            if (t > 0.0) {
                required = tail >= 1.0 ? std::numeric_limits<double>::infinity() : t / -std::log(tail);
            }
            if (required > worst) {
                worst = required;
                worst_level = l;
            }
        }
        if (worst > est.required) {
            est.required = worst;
            est.heavy_tail = worst_level == levels - 1;
        }
    }

    est.c = std::numeric_limits<double>::infinity();
    const std::size_t points = std::max<std::size_t>(options.c_grid_points, 2);
    for (std::size_t i = 0; i < points; ++i) {
        const double c = options.c_min *
                         std::pow(options.c_max / options.c_min, static_cast<double>(i) / static_cast<double>(points - 1));
        if (c >= est.required) {
            est.c = c;
            break;
        }
    }
    return est;
}

}  // namespace agn
