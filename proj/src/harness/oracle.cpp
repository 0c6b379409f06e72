#include "agn/harness/oracle.hpp"

#include <cmath>
#include <algorithm>
#include <limits>
#include <numbers>

#include "agn/error.hpp"
#include "agn/matrix.hpp"
#include "agn/rng.hpp"

namespace agn {

namespace {

constexpr std::size_t kMinOracleSamples = 10000;

double binomial_se(double p, std::size_t n) { return std::sqrt(p * (1.0 - p) / static_cast<double>(n)); }

void check_n(std::size_t n) {
    if (n < kMinOracleSamples) throw InvalidArgument("oracle needs at least 10000 samples");
}

// Minimum over theta_k = k * step of the fraction of points with
// y <(cos theta, sin theta), (x1, x2)> <= 0. Each point is misclassified on
// a closed arc of length pi, so a difference array over the grid gives all
// errors in O(n + grid).
OracleEstimate angular_search(const Dataset& data) {
    const double two_pi = 2.0 * std::numbers::pi;
    const auto grid = static_cast<std::size_t>(std::ceil(two_pi / kOracleAngularStep));
    const double step = two_pi / static_cast<double>(grid);
    std::vector<long long> diff(grid + 1, 0);

    auto add_range = [&](std::size_t lo, std::size_t hi) {  // inclusive indices, lo <= hi
        diff[lo] += 1;
        diff[hi + 1] -= 1;
    };

    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto x = data.x(i);
        const double x1 = x[0] * data.y(i);
        const double x2 = x[1] * data.y(i);
        if (x1 == 0.0 && x2 == 0.0) {
            add_range(0, grid - 1);
            continue;
        }
        // Misclassified where cos(theta - phi) <= 0, i.e. theta in
        // [phi + pi/2, phi + 3pi/2].
        const double phi = std::atan2(x2, x1);
        double lo = std::fmod(phi + 0.5 * std::numbers::pi, two_pi);
        if (lo < 0.0) lo += two_pi;
        const double hi = lo + std::numbers::pi;
        // Grid indices k with lo <= k*step <= hi, wrapping around 2pi.
        const auto k_lo = static_cast<long long>(std::ceil(lo / step));
        const auto k_hi = static_cast<long long>(std::floor(hi / step));
        for (long long k = k_lo; k <= k_hi;) {
            const long long wrapped = k % static_cast<long long>(grid);
            const long long run_end = std::min<long long>(k_hi, k + (static_cast<long long>(grid) - 1 - wrapped));
            add_range(static_cast<std::size_t>(wrapped), static_cast<std::size_t>(wrapped + (run_end - k)));
            k = run_end + 1;
        }
    }

    long long running = 0;
    long long best = std::numeric_limits<long long>::max();
    std::size_t best_k = 0;
    for (std::size_t k = 0; k < grid; ++k) {
        running += diff[k];
        if (running < best) {
            best = running;
            best_k = k;
        }
    }
    OracleEstimate out;
    out.samples = data.size();
    out.estimate = static_cast<double>(best) / static_cast<double>(data.size());
    out.standard_error = binomial_se(out.estimate, data.size());
    const double theta = static_cast<double>(best_k) * step;
    out.direction.assign(data.dim(), 0.0);
    out.direction[0] = std::cos(theta);
    out.direction[1] = std::sin(theta);
    return out;
}

}  // namespace

OracleEstimate mc_oracle_opt_lin(const DistributionSpec& spec, std::size_t n, std::uint64_t seed) {
    check_n(n);
    spec.validate();
    Rng rng(seed);
    const Dataset data = sample(spec, rng, n);
    switch (spec.kind) {
        case DistributionKind::two_gaussian_adversarial: {
            OracleEstimate out;
            out.samples = n;
            out.direction = optimal_halfspace(spec);
            std::size_t wrong = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (data.y(i) * dot(out.direction, data.x(i)) <= 0.0) ++wrong;
            }
            out.estimate = static_cast<double>(wrong) / static_cast<double>(n);
            out.standard_error = binomial_se(out.estimate, n);
            return out;
        }
        case DistributionKind::absolute_boundary:
            return angular_search(data);
        case DistributionKind::custom_sampler:
            if (spec.dimension < 2) throw InvalidArgument("direction search needs dimension >= 2");
            return angular_search(data);
    }
    throw InvalidArgument("unknown distribution kind");
}

OracleEstimate mc_oracle_bayes(const DistributionSpec& spec, std::size_t n, std::uint64_t seed) {
    check_n(n);
    spec.validate();
    if (spec.kind == DistributionKind::custom_sampler) throw InvalidArgument("no Bayes rule for a custom sampler");
    Rng rng(seed);
    std::vector<double> x(spec.dimension);
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const int y = draw(spec, rng, x);
        if (bayes_predict(spec, x) != y) ++wrong;
    }
    OracleEstimate out;
    out.samples = n;
    out.estimate = static_cast<double>(wrong) / static_cast<double>(n);
    out.standard_error = binomial_se(out.estimate, n);
    return out;
}

}  // namespace agn

namespace agn {

std::vector<DistributionSpec> default_oracle_grid() {
    std::vector<DistributionSpec> grid;
    const double triples[][3] = {{0.5, 2.04, 0.1}, {0.5, 1.0, 0.1},  {0.5, 1.5, 0.05}, {0.5, 3.0, 0.1},
                                 {0.5, 0.5, 0.1},  {0.75, 2.0, 0.1}, {1.0, 2.0, 0.0},  {1.0, 2.5, 0.2},
                                 {0.6, 1.8, 0.15}, {0.8, 3.5, 0.05}, {1.2, 2.2, 0.3},  {0.5, 2.5, 0.0}};
    for (const auto& t : triples) {
        DistributionSpec s;
        s.kind = DistributionKind::two_gaussian_adversarial;
        s.margin = t[0];
        s.boundary = t[1];
        s.rcn_rate = t[2];
        grid.push_back(s);
    }
    for (double b : {0.25, 1.0, 2.0, 4.0}) {
        DistributionSpec s;
        s.kind = DistributionKind::absolute_boundary;
        s.boundary = b;
        grid.push_back(s);
    }
    return grid;
}

namespace {

double z_score(double analytic, const OracleEstimate& est) {
    const double diff = std::abs(analytic - est.estimate);
    if (diff == 0.0) return 0.0;
    return est.standard_error > 0.0 ? diff / est.standard_error : std::numeric_limits<double>::infinity();
}

}  // namespace

OracleCell compare_with_oracle(const DistributionSpec& spec, std::size_t n, std::uint64_t seed) {
    OracleCell cell;
    cell.spec = spec;
    if (spec.kind == DistributionKind::two_gaussian_adversarial) {
        cell.analytic_opt_lin = opt_lin_two_gaussian(spec.margin, spec.boundary, spec.rcn_rate, spec.cluster_offset);
        cell.analytic_bayes = bayes_risk_two_gaussian(spec.margin, spec.boundary, spec.rcn_rate, spec.cluster_offset);
    } else if (spec.kind == DistributionKind::absolute_boundary) {
        cell.analytic_opt_lin = opt_lin_absolute(spec.boundary);
        cell.analytic_bayes = 0.0;
    } else {
        throw InvalidArgument("no analytic values for a custom sampler");
    }
    cell.opt_lin = mc_oracle_opt_lin(spec, n, derive_seed(seed, 1));
    cell.bayes = mc_oracle_bayes(spec, n, derive_seed(seed, 2));
    cell.opt_lin_z = z_score(cell.analytic_opt_lin, cell.opt_lin);
    cell.bayes_z = z_score(cell.analytic_bayes, cell.bayes);
    return cell;
}

}  // namespace agn
