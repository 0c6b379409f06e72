#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "agn/distributions.hpp"

namespace agn {

struct OracleEstimate {
    double estimate = 0.0;
    double standard_error = 0.0;
    std::size_t samples = 0;
    std::vector<double> direction;  // halfspace achieving the estimate, if any
};

// Angular step of the absolute-boundary direction search, in radians.
inline constexpr double kOracleAngularStep = 1e-3;

/// Monte-Carlo estimate of the best bias-free halfspace error. Two-Gaussian:
/// error of the halfspace (1, 0, ..., 0). Absolute boundary: minimum
/// empirical error over unit directions in the (x1, x2) plane on a grid of
/// step kOracleAngularStep. Needs n >= 1e4.
OracleEstimate mc_oracle_opt_lin(const DistributionSpec& spec, std::size_t n, std::uint64_t seed);

/// Monte-Carlo error of the Bayes decision rule.
OracleEstimate mc_oracle_bayes(const DistributionSpec& spec, std::size_t n, std::uint64_t seed);

}  // namespace agn

namespace agn {

struct OracleCell {
    DistributionSpec spec;
    double analytic_opt_lin = 0.0;
    double analytic_bayes = 0.0;
    OracleEstimate opt_lin;
    OracleEstimate bayes;
    // |analytic - oracle| in standard errors; 0 when both agree exactly.
    double opt_lin_z = 0.0;
    double bayes_z = 0.0;
};

/// Default comparison grid: two-Gaussian (margin, boundary, noise) triples
/// including (0.5, 2.04, 0.1) and absolute-boundary slopes.
std::vector<DistributionSpec> default_oracle_grid();

/// Analytic values against Monte-Carlo oracles for one distribution; each
/// oracle uses a seed derived from `seed`.
OracleCell compare_with_oracle(const DistributionSpec& spec, std::size_t n, std::uint64_t seed);

}  // namespace agn
