#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "agn/rng.hpp"

namespace agn {

/// n labelled points stored row-major. Labels are -1 or +1.
class Dataset {
public:
    Dataset() = default;
    explicit Dataset(std::size_t dim) : dim_(dim) {}

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return labels_.size(); }
    bool empty() const { return labels_.empty(); }

    std::span<const double> x(std::size_t i) const { return {features_.data() + i * dim_, dim_}; }
    int y(std::size_t i) const { return labels_[i]; }

    void push_back(std::span<const double> x, int y);
    void reserve(std::size_t n);

    std::span<const double> features() const { return features_; }
    std::span<const int> labels() const { return labels_; }

    bool operator==(const Dataset&) const = default;

private:
    std::size_t dim_ = 0;
    std::vector<double> features_;
    std::vector<int> labels_;
};

enum class DistributionKind { two_gaussian_adversarial, absolute_boundary, custom_sampler };

std::string_view to_string(DistributionKind kind);
DistributionKind distribution_kind_from_string(std::string_view name);

// Draws one point into `x` (length d) and returns its label.
using CustomSampler = std::function<int(Rng&, std::span<double>)>;

/// Parameters of a synthetic distribution.
///
/// two_gaussian_adversarial: equal mixture of N((-c,0,...), I) and
/// N((c,0,...), I) with the slab |x1| <= margin removed. Clean label is
/// sgn(x1); labels with margin < |x1| < boundary are flipped, labels outside
/// that band are flipped independently with probability rcn_rate.
///
/// absolute_boundary: x ~ N(0, I_2) with y = +1 iff x2 < boundary * |x1|.
struct DistributionSpec {
    DistributionKind kind = DistributionKind::two_gaussian_adversarial;
    double margin = 0.5;
    double boundary = 2.04;
    double rcn_rate = 0.1;
    double cluster_offset = 3.0;
    std::size_t dimension = 2;
    CustomSampler custom;

    void validate() const;
};

/// Closed-form quantities of a distribution. Missing entries are unknown.
struct AnalyticProfile {
    double opt_lin = 0.0;
    double bayes_risk = 0.0;
    std::vector<double> optimal_halfspace;
    std::optional<double> hard_margin;
    double subexp_norm = 0.0;
    bool subexp_norm_estimated = true;
    std::optional<double> anticoncentration;
};

// Rejection attempts allowed per two-Gaussian sample before giving up.
inline constexpr int kMaxRejectionAttempts = 10000;

/// Draws one point. Returns the label.
int draw(const DistributionSpec& spec, Rng& rng, std::span<double> x);

Dataset sample(const DistributionSpec& spec, Rng& rng, std::size_t n);

/// Error of the e1 halfspace, which is OPT_lin while it stays below 1/2.
double opt_lin_two_gaussian(double margin, double boundary, double rcn_rate, double offset = 3.0);
double bayes_risk_two_gaussian(double margin, double boundary, double rcn_rate, double offset = 3.0);

/// Inverse of opt_lin_two_gaussian in the boundary. Throws InfeasibleSpec if
/// the target cannot be reached for the given margin and noise rate.
double boundary_from_opt(double margin, double rcn_rate, double opt, double offset = 3.0);

double opt_lin_absolute(double boundary);
/// Boundary b with opt_lin_absolute(b) == opt, for opt in (0, 1/2).
double absolute_boundary_from_opt(double opt);

/// The decision rule achieving the Bayes risk.
int bayes_predict(const DistributionSpec& spec, std::span<const double> x);

/// Unit vector of an optimal bias-free halfspace.
std::vector<double> optimal_halfspace(const DistributionSpec& spec);

/// Analytic profile. The sub-exponential norm of the two-Gaussian family has
/// no closed form and is estimated from `estimate_samples` draws seeded by
/// `seed`.
AnalyticProfile analytic_profile(const DistributionSpec& spec, std::uint64_t seed = 0,
                                 std::size_t estimate_samples = 100000);

/// Empirical P(|<v,x>| <= gamma) for each gamma, in grid order.
std::vector<std::pair<double, double>> estimate_soft_margin(const Dataset& samples,
                                                            std::span<const double> v,
                                                            std::span<const double> gamma_grid);

struct SubexpOptions {
    std::size_t random_directions = 64;
    std::size_t c_grid_points = 50;
    double c_min = 1e-2;
    double c_max = 1e2;
    std::size_t tail_grid_points = 40;
    std::size_t min_tail_count = 100;
    std::uint64_t seed = 0;
};

struct SubexpEstimate {
    double c = 0.0;              // +infinity when no grid value works
    bool heavy_tail = false;     // binding constraint sits at the deepest tail threshold
    double required = 0.0;       // smallest C satisfying the tail checks before gridding
};

/// Smallest C on a log grid with P(|<v,x>| >= t) <= exp(-t/C) for the
/// coordinate axes plus random unit directions and for thresholds at
/// empirical tail probabilities in [min_tail_count/n, 0.9].
SubexpEstimate estimate_subexp_norm(const Dataset& samples, const SubexpOptions& options = {});

// Sample export. CSV columns are x1..xd,y; the binary layout is
// "AGNS" | u32 version | u64 d | u64 n | f64[n*d] | i8[n].
void write_samples_csv(const Dataset& data, const std::filesystem::path& path,
                       std::string_view header_comment = {});
Dataset read_samples_csv(const std::filesystem::path& path);
void write_samples_binary(const Dataset& data, const std::filesystem::path& path);
Dataset read_samples_binary(const std::filesystem::path& path);

}  // namespace agn
