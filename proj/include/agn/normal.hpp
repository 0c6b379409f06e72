#pragma once

namespace agn {

/// Standard normal CDF, evaluated through erfc for accuracy in both tails.
double normal_cdf(double x);

/// Standard normal density.
double normal_pdf(double x);

/// Inverse standard normal CDF. Acklam's rational approximation
/// (relative error < 1.2e-9) followed by one Halley correction step against
/// normal_cdf, which brings the result to near machine precision.
/// Throws InvalidArgument unless 0 < p < 1.
double normal_quantile(double p);

}  // namespace agn
