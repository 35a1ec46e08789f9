#pragma once

namespace covsteer {

// Standard normal CDF, 0.5 erfc(-z / sqrt 2).
double norm_cdf(double z);

// Standard normal quantile. Acklam's rational approximation followed by one
// Halley step against norm_cdf; throws DomainError outside (0, 1).
double inv_norm_cdf(double p);

}  // namespace covsteer
