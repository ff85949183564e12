#pragma once

namespace qlw {

/// Standard normal quantile z_p; throws InvalidLevel unless 0 < p < 1.
double normal_quantile(double p);

double normal_cdf(double x);

}  // namespace qlw
