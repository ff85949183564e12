#include "qlw/normal.hpp"

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <string>

#include "qlw/errors.hpp"

namespace qlw {

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw Error(ErrorKind::InvalidLevel, "normal quantile needs p in (0,1), got " + std::to_string(p));
    }
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

}  // namespace qlw
