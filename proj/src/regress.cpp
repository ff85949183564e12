#include "qlw/regress.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "qlw/errors.hpp"
#include "qlw/normal.hpp"

namespace qlw::regress {
namespace {

double mean(std::span<const double> v) {
    double total = 0.0;
    for (double x : v) total += x;
    return total / static_cast<double>(v.size());
}

}  // namespace

std::string_view to_string(FitMode mode) {
    return mode == FitMode::Ols ? "ols" : "tsls";
}

LsFit fit_inverse_demand(const GoodSample& sample, FitMode mode) {
    sample.validate();
    if (mode == FitMode::Tsls && !sample.has_instrument()) {
        throw Error(ErrorKind::SchemaError, "2SLS needs an 'instrument' column for good '" + sample.good_id + "'");
    }
    const std::size_t n = sample.size();
    const std::span<const double> price = sample.price;
    const std::span<const double> z = mode == FitMode::Tsls ? std::span<const double>(*sample.instrument) : price;

    std::vector<double> inverse_q(n);
    for (std::size_t i = 0; i < n; ++i) inverse_q[i] = 1.0 / sample.quantity[i];

    const double p_bar = mean(price);
    const double z_bar = mean(z);
    const double y_bar = mean(inverse_q);

    double szp = 0.0, szy = 0.0, szz = 0.0, spp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dz = z[i] - z_bar;
        const double dp = price[i] - p_bar;
        szp += dz * dp;
        szy += dz * (inverse_q[i] - y_bar);
        szz += dz * dz;
        spp += dp * dp;
    }
    if (spp == 0.0) {
        throw Error(ErrorKind::SingularDesign, "price is constant for good '" + sample.good_id + "'");
    }
    if (szz == 0.0) {
        throw Error(ErrorKind::SingularDesign, "instrument is constant for good '" + sample.good_id + "'");
    }

    LsFit fit;
    fit.n = n;
    fit.mode = mode;
    if (mode == FitMode::Tsls) fit.first_stage_slope = szp / szz;
    if (szp == 0.0) {
        fit.weak_first_stage = true;
        fit.beta_hat = std::numeric_limits<double>::quiet_NaN();
        fit.intercept_hat = std::numeric_limits<double>::quiet_NaN();
        fit.se_beta = std::numeric_limits<double>::infinity();
        return fit;
    }

    // Just-identified IV; with z == price this is OLS.
    fit.beta_hat = szy / szp;
    fit.intercept_hat = y_bar - fit.beta_hat * p_bar;

    double meat = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = inverse_q[i] - fit.intercept_hat - fit.beta_hat * price[i];
        const double dz = z[i] - z_bar;
        meat += dz * dz * u * u;
    }
    const double dof = static_cast<double>(n) / static_cast<double>(n - 2);
    fit.se_beta = std::sqrt(dof * meat) / std::abs(szp);
    return fit;
}

Interval theta_interval_delta(const LsFit& fit, double level) {
    if (!(level > 0.0 && level < 1.0)) {
        throw Error(ErrorKind::InvalidLevel, "level must lie in (0,1), got " + std::to_string(level));
    }
    if (fit.weak_first_stage) {
        return Interval::make(0.0, std::numeric_limits<double>::infinity(), level, IntervalSource::LeastSquares);
    }
    if (!(fit.beta_hat > 0.0)) {
        throw Error(ErrorKind::NonpositiveSlope,
                    "inverse-demand slope " + std::to_string(fit.beta_hat) + " implies a nonpositive theta");
    }
    const double theta = 1.0 / fit.beta_hat;
    const double se_theta = fit.se_beta / (fit.beta_hat * fit.beta_hat);
    const double z = normal_quantile(1.0 - (1.0 - level) / 2.0);
    const double half = z * se_theta;
    return Interval::make(std::max(0.0, theta - half), theta + half, level, IntervalSource::LeastSquares);
}

}  // namespace qlw::regress
