#pragma once

// Least-squares estimation of the inverse demand 1/Y = a + beta * P + e,
// where beta = 1 / theta, and a delta-method interval for theta.

#include <cstddef>
#include <string_view>

#include "qlw/sample.hpp"

namespace qlw::regress {

enum class FitMode { Ols, Tsls };

std::string_view to_string(FitMode mode);

struct LsFit {
    double beta_hat = 0.0;
    double intercept_hat = 0.0;
    double se_beta = 0.0;  // HC1 sandwich
    std::size_t n = 0;
    FitMode mode = FitMode::Ols;
    /// Set when the instrument is exactly uncorrelated with price; beta is
    /// then unidentified (NaN) and the LS interval is the whole half-line.
    bool weak_first_stage = false;
    double first_stage_slope = 0.0;  // TSLS only: slope of P on Z
};

/// Regresses 1/Y on P with an intercept. TSLS instruments P with Z and needs
/// sample.instrument. Throws SingularDesign when the regressor (or the
/// instrument) is constant, SchemaError when TSLS lacks an instrument.
LsFit fit_inverse_demand(const GoodSample& sample, FitMode mode);

/// theta_hat = 1/beta_hat, se = se_beta / beta_hat^2, two-sided normal
/// interval clipped below at 0. Throws NonpositiveSlope for beta_hat <= 0 and
/// InvalidLevel unless 0 < level < 1.
Interval theta_interval_delta(const LsFit& fit, double level);

}  // namespace qlw::regress
