#pragma once

// Individual welfare loss from a price increase under quasilinear log utility,
//   WL(theta) = sum_k theta_k log(1 + delta_k y*_k / theta_k),
// and its extremes over a confidence box, optionally cut by sum(theta) = s.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "qlw/sample.hpp"

namespace qlw::welfare {

struct WelfareQuery {
    std::vector<double> delta;   // price increases, >= 0
    std::vector<double> y_star;  // reference consumption, > 0
    double alpha = 0.1;

    /// Throws NegativePriceChange for delta_k < 0 and InvalidSample for
    /// length mismatches or nonpositive y*.
    void validate() const;
    /// c_k = delta_k * y*_k.
    std::vector<double> scaled_changes() const;
};

struct ConstraintSet {
    std::vector<Interval> box;
    std::optional<double> sum_to;
    double positivity_floor = 1e-6;

    /// Joint level of the box by the union bound: 1 - sum_k (1 - level_k).
    double joint_level() const;
};

struct WelfareBounds {
    double wl_min = 0.0;
    double wl_max = 0.0;
    double level = 0.0;
    std::vector<double> argmax_theta;
    std::vector<double> argmin_theta;
    std::vector<double> gamma;  // argmax_theta_k + delta_k y*_k
    /// Max violation of the KKT conditions at argmax (0 for box problems).
    double kkt_residual = 0.0;
    /// False when wl_min came from local search rather than exhaustive
    /// vertex enumeration.
    bool min_certified = true;
};

double welfare_loss(std::span<const double> theta, const WelfareQuery& query);

/// x log(x/y) - x + y, for x, y > 0.
double kl_div(double x, double y);

/// d/dtheta [theta log(1 + c/theta)] = log(1 + c/theta) - c/(c + theta).
double marginal_loss(double theta, double c);
/// -c^2 / (theta (c + theta)^2).
double marginal_loss_slope(double theta, double c);

/// Box without a sum constraint: by strict monotonicity in each theta_k the
/// extremes sit at the upper and lower corners. Lowers below the positivity
/// floor are raised to it. Throws EmptyConfidenceSet on an empty interval.
WelfareBounds bounds_box(const ConstraintSet& constraints, const WelfareQuery& query);

/// Box plus sum(theta) = sum_to. The max solves the separable concave
/// program by bisection on the multiplier of the sum constraint; the min is
/// attained at a vertex of the polytope (enumerated for K <= 20, local search
/// beyond). Throws InfeasibleConstraint when sum_to lies outside
/// [sum lowers, sum uppers].
WelfareBounds max_constrained(const ConstraintSet& constraints, const WelfareQuery& query);

/// Dispatches on constraints.sum_to.
WelfareBounds bounds(const ConstraintSet& constraints, const WelfareQuery& query);

inline constexpr std::size_t kMaxEnumeratedGoods = 20;

}  // namespace qlw::welfare
