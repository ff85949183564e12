#include "qlw/welfare.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "qlw/errors.hpp"
#include "qlw/rng.hpp"

namespace qlw::welfare {
namespace {

// theta log(1 + c/theta); 0 when c == 0 and the theta -> 0 limit (0) when
// c/theta overflows.
double loss_term(double theta, double c) {
    if (c == 0.0) return 0.0;
    const double ratio = c / theta;
    if (!std::isfinite(ratio)) return 0.0;
    return theta * std::log1p(ratio);
}

struct Bounds {
    std::vector<double> lo;
    std::vector<double> hi;
};

Bounds effective_box(const ConstraintSet& constraints, std::size_t goods) {
    if (constraints.box.size() != goods) {
        throw Error(ErrorKind::InvalidSample, "box has " + std::to_string(constraints.box.size()) +
                                                  " intervals but the query has " + std::to_string(goods) + " goods");
    }
    if (!(constraints.positivity_floor > 0.0)) {
        throw Error(ErrorKind::InvalidTheta, "positivity floor must be > 0");
    }
    Bounds out;
    out.lo.resize(goods);
    out.hi.resize(goods);
    for (std::size_t k = 0; k < goods; ++k) {
        const Interval& iv = constraints.box[k];
        if (iv.empty) throw Error(ErrorKind::EmptyConfidenceSet, "confidence interval for good " + std::to_string(k) + " is empty");
        out.lo[k] = std::max(iv.lower, constraints.positivity_floor);
        out.hi[k] = iv.upper;
        if (!(out.hi[k] >= out.lo[k]) || !std::isfinite(out.hi[k])) {
            throw Error(ErrorKind::EmptyConfidenceSet,
                        "interval for good " + std::to_string(k) + " has no finite point above the positivity floor");
        }
    }
    return out;
}

double total_loss(std::span<const double> theta, std::span<const double> c) {
    double total = 0.0;
    for (std::size_t k = 0; k < theta.size(); ++k) total += loss_term(theta[k], c[k]);
    return total;
}

// Solves marginal_loss(theta, c) = lambda on [lo, hi], clipping to the ends.
double invert_marginal(double lambda, double c, double lo, double hi) {
    if (marginal_loss(lo, c) <= lambda) return lo;
    if (marginal_loss(hi, c) >= lambda) return hi;
    double a = lo, b = hi;
    for (int it = 0; it < 200; ++it) {
        // Geometric midpoint while the bracket spans orders of magnitude.
        const double mid = (b > 4.0 * a) ? std::sqrt(a * b) : 0.5 * (a + b);
        if (mid <= a || mid >= b) break;
        (marginal_loss(mid, c) > lambda ? a : b) = mid;
    }
    return 0.5 * (a + b);
}

struct MaxSolution {
    std::vector<double> theta;
    double lambda = 0.0;
};

MaxSolution maximize_on_slice(const Bounds& box, std::span<const double> c, double sum_to) {
    const std::size_t goods = c.size();
    MaxSolution out;
    out.theta = box.lo;

    double zero_lo = 0.0, pos_hi = 0.0;
    for (std::size_t k = 0; k < goods; ++k) {
        if (c[k] == 0.0) {
            zero_lo += box.lo[k];
        } else {
            pos_hi += box.hi[k];
        }
    }
    // Goods with c == 0 do not move the objective; they only absorb whatever
    // mass the increasing part cannot take.
    const double pos_target = std::min(sum_to - zero_lo, pos_hi);

    if (pos_target >= pos_hi) {
        for (std::size_t k = 0; k < goods; ++k) {
            if (c[k] != 0.0) out.theta[k] = box.hi[k];
        }
        out.lambda = 0.0;
    } else {
        double lam_lo = 0.0;
        double lam_hi = 0.0;
        for (std::size_t k = 0; k < goods; ++k) {
            if (c[k] != 0.0) lam_hi = std::max(lam_hi, marginal_loss(box.lo[k], c[k]));
        }
        auto positive_sum = [&](double lambda) {
            double total = 0.0;
            for (std::size_t k = 0; k < goods; ++k) {
                if (c[k] != 0.0) total += invert_marginal(lambda, c[k], box.lo[k], box.hi[k]);
            }
            return total;
        };
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lam_lo + lam_hi);
            if (mid <= lam_lo || mid >= lam_hi) break;
            (positive_sum(mid) > pos_target ? lam_lo : lam_hi) = mid;
        }
        out.lambda = 0.5 * (lam_lo + lam_hi);
        double total = 0.0;
        for (std::size_t k = 0; k < goods; ++k) {
            if (c[k] != 0.0) {
                out.theta[k] = invert_marginal(out.lambda, c[k], box.lo[k], box.hi[k]);
                total += out.theta[k];
            }
        }
        // Put the last rounding error of the sum on the interior good with
        // the most room to move.
        double residual = pos_target - total;
        std::size_t best = goods;
        double best_room = -1.0;
        for (std::size_t k = 0; k < goods; ++k) {
            if (c[k] == 0.0) continue;
            const double room = residual > 0.0 ? box.hi[k] - out.theta[k] : out.theta[k] - box.lo[k];
            if (room > best_room) {
                best_room = room;
                best = k;
            }
        }
        if (best < goods) out.theta[best] = std::clamp(out.theta[best] + residual, box.lo[best], box.hi[best]);
    }

    double remaining = sum_to;
    for (std::size_t k = 0; k < goods; ++k) {
        if (c[k] != 0.0) remaining -= out.theta[k];
    }
    remaining -= zero_lo;
    for (std::size_t k = 0; k < goods && remaining > 0.0; ++k) {
        if (c[k] != 0.0) continue;
        const double add = std::min(remaining, box.hi[k] - box.lo[k]);
        out.theta[k] += add;
        remaining -= add;
    }
    return out;
}

double kkt_residual(const MaxSolution& sol, const Bounds& box, std::span<const double> c, double sum_to) {
    double worst = std::abs(std::accumulate(sol.theta.begin(), sol.theta.end(), 0.0) - sum_to);
    for (std::size_t k = 0; k < c.size(); ++k) {
        const double g = marginal_loss(sol.theta[k], c[k]);
        const bool at_lo = sol.theta[k] <= box.lo[k];
        const bool at_hi = sol.theta[k] >= box.hi[k];
        double violation;
        if (at_lo && at_hi) {
            violation = 0.0;
        } else if (at_lo) {
            violation = std::max(0.0, g - sol.lambda);
        } else if (at_hi) {
            violation = std::max(0.0, sol.lambda - g);
        } else {
            violation = std::abs(g - sol.lambda);
        }
        worst = std::max(worst, violation);
    }
    return worst;
}

struct MinSolution {
    std::vector<double> theta;
    double value = 0.0;
    bool certified = true;
};

// Every vertex of {lo <= theta <= hi, sum theta = s} has at most one
// coordinate strictly inside its bounds. Walks the 2^(K-1) corner patterns of
// the other coordinates in Gray-code order, so each step costs O(1).
MinSolution minimize_by_vertices(const Bounds& box, std::span<const double> c, double sum_to) {
    const std::size_t goods = c.size();
    MinSolution best;
    best.value = std::numeric_limits<double>::infinity();
    const double slack = 1e-12 * std::max(1.0, std::abs(sum_to));

    for (std::size_t free = 0; free < goods; ++free) {
        std::vector<std::size_t> others;
        for (std::size_t k = 0; k < goods; ++k) {
            if (k != free) others.push_back(k);
        }
        std::vector<bool> at_hi(goods, false);
        double fixed_sum = 0.0, fixed_loss = 0.0;
        for (std::size_t k : others) {
            fixed_sum += box.lo[k];
            fixed_loss += loss_term(box.lo[k], c[k]);
        }
        const std::uint64_t patterns = std::uint64_t{1} << others.size();
        for (std::uint64_t step = 0; step < patterns; ++step) {
            if (step > 0) {
                const auto bit = static_cast<std::size_t>(std::countr_zero(step));
                const std::size_t k = others[bit];
                const double from = at_hi[k] ? box.hi[k] : box.lo[k];
                at_hi[k] = !at_hi[k];
                const double to = at_hi[k] ? box.hi[k] : box.lo[k];
                fixed_sum += to - from;
                fixed_loss += loss_term(to, c[k]) - loss_term(from, c[k]);
            }
            const double value_free = sum_to - fixed_sum;
            if (value_free < box.lo[free] - slack || value_free > box.hi[free] + slack) continue;
            const double clamped = std::clamp(value_free, box.lo[free], box.hi[free]);
            const double value = fixed_loss + loss_term(clamped, c[free]);
            if (value < best.value) {
                best.value = value;
                best.theta.assign(goods, 0.0);
                for (std::size_t k : others) best.theta[k] = at_hi[k] ? box.hi[k] : box.lo[k];
                best.theta[free] = clamped;
            }
        }
    }
    // Gray-code drift in fixed_loss is harmless for the argmin; report the
    // value recomputed from scratch.
    best.value = total_loss(best.theta, c);
    return best;
}

// Multi-start pairwise-exchange descent. Along e_i - e_j the objective is
// concave, so each exchange jumps to whichever end of the segment is lower.
MinSolution minimize_by_local_search(const Bounds& box, std::span<const double> c, double sum_to) {
    const std::size_t goods = c.size();
    MinSolution best;
    best.value = std::numeric_limits<double>::infinity();
    best.certified = false;
    constexpr int kStarts = 32;
    Philox rng(0x6d696e5f7365ULL);

    std::vector<std::size_t> order(goods);
    for (int start = 0; start < kStarts; ++start) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        if (start == 1) {
            std::sort(order.begin(), order.end(), [&](auto a, auto b) { return c[a] < c[b]; });
        } else if (start > 1) {
            shuffle(std::span<std::size_t>(order), rng);
        }
        std::vector<double> theta = box.lo;
        double remaining = sum_to - std::accumulate(box.lo.begin(), box.lo.end(), 0.0);
        for (std::size_t k : order) {
            const double add = std::clamp(remaining, 0.0, box.hi[k] - box.lo[k]);
            theta[k] += add;
            remaining -= add;
        }

        bool improved = true;
        while (improved) {
            improved = false;
            for (std::size_t i = 0; i < goods; ++i) {
                for (std::size_t j = 0; j < goods; ++j) {
                    if (i == j) continue;
                    // Move t from i to j, t in [-t_back, t_fwd].
                    const double t_fwd = std::min(theta[i] - box.lo[i], box.hi[j] - theta[j]);
                    const double t_back = std::min(box.hi[i] - theta[i], theta[j] - box.lo[j]);
                    const double now = loss_term(theta[i], c[i]) + loss_term(theta[j], c[j]);
                    const double fwd = loss_term(theta[i] - t_fwd, c[i]) + loss_term(theta[j] + t_fwd, c[j]);
                    const double back = loss_term(theta[i] + t_back, c[i]) + loss_term(theta[j] - t_back, c[j]);
                    const double target = std::min(fwd, back);
                    if (target < now - 1e-14 * std::max(1.0, now)) {
                        const double t = fwd <= back ? t_fwd : -t_back;
                        theta[i] -= t;
                        theta[j] += t;
                        improved = true;
                    }
                }
            }
        }
        const double value = total_loss(theta, c);
        if (value < best.value) {
            best.value = value;
            best.theta = theta;
        }
    }
    return best;
}

}  // namespace

void WelfareQuery::validate() const {
    if (delta.size() != y_star.size()) {
        throw Error(ErrorKind::InvalidSample, "delta and y_star lengths differ");
    }
    if (delta.empty()) throw Error(ErrorKind::InvalidSample, "query has no goods");
    for (std::size_t k = 0; k < delta.size(); ++k) {
        if (!std::isfinite(delta[k])) throw Error(ErrorKind::InvalidSample, "non-finite price change");
        if (delta[k] < 0.0) {
            throw Error(ErrorKind::NegativePriceChange,
                        "price change for good " + std::to_string(k) + " is negative; only increases are supported");
        }
        if (!(std::isfinite(y_star[k]) && y_star[k] > 0.0)) {
            throw Error(ErrorKind::InvalidSample, "reference consumption must be positive for good " + std::to_string(k));
        }
    }
}

std::vector<double> WelfareQuery::scaled_changes() const {
    std::vector<double> c(delta.size());
    for (std::size_t k = 0; k < c.size(); ++k) c[k] = delta[k] * y_star[k];
    return c;
}

double ConstraintSet::joint_level() const {
    double miss = 0.0;
    for (const auto& iv : box) miss += 1.0 - iv.level;
    return 1.0 - miss;
}

double welfare_loss(std::span<const double> theta, const WelfareQuery& query) {
    query.validate();
    if (theta.size() != query.delta.size()) {
        throw Error(ErrorKind::InvalidSample, "theta has " + std::to_string(theta.size()) + " entries, query has " +
                                                  std::to_string(query.delta.size()));
    }
    double total = 0.0;
    for (std::size_t k = 0; k < theta.size(); ++k) {
        if (!(theta[k] > 0.0) || !std::isfinite(theta[k])) {
            throw Error(ErrorKind::InvalidTheta, "theta_" + std::to_string(k) + " must be positive and finite");
        }
        total += loss_term(theta[k], query.delta[k] * query.y_star[k]);
    }
    return total;
}

double kl_div(double x, double y) {
    return x * std::log(x / y) - x + y;
}

double marginal_loss(double theta, double c) {
    if (c == 0.0) return 0.0;
    return std::log1p(c / theta) - c / (c + theta);
}

double marginal_loss_slope(double theta, double c) {
    const double s = c + theta;
    return -c * c / (theta * s * s);
}

WelfareBounds bounds_box(const ConstraintSet& constraints, const WelfareQuery& query) {
    query.validate();
    const std::vector<double> c = query.scaled_changes();
    const Bounds box = effective_box(constraints, c.size());

    WelfareBounds out;
    out.level = constraints.joint_level();
    out.argmax_theta = box.hi;
    out.argmin_theta = box.lo;
    out.wl_max = total_loss(box.hi, c);
    out.wl_min = total_loss(box.lo, c);
    out.gamma.resize(c.size());
    for (std::size_t k = 0; k < c.size(); ++k) out.gamma[k] = out.argmax_theta[k] + c[k];
    return out;
}

WelfareBounds max_constrained(const ConstraintSet& constraints, const WelfareQuery& query) {
    if (!constraints.sum_to) return bounds_box(constraints, query);
    query.validate();
    const std::vector<double> c = query.scaled_changes();
    const Bounds box = effective_box(constraints, c.size());
    const double sum_to = *constraints.sum_to;

    const double sum_lo = std::accumulate(box.lo.begin(), box.lo.end(), 0.0);
    const double sum_hi = std::accumulate(box.hi.begin(), box.hi.end(), 0.0);
    const double slack = 1e-12 * std::max(1.0, std::abs(sum_to));
    if (!std::isfinite(sum_to) || sum_to < sum_lo - slack || sum_to > sum_hi + slack) {
        throw Error(ErrorKind::InfeasibleConstraint, "sum constraint " + std::to_string(sum_to) +
                                                         " is outside [" + std::to_string(sum_lo) + ", " +
                                                         std::to_string(sum_hi) + "]");
    }
    const double target = std::clamp(sum_to, sum_lo, sum_hi);

    const MaxSolution max = maximize_on_slice(box, c, target);
    const MinSolution min = c.size() <= kMaxEnumeratedGoods ? minimize_by_vertices(box, c, target)
                                                            : minimize_by_local_search(box, c, target);

    WelfareBounds out;
    out.level = constraints.joint_level();
    out.argmax_theta = max.theta;
    out.argmin_theta = min.theta;
    out.wl_max = total_loss(max.theta, c);
    out.wl_min = min.value;
    out.kkt_residual = kkt_residual(max, box, c, target);
    out.min_certified = min.certified;
    out.gamma.resize(c.size());
    for (std::size_t k = 0; k < c.size(); ++k) out.gamma[k] = out.argmax_theta[k] + c[k];
    return out;
}

WelfareBounds bounds(const ConstraintSet& constraints, const WelfareQuery& query) {
    return constraints.sum_to ? max_constrained(constraints, query) : bounds_box(constraints, query);
}

}  // namespace qlw::welfare
