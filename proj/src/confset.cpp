#include "qlw/confset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qlw/errors.hpp"
#include "qlw/parallel.hpp"
#include "qlw/rng.hpp"
#include "qlw/xicor.hpp"

namespace qlw::confset {
namespace {

constexpr std::uint64_t kSmoothStream = 0x6a6974746572ULL;

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw Error(ErrorKind::InvalidLevel, "alpha must lie in (0,1), got " + std::to_string(alpha));
    }
}

// sqrt(n) * xi_n(P - theta/Y, Z) at every theta; fills profile and returns
// the hull of the accepted thetas.
XiConfidenceSet invert(const GoodSample& sample, double alpha, std::vector<double> thetas, std::uint64_t rng_seed,
                       unsigned threads) {
    sample.validate();
    check_alpha(alpha);
    const xicor::ResponseRanks response(sample.independence_variable());
    const std::size_t n = sample.size();

    XiConfidenceSet out;
    XiProfile& profile = out.profile;
    profile.critical = xicor::critical_value(alpha);
    profile.thetas = std::move(thetas);
    profile.stats.assign(profile.thetas.size(), 0.0);

    parallel_for(profile.thetas.size(), threads, [&](std::size_t j) {
        thread_local std::vector<double> residual;
        residual.resize(n);
        const double theta = profile.thetas[j];
        for (std::size_t i = 0; i < n; ++i) residual[i] = sample.price[i] - theta / sample.quantity[i];
        profile.stats[j] = response.evaluate(residual, mix_seed(rng_seed, j)).normalized;
    });

    double lower = std::numeric_limits<double>::infinity();
    double upper = -std::numeric_limits<double>::infinity();
    bool previous_accepted = false;
    for (std::size_t j = 0; j < profile.thetas.size(); ++j) {
        const bool accepted = profile.stats[j] <= profile.critical;
        if (accepted) {
            lower = std::min(lower, profile.thetas[j]);
            upper = std::max(upper, profile.thetas[j]);
            if (!previous_accepted) ++profile.accepted_segments;
        }
        previous_accepted = accepted;
    }
    out.interval = profile.accepted_segments == 0 ? Interval::make_empty(1.0 - alpha, IntervalSource::Xi)
                                                  : Interval::make(lower, upper, 1.0 - alpha, IntervalSource::Xi);
    return out;
}

std::vector<double> grid_nodes(const GridSpec& grid) {
    grid.validate();
    std::vector<double> thetas(grid.nodes);
    for (std::size_t j = 0; j < grid.nodes; ++j) thetas[j] = grid.node(j);
    return thetas;
}

}  // namespace

void GridSpec::validate() const {
    if (nodes < 2) throw Error(ErrorKind::InvalidGrid, "grid needs at least 2 nodes");
    if (!(std::isfinite(lo) && std::isfinite(hi))) throw Error(ErrorKind::InvalidGrid, "grid bounds must be finite");
    if (lo < 0.0) throw Error(ErrorKind::InvalidGrid, "grid lower bound must be >= 0");
    if (!(hi > lo)) {
        throw Error(ErrorKind::InvalidGrid, "grid upper bound " + std::to_string(hi) + " must exceed lower bound " +
                                                std::to_string(lo));
    }
}

double GridSpec::node(std::size_t j) const noexcept {
    if (j + 1 == nodes) return hi;
    return lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(nodes - 1);
}

XiConfidenceSet cs_xi(const GoodSample& sample, double alpha, const GridSpec& grid, std::uint64_t rng_seed,
                      const GridOptions& options) {
    return invert(sample, alpha, grid_nodes(grid), rng_seed, options.threads);
}

double xi_statistic(const GoodSample& sample, double theta, std::uint64_t rng_seed) {
    sample.validate();
    const xicor::ResponseRanks response(sample.independence_variable());
    std::vector<double> residual(sample.size());
    for (std::size_t i = 0; i < residual.size(); ++i) residual[i] = sample.price[i] - theta / sample.quantity[i];
    return response.evaluate(residual, rng_seed).normalized;
}

Interval intersect(const Interval& a, const Interval& b) {
    const double level = 1.0 - (1.0 - a.level) - (1.0 - b.level);
    if (a.empty || b.empty) return Interval::make_empty(level, IntervalSource::Intersect);
    return Interval::make(std::max(a.lower, b.lower), std::min(a.upper, b.upper), level, IntervalSource::Intersect);
}

std::string_view to_string(CombineMode mode) {
    switch (mode) {
        case CombineMode::XiOnly: return "xi";
        case CombineMode::LsOnly: return "ls";
        case CombineMode::Intersect: return "intersect";
    }
    return "unknown";
}

Interval cs_combined(const GoodSample& sample, double alpha_share, CombineMode mode, std::uint64_t rng_seed,
                     const CombinedOptions& options) {
    check_alpha(alpha_share);
    sample.validate();
    GoodSample jittered;
    if (options.jitter_half_width > 0.0) {
        jittered = sample;
        jittered.instrument =
            smooth_instrument(sample.independence_variable(), options.jitter_half_width, rng_seed);
    }
    const GoodSample& xi_sample = options.jitter_half_width > 0.0 ? jittered : sample;

    switch (mode) {
        case CombineMode::XiOnly: {
            const GridSpec grid{options.xi_grid_lo, options.xi_grid_hi, options.grid_nodes};
            return cs_xi(xi_sample, alpha_share, grid, rng_seed, {options.threads}).interval;
        }
        case CombineMode::LsOnly:
            return regress::theta_interval_delta(regress::fit_inverse_demand(sample, options.ls_mode),
                                                 1.0 - alpha_share);
        case CombineMode::Intersect:
            break;
    }

    const double half = alpha_share / 2.0;
    const Interval ls =
        regress::theta_interval_delta(regress::fit_inverse_demand(sample, options.ls_mode), 1.0 - half);
    const double lo = std::max(ls.lower, options.positivity_floor);
    const double hi = std::isfinite(ls.upper) ? ls.upper : std::max(options.xi_grid_hi, lo);
    if (lo > hi) return intersect(Interval::make_empty(1.0 - half, IntervalSource::Xi), ls);

    std::vector<double> thetas;
    if (lo == hi) {
        thetas.push_back(lo);
    } else {
        thetas = grid_nodes(GridSpec{lo, hi, options.grid_nodes});
    }
    const Interval xi = invert(xi_sample, half, std::move(thetas), rng_seed, options.threads).interval;
    return intersect(xi, ls);
}

double bonferroni_share(double alpha, std::size_t goods, bool intersecting) {
    check_alpha(alpha);
    if (goods == 0) throw Error(ErrorKind::ConfigError, "number of goods must be >= 1");
    const double per_good = alpha / static_cast<double>(goods);
    return intersecting ? per_good / 2.0 : per_good;
}

std::string_view to_string(ShapeCase shape) {
    switch (shape) {
        case ShapeCase::BoundedAB: return "BOUNDED_AB";
        case ShapeCase::UnboundedAbove: return "UNBOUNDED_ABOVE";
        case ShapeCase::ContainsZero: return "CONTAINS_ZERO";
        case ShapeCase::WholeSpace: return "WHOLE_SPACE";
    }
    return "UNKNOWN";
}

ShapeCase classify_shape(double stat_at_zero, double stat_at_inf, double critical) {
    const bool bounded_below = stat_at_zero > critical;
    const bool bounded_above = stat_at_inf > critical;
    if (bounded_below && bounded_above) return ShapeCase::BoundedAB;
    if (bounded_below) return ShapeCase::UnboundedAbove;
    if (bounded_above) return ShapeCase::ContainsZero;
    return ShapeCase::WholeSpace;
}

ShapeDiagnostic shape_diagnostic(const GoodSample& sample, double alpha, std::uint64_t rng_seed) {
    sample.validate();
    const xicor::ResponseRanks response(sample.independence_variable());
    ShapeDiagnostic out;
    out.critical = xicor::critical_value(alpha);
    out.stat_at_zero = response.evaluate(sample.price, mix_seed(rng_seed, 0)).normalized;
    out.stat_at_inf = response.evaluate(sample.quantity, mix_seed(rng_seed, 1)).normalized;
    out.case_id = classify_shape(out.stat_at_zero, out.stat_at_inf, out.critical);
    return out;
}

std::vector<double> smooth_instrument(std::span<const double> z, double half_width, std::uint64_t rng_seed) {
    if (!(half_width >= 0.0) || !std::isfinite(half_width)) {
        throw Error(ErrorKind::ConfigError, "jitter half-width must be finite and >= 0");
    }
    std::vector<double> out(z.begin(), z.end());
    if (half_width == 0.0) return out;
    Philox rng(rng_seed, kSmoothStream);
    for (double& v : out) v += rng.uniform(-half_width, half_width);
    return out;
}

}  // namespace qlw::confset
