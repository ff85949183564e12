#pragma once

// Confidence sets for theta_k: inversion of sqrt(n) * xi_n(P - theta/Y, Z)
// over a grid, least-squares intervals, their Bonferroni intersection, and
// the boundary diagnostics that predict the shape of the inverted set.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "qlw/regress.hpp"
#include "qlw/sample.hpp"

namespace qlw::confset {

inline constexpr double kPositivityFloor = 1e-6;
inline constexpr std::size_t kSimulationGridNodes = 1000;
inline constexpr std::size_t kEmpiricalGridNodes = 5000;

/// Equally spaced nodes lo, ..., hi (both included).
struct GridSpec {
    double lo = kPositivityFloor;
    double hi = 1.0;
    std::size_t nodes = kSimulationGridNodes;

    /// Throws InvalidGrid unless nodes >= 2, lo >= 0 and lo < hi (finite).
    void validate() const;
    double node(std::size_t j) const noexcept;
};

struct XiProfile {
    std::vector<double> thetas;
    std::vector<double> stats;  // sqrt(n) * xi_n(P - theta/Y, Z)
    double critical = 0.0;
    /// Number of maximal runs of accepted nodes; > 1 means the accepted set
    /// is disconnected on the grid and the reported hull fills the gaps.
    std::size_t accepted_segments = 0;
};

struct XiConfidenceSet {
    Interval interval;
    XiProfile profile;
};

/// Options shared by the grid routines.
struct GridOptions {
    unsigned threads = 1;  // 0 = all hardware threads
};

/// Test inversion: accepts grid node theta when
/// sqrt(n) * xi_n(P - theta/Y, Z) <= sqrt(0.4) z_{1-alpha}, and reports the
/// hull [min, max] of accepted nodes at level 1 - alpha (source Xi). Z is the
/// instrument, or the price itself when the sample has none. No accepted node
/// gives an interval with `empty` set. Node j draws its tie-breaking stream
/// from (rng_seed, j), so results do not depend on the thread count.
XiConfidenceSet cs_xi(const GoodSample& sample, double alpha, const GridSpec& grid, std::uint64_t rng_seed,
                      const GridOptions& options = {});

/// sqrt(n) * xi_n(P - theta/Y, Z) at one theta; theta lies in the inverted
/// set at level 1 - alpha iff this is <= xicor::critical_value(alpha).
double xi_statistic(const GoodSample& sample, double theta, std::uint64_t rng_seed);

/// [max lowers, min uppers] at level 1 - (1 - a.level) - (1 - b.level).
Interval intersect(const Interval& a, const Interval& b);

enum class CombineMode { XiOnly, LsOnly, Intersect };

std::string_view to_string(CombineMode mode);

struct CombinedOptions {
    std::size_t grid_nodes = kEmpiricalGridNodes;
    /// Grid for XiOnly, and the cap used in Intersect mode when the LS
    /// interval is unbounded above.
    double xi_grid_lo = kPositivityFloor;
    double xi_grid_hi = 6.0;
    double positivity_floor = kPositivityFloor;
    /// OLS or TSLS for the LS interval; TSLS requires an instrument.
    regress::FitMode ls_mode = regress::FitMode::Ols;
    /// > 0: the xi part sees the instrument plus U[-h, h] noise (seeded from
    /// rng_seed); the LS part keeps the original instrument.
    double jitter_half_width = 0.0;
    unsigned threads = 1;
};

/// Confidence interval for theta at level 1 - alpha_share:
///  XiOnly    - cs_xi over [xi_grid_lo, xi_grid_hi];
///  LsOnly    - delta-method interval;
///  Intersect - each piece at 1 - alpha_share/2, the xi grid laid over the LS
///              interval clipped below at the positivity floor.
/// An empty result is reported through Interval::empty.
Interval cs_combined(const GoodSample& sample, double alpha_share, CombineMode mode, std::uint64_t rng_seed,
                     const CombinedOptions& options = {});

/// alpha / K per good, halved again when each good intersects two sets.
double bonferroni_share(double alpha, std::size_t goods, bool intersecting);

enum class ShapeCase { BoundedAB, UnboundedAbove, ContainsZero, WholeSpace };

std::string_view to_string(ShapeCase shape);

struct ShapeDiagnostic {
    double stat_at_zero = 0.0;  // sqrt(n) * xi_n(P, Z)
    double stat_at_inf = 0.0;   // sqrt(n) * xi_n(Y, Z)
    double critical = 0.0;
    ShapeCase case_id = ShapeCase::WholeSpace;
};

/// Classifies a pair of boundary statistics against the critical value.
ShapeCase classify_shape(double stat_at_zero, double stat_at_inf, double critical);

ShapeDiagnostic shape_diagnostic(const GoodSample& sample, double alpha, std::uint64_t rng_seed);

/// z + U[-half_width, half_width] noise; half_width == 0 returns z unchanged.
std::vector<double> smooth_instrument(std::span<const double> z, double half_width, std::uint64_t rng_seed);

}  // namespace qlw::confset
