#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <vector>

#include "qlw/confset.hpp"
#include "qlw/errors.hpp"
#include "qlw/rng.hpp"
#include "qlw/simulate.hpp"
#include "qlw/xicor.hpp"

using namespace qlw;

namespace {

GoodSample good(std::size_t n, std::uint64_t seed, double theta = 0.3) {
    simulate::DgpConfig c;
    c.theta = {theta};
    c.n = n;
    c.seed = seed;
    return simulate::draw_sample(c).goods[0];
}

}  // namespace

TEST_CASE("grid spec") {
    confset::GridSpec g{0.1, 1.0, 10};
    CHECK(g.node(0) == 0.1);
    CHECK(g.node(9) == 1.0);
    CHECK(g.node(3) == doctest::Approx(0.4));
    CHECK_THROWS_AS((confset::GridSpec{1.0, 0.5, 10}.validate()), Error);
    CHECK_THROWS_AS((confset::GridSpec{0.0, 1.0, 1}.validate()), Error);
    CHECK_THROWS_AS((confset::GridSpec{-1.0, 1.0, 5}.validate()), Error);
    try {
        confset::GridSpec{0.0, std::numeric_limits<double>::infinity(), 5}.validate();
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidGrid);
    }
}

TEST_CASE("cs_xi is the hull of nodes accepted by a direct xi evaluation") {
    const GoodSample g = good(500, 3);
    const confset::GridSpec grid{0.01, 1.0, 100};
    const auto set = confset::cs_xi(g, 0.1, grid, 77);
    const double c = xicor::critical_value(0.1);
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t j = 0; j < grid.nodes; ++j) {
        std::vector<double> resid(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) resid[i] = g.price[i] - grid.node(j) / g.quantity[i];
        const double stat = xicor::xi({resid, g.price}, mix_seed(77, j)).normalized;
        CHECK(set.profile.stats[j] == stat);
        CHECK(confset::xi_statistic(g, grid.node(j), mix_seed(77, j)) == stat);
        if (stat <= c) {
            lo = std::min(lo, grid.node(j));
            hi = std::max(hi, grid.node(j));
        }
    }
    CHECK(set.interval.lower == lo);
    CHECK(set.interval.upper == hi);
    CHECK(set.interval.level == doctest::Approx(0.9));
    CHECK(set.interval.contains(0.3));
    CHECK(set.profile.accepted_segments >= 1);
}

TEST_CASE("cs_xi does not depend on the thread count") {
    const GoodSample g = good(800, 5);
    const confset::GridSpec grid{0.001, 1.0, 300};
    const auto a = confset::cs_xi(g, 0.05, grid, 1, {1});
    const auto b = confset::cs_xi(g, 0.05, grid, 1, {4});
    CHECK(a.profile.stats == b.profile.stats);
    CHECK(a.interval.lower == b.interval.lower);
    CHECK(a.interval.upper == b.interval.upper);
}

TEST_CASE("grid far from the truth gives an empty set, not an error") {
    const GoodSample g = good(2000, 6, 0.3);
    const auto set = confset::cs_xi(g, 0.1, {5.0, 6.0, 50}, 0);
    CHECK(set.interval.empty);
    CHECK(set.profile.accepted_segments == 0);
    CHECK_FALSE(set.interval.contains(5.5));
}

TEST_CASE("intersect") {
    const Interval a = Interval::make(0.1, 0.5, 0.95, IntervalSource::Xi);
    const Interval b = Interval::make(0.3, 0.9, 0.95, IntervalSource::LeastSquares);
    const Interval ab = confset::intersect(a, b);
    CHECK(ab.lower == 0.3);
    CHECK(ab.upper == 0.5);
    CHECK(ab.level == doctest::Approx(0.9));
    const Interval ba = confset::intersect(b, a);
    CHECK(ba.lower == ab.lower);
    CHECK(ba.upper == ab.upper);
    const Interval c = Interval::make(0.6, 0.7, 0.95, IntervalSource::Xi);
    CHECK(confset::intersect(a, c).empty);
    CHECK(confset::intersect(a, Interval::make_empty(0.95, IntervalSource::Xi)).empty);
}

TEST_CASE("cs_combined modes") {
    const GoodSample g = good(1000, 8);
    confset::CombinedOptions o;
    o.grid_nodes = 400;

    const Interval ls = confset::cs_combined(g, 0.05, confset::CombineMode::LsOnly, 2, o);
    const Interval direct =
        regress::theta_interval_delta(regress::fit_inverse_demand(g, regress::FitMode::Ols), 0.95);
    CHECK(ls.lower == direct.lower);
    CHECK(ls.upper == direct.upper);

    const Interval xi = confset::cs_combined(g, 0.05, confset::CombineMode::XiOnly, 2, o);
    const auto ref = confset::cs_xi(g, 0.05, {o.xi_grid_lo, o.xi_grid_hi, o.grid_nodes}, 2);
    CHECK(xi.lower == ref.interval.lower);
    CHECK(xi.upper == ref.interval.upper);

    const Interval both = confset::cs_combined(g, 0.05, confset::CombineMode::Intersect, 2, o);
    const Interval wide_ls =
        regress::theta_interval_delta(regress::fit_inverse_demand(g, regress::FitMode::Ols), 0.975);
    CHECK(both.source == IntervalSource::Intersect);
    CHECK(both.level == doctest::Approx(0.95));
    CHECK(both.lower >= wide_ls.lower);
    CHECK(both.upper <= wide_ls.upper);
    CHECK_FALSE(both.empty);
}

TEST_CASE("jitter touches only the xi part") {
    const GoodSample g = good(600, 10);
    confset::CombinedOptions o;
    o.grid_nodes = 200;
    const Interval plain = confset::cs_combined(g, 0.1, confset::CombineMode::LsOnly, 4, o);
    o.jitter_half_width = 0.01;
    const Interval jittered = confset::cs_combined(g, 0.1, confset::CombineMode::LsOnly, 4, o);
    CHECK(plain.lower == jittered.lower);
    CHECK(plain.upper == jittered.upper);
    CHECK_FALSE(confset::cs_combined(g, 0.1, confset::CombineMode::XiOnly, 4, o).empty);
}

TEST_CASE("bonferroni shares") {
    CHECK(confset::bonferroni_share(0.1, 3, false) == doctest::Approx(0.1 / 3));
    CHECK(confset::bonferroni_share(0.1, 3, true) == doctest::Approx(0.1 / 6));
    CHECK_THROWS_AS(confset::bonferroni_share(0.1, 0, false), Error);
    CHECK_THROWS_AS(confset::bonferroni_share(1.0, 2, false), Error);
}

TEST_CASE("shape classification") {
    CHECK(confset::classify_shape(3, 3, 1) == confset::ShapeCase::BoundedAB);
    CHECK(confset::classify_shape(3, 0.5, 1) == confset::ShapeCase::UnboundedAbove);
    CHECK(confset::classify_shape(0.5, 3, 1) == confset::ShapeCase::ContainsZero);
    CHECK(confset::classify_shape(0.5, 0.5, 1) == confset::ShapeCase::WholeSpace);
    CHECK(confset::to_string(confset::ShapeCase::UnboundedAbove) == "UNBOUNDED_ABOVE");
}

TEST_CASE("shape diagnostic on the exogenous design is bounded on both sides") {
    const auto d = confset::shape_diagnostic(good(1000, 2), 0.1, 0);
    CHECK(d.case_id == confset::ShapeCase::BoundedAB);
    CHECK(d.critical == doctest::Approx(xicor::critical_value(0.1)));
}

TEST_CASE("smooth_instrument") {
    const std::vector<double> z{1, 1, 2, 2, 3};
    CHECK(confset::smooth_instrument(z, 0.0, 1) == z);
    const auto s = confset::smooth_instrument(z, 0.1, 1);
    for (std::size_t i = 0; i < z.size(); ++i) {
        CHECK(std::abs(s[i] - z[i]) <= 0.1);
        CHECK(s[i] != z[i]);
    }
    CHECK(confset::smooth_instrument(z, 0.1, 1) == s);
    // Small half-widths converge to the input.
    const auto tiny = confset::smooth_instrument(z, 1e-12, 1);
    for (std::size_t i = 0; i < z.size(); ++i) CHECK(tiny[i] == doctest::Approx(z[i]).epsilon(1e-11));
    CHECK_THROWS_AS(confset::smooth_instrument(z, -1.0, 1), Error);
}
