#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "qlw/errors.hpp"
#include "qlw/rng.hpp"
#include "qlw/welfare.hpp"
#include "welfare_oracle.hpp"

using namespace qlw;

namespace {

const welfare::WelfareQuery kPaperQuery{{0.5, 0.8, 0.2}, {0.2, 0.6, 0.8}, 0.1};

welfare::ConstraintSet unit_box(std::size_t k, std::optional<double> sum_to) {
    welfare::ConstraintSet cs;
    for (std::size_t i = 0; i < k; ++i) cs.box.push_back(Interval::make(1e-6, 1.0, 1.0, IntervalSource::Box));
    cs.sum_to = sum_to;
    return cs;
}

ErrorKind kind_of(auto fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::ConfigError;
}

}  // namespace

TEST_CASE("welfare loss at the simulation design") {
    // Reference values from an independent numpy/scipy evaluation.
    const std::vector<double> theta{0.2, 0.3, 0.5};
    CHECK(welfare::welfare_loss(theta, kPaperQuery) == doctest::Approx(0.5065623234290035).epsilon(1e-13));

    // Hand value: 0.2 log(1.5) + 0.3 log(2.6) + 0.5 log(1.32)
    CHECK(welfare::welfare_loss(theta, kPaperQuery) ==
          doctest::Approx(0.2 * std::log(1.5) + 0.3 * std::log(2.6) + 0.5 * std::log(1.32)));
}

TEST_CASE("unit box and simplex maxima") {
    const auto iv = welfare::bounds(unit_box(3, std::nullopt), kPaperQuery);
    CHECK(iv.wl_max == doctest::Approx(0.63577227).epsilon(1e-7));  // theta = 1
    CHECK(iv.wl_min == doctest::Approx(3.66e-5).epsilon(0.01));    // theta = 1e-6

    const auto iii = welfare::bounds(unit_box(3, 1.0), kPaperQuery);
    CHECK(iii.wl_max == doctest::Approx(0.553885).epsilon(1e-6));  // scipy SLSQP
    // The optimum is theta proportional to c = (0.1, 0.48, 0.16).
    CHECK(iii.argmax_theta[0] == doctest::Approx(0.1 / 0.74).epsilon(1e-6));
    CHECK(iii.argmax_theta[1] == doctest::Approx(0.48 / 0.74).epsilon(1e-6));
    CHECK(iii.kkt_residual < 1e-8);
    double sum = 0.0;
    for (double t : iii.argmax_theta) sum += t;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(iii.min_certified);
    CHECK(iii.gamma[2] == doctest::Approx(iii.argmax_theta[2] + 0.16));
}

TEST_CASE("box corners") {
    welfare::ConstraintSet cs;
    cs.box = {Interval::make(0.1, 0.3, 0.97, IntervalSource::Xi), Interval::make(0.2, 0.4, 0.97, IntervalSource::Xi),
              Interval::make(0.4, 0.6, 0.96, IntervalSource::Xi)};
    const auto b = welfare::bounds_box(cs, kPaperQuery);
    const std::vector<double> lo{0.1, 0.2, 0.4}, hi{0.3, 0.4, 0.6};
    CHECK(b.wl_min == doctest::Approx(welfare::welfare_loss(lo, kPaperQuery)));
    CHECK(b.wl_max == doctest::Approx(welfare::welfare_loss(hi, kPaperQuery)));
    CHECK(b.level == doctest::Approx(0.9));
}

TEST_CASE("constrained extremes match brute force (K = 2, 3)") {
    Philox rng(2024);
    for (int inst = 0; inst < 6; ++inst) {
        const std::size_t k = inst % 2 ? 3 : 2;
        welfare::WelfareQuery q;
        std::vector<double> lo, hi;
        for (std::size_t i = 0; i < k; ++i) {
            q.delta.push_back(rng.uniform(0.05, 1.0));
            q.y_star.push_back(rng.uniform(0.1, 1.0));
            const double a = rng.uniform(1e-3, 0.6), w = rng.uniform(0.1, 0.8);
            lo.push_back(a);
            hi.push_back(a + w);
        }
        double s_lo = 0, s_hi = 0;
        for (std::size_t i = 0; i < k; ++i) {
            s_lo += lo[i];
            s_hi += hi[i];
        }
        const double s = rng.uniform(s_lo, s_hi);
        welfare::ConstraintSet cs;
        for (std::size_t i = 0; i < k; ++i) cs.box.push_back(Interval::make(lo[i], hi[i], 0.95, IntervalSource::Xi));
        cs.sum_to = s;
        const auto b = welfare::max_constrained(cs, q);
        std::vector<double> c;
        for (std::size_t i = 0; i < k; ++i) c.push_back(q.delta[i] * q.y_star[i]);
        const auto ref = oracle::brute_force(lo, hi, s, c);
        CHECK(b.wl_max == doctest::Approx(ref.max).epsilon(1e-4).scale(1.0));
        CHECK(b.wl_max >= ref.max - 1e-12);
        CHECK(b.wl_min == doctest::Approx(ref.min).epsilon(1e-10).scale(1.0));
    }
}

TEST_CASE("kl_div identity") {
    Philox rng(5);
    for (int i = 0; i < 200; ++i) {
        const double theta = rng.uniform(1e-4, 2.0), c = rng.uniform(0.0, 2.0);
        // theta log(1 + c/theta) = c - kl_div(theta, theta + c)
        CHECK(theta * std::log1p(c / theta) == doctest::Approx(c - welfare::kl_div(theta, theta + c)).epsilon(1e-12));
    }
    CHECK(welfare::kl_div(1.0, 1.0) == 0.0);
}

TEST_CASE("derivatives against finite differences") {
    Philox rng(6);
    for (int i = 0; i < 50; ++i) {
        const double t = rng.uniform(0.05, 2.0), c = rng.uniform(0.01, 1.5), h = 1e-5 * t;
        auto f = [c](double x) { return x * std::log1p(c / x); };
        CHECK(welfare::marginal_loss(t, c) > 0.0);
        CHECK(welfare::marginal_loss(t, c) == doctest::Approx((f(t + h) - f(t - h)) / (2 * h)).epsilon(1e-7));
        const double fd2 = (welfare::marginal_loss(t + h, c) - welfare::marginal_loss(t - h, c)) / (2 * h);
        CHECK(welfare::marginal_loss_slope(t, c) < 0.0);
        CHECK(welfare::marginal_loss_slope(t, c) == doctest::Approx(fd2).epsilon(1e-6));
    }
}

TEST_CASE("no price change means no loss") {
    const welfare::WelfareQuery q{{0.0, 0.0}, {1.0, 2.0}, 0.1};
    const std::vector<double> theta{0.3, 0.7};
    CHECK(welfare::welfare_loss(theta, q) == 0.0);
    const auto b = welfare::bounds(unit_box(2, 1.0), q);
    CHECK(b.wl_max == 0.0);
    CHECK(b.wl_min == 0.0);
}

TEST_CASE("many goods use local search for the minimum") {
    Philox rng(8);
    const std::size_t k = welfare::kMaxEnumeratedGoods + 5;
    welfare::WelfareQuery q;
    for (std::size_t i = 0; i < k; ++i) {
        q.delta.push_back(rng.uniform(0.1, 1.0));
        q.y_star.push_back(rng.uniform(0.2, 1.0));
    }
    const auto b = welfare::bounds(unit_box(k, 3.0), q);
    CHECK_FALSE(b.min_certified);
    CHECK(b.wl_min <= b.wl_max);
    double sum = 0.0;
    for (double t : b.argmin_theta) sum += t;
    CHECK(sum == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("errors") {
    const std::vector<double> bad_theta{0.2, 0.0, 0.5};
    CHECK(kind_of([&] { welfare::welfare_loss(bad_theta, kPaperQuery); }) == ErrorKind::InvalidTheta);

    welfare::WelfareQuery neg = kPaperQuery;
    neg.delta[1] = -0.1;
    CHECK(kind_of([&] { welfare::bounds(unit_box(3, std::nullopt), neg); }) == ErrorKind::NegativePriceChange);

    CHECK(kind_of([&] { welfare::bounds(unit_box(3, 5.0), kPaperQuery); }) == ErrorKind::InfeasibleConstraint);

    welfare::ConstraintSet empty = unit_box(3, std::nullopt);
    empty.box[1] = Interval::make_empty(0.97, IntervalSource::Xi);
    CHECK(kind_of([&] { welfare::bounds(empty, kPaperQuery); }) == ErrorKind::EmptyConfidenceSet);

    welfare::ConstraintSet short_box = unit_box(2, std::nullopt);
    CHECK(kind_of([&] { welfare::bounds(short_box, kPaperQuery); }) == ErrorKind::InvalidSample);
}
