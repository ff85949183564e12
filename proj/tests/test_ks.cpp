#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "ks.hpp"
#include "qlw/rng.hpp"

// Reference values: scipy.stats.kstwobign.sf and scipy.stats.kstwo.sf.
TEST_CASE("Kolmogorov tail") {
    CHECK(ks::kolmogorov_sf(0.5) == doctest::Approx(0.9639452436648751).epsilon(1e-12));
    CHECK(ks::kolmogorov_sf(0.8) == doctest::Approx(0.5441424115741981).epsilon(1e-12));
    CHECK(ks::kolmogorov_sf(1.0) == doctest::Approx(0.26999967167735456).epsilon(1e-12));
    CHECK(ks::kolmogorov_sf(1.36) == doctest::Approx(0.049485876755377876).epsilon(1e-12));
    CHECK(ks::kolmogorov_sf(1.63) == doctest::Approx(0.009846364888486529).epsilon(1e-12));
    CHECK(ks::kolmogorov_sf(2.0) == doctest::Approx(0.0006709252557796953).epsilon(1e-12));
}

TEST_CASE("finite-n p-values track the exact distribution") {
    CHECK(ks::p_value(0.02, 2000) == doctest::Approx(0.3953133626892045).epsilon(0.01));
    CHECK(ks::p_value(0.036, 2000) == doctest::Approx(0.01093508430863776).epsilon(0.03));
}

TEST_CASE("uniform sample passes, shifted sample fails") {
    qlw::Philox rng(1);
    std::vector<double> u(2000), v(2000);
    for (std::size_t i = 0; i < u.size(); ++i) {
        u[i] = rng.uniform01();
        v[i] = 0.9 * rng.uniform01();
    }
    auto cdf = [](double x) { return std::clamp(x, 0.0, 1.0); };
    CHECK(ks::p_value(ks::statistic(u, cdf), u.size()) > 0.01);
    CHECK(ks::p_value(ks::statistic(v, cdf), v.size()) < 1e-6);
}
