// Acceptance suite: one PASS/FAIL line per criterion, then a summary.
// Exit status is the number of failed criteria.
//
// Seeds are fixed constants; replication counts follow the criteria (Table 2
// uses fewer replications for the larger K, see README).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "ks.hpp"
#include "qlw/confset.hpp"
#include "qlw/errors.hpp"
#include "qlw/normal.hpp"
#include "qlw/regress.hpp"
#include "qlw/rng.hpp"
#include "qlw/simulate.hpp"
#include "qlw/welfare.hpp"
#include "qlw/xicor.hpp"
#include "welfare_oracle.hpp"

using namespace qlw;

namespace {

constexpr std::uint64_t kSeed = 20261015;

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + ("FAILED " + what);
        }
    }
    void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// ---------------------------------------------------------------------------

Outcome deterministic_welfare() {
    Outcome o;
    const auto start = Clock::now();
    const welfare::WelfareQuery q{{0.5, 0.8, 0.2}, {0.2, 0.6, 0.8}, 0.1};
    const std::vector<double> theta{0.2, 0.3, 0.5};
    const double wl = welfare::welfare_loss(theta, q);

    welfare::ConstraintSet unit;
    for (int k = 0; k < 3; ++k) unit.box.push_back(Interval::make(1e-6, 1.0, 1.0, IntervalSource::Box));
    const double iv = welfare::bounds_box(unit, q).wl_max;
    unit.sum_to = 1.0;
    const double iii = welfare::max_constrained(unit, q).wl_max;
    const double secs = since(start);

    o.require(near(wl, 0.507, 0.0005), fmt("WL=%.5f vs 0.507", wl));
    o.require(near(iv, 0.636, 0.0005), fmt("iv=%.5f vs 0.636", iv));
    o.require(near(iii, 0.554, 0.001), fmt("iii=%.5f vs 0.554", iii));
    o.require(secs < 1.0, fmt("runtime %.3fs", secs));
    o.note(fmt("WL=%.5f iv=%.5f iii=%.5f in %.2e s", wl, iv, iii, secs));
    return o;
}

struct Table1Paper {
    std::size_t n;
    double lower[3], upper[3];
    double box_sum, box_only;
};

const Table1Paper kTable1[] = {
    {200, {0.145, 0.216, 0.357}, {0.368, 0.555, 0.861}, 0.542, 0.578},
    {1000, {0.172, 0.256, 0.423}, {0.246, 0.371, 0.630}, 0.525, 0.534},
    {5000, {0.187, 0.280, 0.464}, {0.216, 0.325, 0.546}, 0.514, 0.517},
};

const simulate::Table1Report& table1() {
    static const simulate::Table1Report report = [] {
        const auto start = Clock::now();
        auto r = simulate::mc_table1(500, kSeed);
        std::printf("       (table 1: 500 replications in %.0f s)\n", since(start));
        return r;
    }();
    return report;
}

Outcome table1_panel_a() {
    Outcome o;
    const auto& report = table1();
    double worst = 0.0;
    for (std::size_t row = 0; row < 3; ++row) {
        const auto& got = report.rows[row];
        const auto& want = kTable1[row];
        for (int k = 0; k < 3; ++k) {
            const double dl = got.goods[k].mean_lower - want.lower[k];
            const double du = got.goods[k].mean_upper - want.upper[k];
            worst = std::max({worst, std::abs(dl), std::abs(du)});
            o.require(std::abs(dl) <= 0.02, fmt("n=%zu theta%d lower %.3f vs %.3f", want.n, k + 1,
                                                got.goods[k].mean_lower, want.lower[k]));
            o.require(std::abs(du) <= 0.02, fmt("n=%zu theta%d upper %.3f vs %.3f", want.n, k + 1,
                                                got.goods[k].mean_upper, want.upper[k]));
        }
    }
    for (int k = 0; k < 3; ++k) {
        const double l0 = report.rows[0].goods[k].mean_length, l1 = report.rows[1].goods[k].mean_length,
                     l2 = report.rows[2].goods[k].mean_length;
        o.require(l0 > l1 && l1 > l2, fmt("theta%d lengths %.3f, %.3f, %.3f not decreasing", k + 1, l0, l1, l2));
    }
    o.note(fmt("max |endpoint - paper| = %.4f", worst));
    o.note(fmt("n=200 theta3 [%.3f, %.3f]", report.rows[0].goods[2].mean_lower, report.rows[0].goods[2].mean_upper));
    return o;
}

Outcome table1_panel_b() {
    Outcome o;
    const auto& report = table1();
    std::string values;
    for (std::size_t row = 0; row < 3; ++row) {
        const auto& w = report.rows[row].welfare;
        const auto& want = kTable1[row];
        o.require(near(w.box_sum, want.box_sum, 0.02), fmt("n=%zu i) %.3f vs %.3f", want.n, w.box_sum, want.box_sum));
        o.require(near(w.box_only, want.box_only, 0.02),
                  fmt("n=%zu ii) %.3f vs %.3f", want.n, w.box_only, want.box_only));
        values += fmt("%s%zu: %.3f/%.3f", row ? ", " : "", want.n, w.box_sum, w.box_only);
        if (w.box_sum_infeasible) values += fmt(" (%zu infeasible)", w.box_sum_infeasible);
    }
    o.note("i/ii " + values);
    return o;
}

Outcome table2_trends() {
    Outcome o;
    struct Column {
        std::size_t goods;
        std::size_t reps;
        double length[3];
    };
    const Column columns[] = {{10, 50, {0.40, 0.22, 0.09}}, {50, 10, {0.50, 0.25, 0.11}}, {100, 5, {0.52, 0.26, 0.11}}};
    std::vector<simulate::Table2Report> reports;
    for (const Column& c : columns) {
        const auto start = Clock::now();
        reports.push_back(simulate::mc_table2(c.goods, c.reps, kSeed));
        std::printf("       (table 2, K=%zu: %zu replications in %.0f s)\n", c.goods, c.reps, since(start));
    }
    for (std::size_t i = 0; i < 3; ++i) {
        const Column& c = columns[i];
        std::string lengths;
        for (std::size_t row = 0; row < 3; ++row) {
            const auto& r = reports[i].rows[row];
            o.require(near(r.mean_length, c.length[row], 0.03),
                      fmt("K=%zu n=%zu length %.3f vs %.2f", c.goods, r.n, r.mean_length, c.length[row]));
            o.require(r.joint_coverage >= 0.9, fmt("K=%zu n=%zu coverage %.3f", c.goods, r.n, r.joint_coverage));
            o.require(r.bracket_failures == 0,
                      fmt("K=%zu n=%zu %zu replications miss the true loss", c.goods, r.n, r.bracket_failures));
            lengths += fmt("%s%.3f", row ? "/" : "", r.mean_length);
        }
        o.note(fmt("K=%zu lengths %s", c.goods, lengths.c_str()));
    }
    std::string ratios;
    for (std::size_t row = 0; row < 3; ++row) {
        const double ratio = reports[2].rows[row].seconds_per_rep / reports[0].rows[row].seconds_per_rep;
        o.require(ratio >= 7.0 && ratio <= 13.0, fmt("n=%zu time ratio K100/K10 = %.2f", reports[0].rows[row].n, ratio));
        ratios += fmt("%s%.1f", row ? "/" : "", ratio);
    }
    o.note("time ratio K100/K10 " + ratios);
    return o;
}

Outcome xi_null() {
    Outcome o;
    const std::size_t reps = 2000, n = 1000;
    std::vector<double> stats(reps);
    for (std::size_t r = 0; r < reps; ++r) {
        Philox rng(kSeed, 0x6e756c6c, r);
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = rng.uniform01();
            y[i] = rng.uniform01();
        }
        stats[r] = xicor::xi({x, y}, r).normalized;
    }
    const double sd = std::sqrt(0.4);
    const double d = ks::statistic(stats, [sd](double s) { return normal_cdf(s / sd); });
    const double p = ks::p_value(d, reps);
    o.require(p > 0.01, fmt("KS p = %.4f", p));
    o.note(fmt("KS D = %.4f, p = %.3f", d, p));

    std::size_t exact = 0;
    for (std::size_t r = 0; r < 100; ++r) {
        Philox rng(kSeed, 0x6d6f6e6f, r);
        std::vector<double> x(500), y(500), gx(500), hy(500);
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = rng.uniform(-1.0, 1.0);
            y[i] = x[i] * x[i] + 0.3 * rng.uniform01();
            gx[i] = std::exp(3.0 * x[i]) - 2.0;
            hy[i] = std::atan(y[i]) + y[i] * y[i] * y[i];
        }
        exact += xicor::xi({x, y}, r).xi == xicor::xi({gx, hy}, r).xi;
    }
    o.require(exact == 100, fmt("invariance bit-exact on %zu/100", exact));
    o.note(fmt("monotone invariance bit-exact %zu/100", exact));
    return o;
}

Outcome xi_coverage() {
    Outcome o;
    const std::size_t reps = 500;
    simulate::DgpConfig dgp;
    dgp.n = 1000;
    dgp.seed = kSeed;
    const double c = xicor::critical_value(0.1);
    std::vector<std::size_t> covered(dgp.theta.size(), 0);
    for (std::size_t r = 0; r < reps; ++r) {
        const auto draw = simulate::draw_sample(dgp, r);
        for (std::size_t k = 0; k < dgp.theta.size(); ++k) {
            covered[k] += confset::xi_statistic(draw.goods[k], dgp.theta[k], mix_seed(r, k)) <= c;
        }
    }
    std::size_t total = 0;
    std::string per_good;
    for (std::size_t k = 0; k < covered.size(); ++k) {
        total += covered[k];
        per_good += fmt("%s%.3f", k ? "/" : "", static_cast<double>(covered[k]) / reps);
    }
    const double pooled = static_cast<double>(total) / static_cast<double>(reps * covered.size());
    o.require(pooled >= 0.87 && pooled <= 0.93, fmt("coverage %.3f", pooled));
    o.note(fmt("theta_true in the inverted set: %.3f (per good %s)", pooled, per_good.c_str()));
    // Hull of accepted grid nodes at the same level (alpha = 0.1) is reported
    // for information only.
    simulate::Table1Options t;
    t.sample_sizes = {1000};
    t.theta = dgp.theta;
    t.alpha = 0.1 * 3;  // per-good share alpha / K = 0.1
    const auto hull = simulate::mc_table1(100, kSeed, t);
    o.note(fmt("info: grid-hull coverage over 100 reps %.2f/%.2f/%.2f", hull.rows[0].goods[0].coverage,
               hull.rows[0].goods[1].coverage, hull.rows[0].goods[2].coverage));
    return o;
}

Outcome solver_oracle() {
    Outcome o;
    Philox rng(kSeed, 0x736f6c76);
    double worst = 0.0;
    std::size_t instances = 0;
    for (std::size_t k : {2u, 3u}) {
        for (int inst = 0; inst < 20; ++inst) {
            welfare::WelfareQuery q;
            std::vector<double> lo, hi, c;
            double s_lo = 0.0, s_hi = 0.0;
            for (std::size_t i = 0; i < k; ++i) {
                q.delta.push_back(rng.uniform(0.1, 1.1));
                q.y_star.push_back(rng.uniform(0.2, 1.2));
                c.push_back(q.delta.back() * q.y_star.back());
                const double a = rng.uniform(1e-3, 0.5);
                lo.push_back(a);
                hi.push_back(a + rng.uniform(0.05, 0.8));
                s_lo += lo.back();
                s_hi += hi.back();
            }
            welfare::ConstraintSet cs;
            for (std::size_t i = 0; i < k; ++i) cs.box.push_back(Interval::make(lo[i], hi[i], 0.95, IntervalSource::Xi));
            cs.sum_to = rng.uniform(s_lo, s_hi);
            const double solver = welfare::max_constrained(cs, q).wl_max;
            const double grid = oracle::brute_force(lo, hi, *cs.sum_to, c, 1e-3).max;
            worst = std::max(worst, std::abs(solver - grid));
            ++instances;
        }
    }
    o.require(worst <= 1e-4, fmt("max |solver - grid| = %.2e", worst));
    o.note(fmt("%zu instances, max |solver - grid| = %.2e", instances, worst));

    double kl_worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double theta = rng.uniform(1e-3, 2.0), c = rng.uniform(0.0, 2.0);
        const double direct = theta * std::log1p(c / theta);
        const double via_kl = c - welfare::kl_div(theta, theta + c);
        kl_worst = std::max(kl_worst, std::abs(direct - via_kl));
    }
    o.require(kl_worst <= 1e-12, fmt("kl identity error %.2e", kl_worst));
    o.note(fmt("kl identity max error %.1e", kl_worst));
    return o;
}

Outcome derivatives() {
    Outcome o;
    Philox rng(kSeed, 0x64657269);
    double worst = 0.0;
    bool positive = true;
    for (int i = 0; i < 100; ++i) {
        const double t = rng.uniform(0.01, 2.0), c = rng.uniform(0.01, 2.0);
        positive = positive && welfare::marginal_loss(t, c) > 0.0;
        const double h = 1e-4 * t;
        const double fd = (welfare::marginal_loss(t + h, c) - welfare::marginal_loss(t - h, c)) / (2.0 * h);
        const double analytic = welfare::marginal_loss_slope(t, c);
        worst = std::max(worst, std::abs(fd - analytic) / std::abs(analytic));
    }
    o.require(positive, "first derivative not positive everywhere");
    o.require(worst <= 1e-5, fmt("max relative error %.2e", worst));
    o.note(fmt("100 points, first derivative > 0, max rel. error of second %.1e", worst));
    return o;
}

// Low-power design: price varies little next to the preference shock, so
// xi(Y, P) rarely rejects while xi(P, P) always does.
GoodSample case2_draw(std::uint64_t rep) {
    Philox rng(kSeed, 0x63617365, rep);
    GoodSample g;
    g.good_id = "case2";
    for (int i = 0; i < 1000; ++i) {
        const double p = rng.uniform(1.0, 1.02), w = rng.uniform(0.0, 0.9);
        g.price.push_back(p);
        g.quantity.push_back(0.5 / (p - w));
    }
    return g;
}

Outcome shape_substitute() {
    Outcome o;
    const std::size_t reps = 200;
    std::size_t unbounded = 0, tighter = 0, negative_slope = 0;
    for (std::size_t r = 0; r < reps; ++r) {
        const GoodSample g = case2_draw(r);
        unbounded += confset::shape_diagnostic(g, 0.1, r).case_id == confset::ShapeCase::UnboundedAbove;
        // With so little price variation OLS can estimate a nonpositive slope;
        // such draws have no LS interval and count against the criterion.
        try {
            const Interval ls =
                regress::theta_interval_delta(regress::fit_inverse_demand(g, regress::FitMode::Ols), 0.9);
            const Interval both = confset::cs_combined(g, 0.1, confset::CombineMode::Intersect, r);
            tighter += !both.empty && both.lower > ls.lower;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::NonpositiveSlope) throw;
            ++negative_slope;
        }
    }
    const double share_unbounded = static_cast<double>(unbounded) / reps;
    const double share_tighter = static_cast<double>(tighter) / reps;
    o.require(share_unbounded > 0.5, fmt("UNBOUNDED_ABOVE in %.2f of draws", share_unbounded));
    o.require(share_tighter > 0.5, fmt("intersection raises the LS lower bound in %.2f of draws", share_tighter));
    o.note(fmt("UNBOUNDED_ABOVE %.2f, LS lower bound raised %.2f, nonpositive OLS slope %zu (%zu draws)",
               share_unbounded, share_tighter, negative_slope, reps));
    return o;
}

}  // namespace

// Optional argument: run only the criteria whose name contains it.
int main(int argc, char** argv) {
    const std::string only = argc > 1 ? argv[1] : "";
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"deterministic welfare values", deterministic_welfare},
        {"table 1 panel A (intervals)", table1_panel_a},
        {"table 1 panel B (welfare upper bounds)", table1_panel_b},
        {"table 2 trends (many goods)", table2_trends},
        {"xi null distribution and invariance", xi_null},
        {"cs_xi coverage at nominal 0.9", xi_coverage},
        {"solver oracle and kl_div identity", solver_oracle},
        {"monotonicity / concavity derivatives", derivatives},
        {"shape diagnostic substitute (case 2)", shape_substitute},
    };
    int failed = 0;
    std::size_t ran = 0;
    for (const auto& [name, check] : criteria) {
        if (!only.empty() && std::string(name).find(only) == std::string::npos) continue;
        ++ran;
        const auto start = Clock::now();
        Outcome outcome;
        try {
            outcome = check();
        } catch (const std::exception& e) {
            outcome.pass = false;
            outcome.detail = std::string("exception: ") + e.what();
        }
        failed += !outcome.pass;
        std::printf("[%s] %s: %s (%.1f s)\n", outcome.pass ? "PASS" : "FAIL", name, outcome.detail.c_str(),
                    since(start));
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(ran) - failed, ran);
    return failed;
}
