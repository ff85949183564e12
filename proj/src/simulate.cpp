#include "qlw/simulate.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "qlw/confset.hpp"
#include "qlw/errors.hpp"
#include "qlw/parallel.hpp"
#include "qlw/rng.hpp"
#include "qlw/welfare.hpp"

namespace qlw::simulate {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// Stream tags keeping the different uses of one user seed apart.
constexpr std::uint64_t kTable2Query = 0x7175657279ULL;
constexpr std::uint64_t kIntervalSeeds = 0x6369ULL;

struct GoodInterval {
    Interval interval;
    double seconds = 0.0;
};

GoodInterval timed_interval(const GoodSample& good, double alpha, const confset::GridSpec& grid,
                            std::uint64_t seed) {
    const auto start = Clock::now();
    GoodInterval out;
    out.interval = confset::cs_xi(good, alpha, grid, seed).interval;
    out.seconds = seconds_since(start);
    return out;
}

}  // namespace

void DgpConfig::validate() const {
    if (theta.empty()) throw Error(ErrorKind::ConfigError, "DGP needs at least one good");
    for (double t : theta) {
        if (!(t > 0.0) || !std::isfinite(t)) throw Error(ErrorKind::ConfigError, "theta must be positive and finite");
    }
    if (n < 3) throw Error(ErrorKind::ConfigError, "sample size must be >= 3");
    if (endogeneity && !(*endogeneity >= 0.0 && *endogeneity <= 1.0)) {
        throw Error(ErrorKind::ConfigError, "endogeneity weight must lie in [0, 1]");
    }
}

SimulatedDraw draw_sample(const DgpConfig& config, std::uint64_t replication) {
    config.validate();
    SimulatedDraw out;
    out.goods.resize(config.theta.size());
    out.shocks.resize(config.theta.size());
    for (std::size_t k = 0; k < config.theta.size(); ++k) {
        Philox rng(config.seed, replication, k);
        GoodSample& good = out.goods[k];
        std::vector<double>& shock = out.shocks[k];
        good.good_id = "good" + std::to_string(k + 1);
        good.price.resize(config.n);
        good.quantity.resize(config.n);
        shock.resize(config.n);
        if (config.endogeneity) good.instrument.emplace(config.n);
        for (std::size_t i = 0; i < config.n; ++i) {
            const double w = rng.uniform01();
            double p;
            if (config.endogeneity) {
                const double z = rng.uniform(1.0, 1.5);
                (*good.instrument)[i] = z;
                p = z + *config.endogeneity * w + rng.uniform(0.0, 0.1);
            } else {
                p = rng.uniform(1.0, 2.0);
            }
            shock[i] = w;
            good.price[i] = p;
            good.quantity[i] = config.theta[k] / (p - w);
        }
    }
    return out;
}

Table1Report mc_table1(std::size_t replications, std::uint64_t seed, const Table1Options& options) {
    if (replications == 0) throw Error(ErrorKind::ConfigError, "replications must be >= 1");
    const std::size_t goods = options.theta.size();
    if (options.delta.size() != goods || options.y_star.size() != goods) {
        throw Error(ErrorKind::ConfigError, "theta, delta and y_star must have the same length");
    }
    const double alpha_good = confset::bonferroni_share(options.alpha, goods, false);
    const confset::GridSpec grid{options.grid_lo, options.grid_hi, options.grid_nodes};
    grid.validate();
    const welfare::WelfareQuery query{options.delta, options.y_star, options.alpha};

    Table1Report report;
    report.replications = replications;
    report.seed = seed;
    report.alpha = options.alpha;

    for (std::size_t n : options.sample_sizes) {
        const std::uint64_t row_seed = mix_seed(seed, n);
        const DgpConfig dgp{options.theta, n, std::nullopt, row_seed};

        struct RepResult {
            std::vector<GoodInterval> intervals;
            std::optional<double> box_sum;
            std::optional<double> box_only;
            double welfare_seconds = 0.0;
        };
        std::vector<RepResult> results(replications);

        parallel_for(replications, options.threads, [&](std::size_t r) {
            const SimulatedDraw draw = draw_sample(dgp, r);
            RepResult& res = results[r];
            welfare::ConstraintSet box;
            bool all_nonempty = true;
            for (std::size_t k = 0; k < goods; ++k) {
                res.intervals.push_back(timed_interval(draw.goods[k], alpha_good, grid,
                                                       mix_seed(mix_seed(row_seed, kIntervalSeeds), r * goods + k)));
                all_nonempty = all_nonempty && !res.intervals.back().interval.empty;
                box.box.push_back(res.intervals.back().interval);
            }
            if (!all_nonempty) return;
            const auto start = Clock::now();
            res.box_only = welfare::bounds_box(box, query).wl_max;
            box.sum_to = 1.0;
            try {
                res.box_sum = welfare::max_constrained(box, query).wl_max;
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::InfeasibleConstraint) throw;
            }
            res.welfare_seconds = seconds_since(start);
        });

        Table1Row row;
        row.n = n;
        row.goods.resize(goods);
        std::size_t box_sum_count = 0, box_only_count = 0, joint_covered = 0;
        for (const RepResult& res : results) {
            bool covered_all = true;
            for (std::size_t k = 0; k < goods; ++k) {
                const Interval& iv = res.intervals[k].interval;
                GoodSummary& g = row.goods[k];
                row.seconds_intervals += res.intervals[k].seconds;
                if (iv.empty) {
                    ++g.empty_sets;
                    covered_all = false;
                    continue;
                }
                g.mean_lower += iv.lower;
                g.mean_upper += iv.upper;
                g.mean_length += iv.length();
                const bool covered = iv.contains(options.theta[k]);
                g.coverage += covered ? 1.0 : 0.0;
                covered_all = covered_all && covered;
            }
            joint_covered += covered_all ? 1 : 0;
            if (res.box_only) {
                row.welfare.box_only += *res.box_only;
                ++box_only_count;
            }
            if (res.box_sum) {
                row.welfare.box_sum += *res.box_sum;
                ++box_sum_count;
            } else if (res.box_only) {
                ++row.welfare.box_sum_infeasible;
            }
            row.seconds_welfare += res.welfare_seconds;
        }
        for (std::size_t k = 0; k < goods; ++k) {
            GoodSummary& g = row.goods[k];
            g.theta = options.theta[k];
            const double filled = static_cast<double>(replications - g.empty_sets);
            if (filled > 0) {
                g.mean_lower /= filled;
                g.mean_upper /= filled;
                g.mean_length /= filled;
            }
            g.coverage /= static_cast<double>(replications);
        }
        row.joint_coverage = static_cast<double>(joint_covered) / static_cast<double>(replications);
        if (box_only_count > 0) row.welfare.box_only /= static_cast<double>(box_only_count);
        if (box_sum_count > 0) row.welfare.box_sum /= static_cast<double>(box_sum_count);

        welfare::ConstraintSet unit;
        unit.box.assign(goods, Interval::make(1e-6, 1.0, 1.0, IntervalSource::Box));
        row.welfare.unit_only = welfare::bounds_box(unit, query).wl_max;
        unit.sum_to = 1.0;
        row.welfare.unit_sum = welfare::max_constrained(unit, query).wl_max;
        row.welfare.true_loss = welfare::welfare_loss(options.theta, query);
        report.rows.push_back(std::move(row));
    }
    return report;
}

Table2Report mc_table2(std::size_t goods, std::size_t replications, std::uint64_t seed, const Table2Options& options) {
    if (goods < 2) throw Error(ErrorKind::ConfigError, "the many-goods study needs K >= 2");
    if (replications == 0) throw Error(ErrorKind::ConfigError, "replications must be >= 1");
    const confset::GridSpec grid{options.grid_lo, options.grid_hi, options.grid_nodes};
    grid.validate();
    const double alpha_good = confset::bonferroni_share(options.alpha, goods, false);

    Table2Report report;
    report.goods = goods;
    report.replications = replications;
    report.seed = seed;
    report.theta.resize(goods);
    report.delta.resize(goods);
    report.y_star.resize(goods);
    Philox query_rng(seed, kTable2Query, goods);
    for (std::size_t k = 0; k < goods; ++k) {
        report.theta[k] = 0.1 + 0.8 * static_cast<double>(k) / static_cast<double>(goods - 1);
        report.delta[k] = query_rng.uniform(0.1, 1.1);
        report.y_star[k] = query_rng.uniform(0.2, 1.2);
    }
    const welfare::WelfareQuery query{report.delta, report.y_star, options.alpha};
    report.true_loss = welfare::welfare_loss(report.theta, query);

    for (std::size_t n : options.sample_sizes) {
        const std::uint64_t row_seed = mix_seed(mix_seed(seed, goods), n);
        const DgpConfig dgp{report.theta, n, std::nullopt, row_seed};

        struct RepResult {
            std::vector<Interval> intervals;
            double seconds = 0.0;
            std::optional<welfare::WelfareBounds> bounds;
        };
        std::vector<RepResult> results(replications);
        parallel_for(replications, options.threads, [&](std::size_t r) {
            const SimulatedDraw draw = draw_sample(dgp, r);
            RepResult& res = results[r];
            welfare::ConstraintSet box;
            bool all_nonempty = true;
            for (std::size_t k = 0; k < goods; ++k) {
                const GoodInterval gi = timed_interval(draw.goods[k], alpha_good, grid,
                                                       mix_seed(mix_seed(row_seed, kIntervalSeeds), r * goods + k));
                res.seconds += gi.seconds;
                res.intervals.push_back(gi.interval);
                all_nonempty = all_nonempty && !gi.interval.empty;
            }
            box.box = res.intervals;
            if (all_nonempty) res.bounds = welfare::bounds_box(box, query);
        });

        Table2Row row;
        row.n = n;
        std::size_t filled = 0, covered_pairs = 0, joint = 0, bounded = 0;
        for (const RepResult& res : results) {
            bool covered_all = true;
            for (std::size_t k = 0; k < goods; ++k) {
                const Interval& iv = res.intervals[k];
                if (iv.empty) {
                    ++row.empty_sets;
                    covered_all = false;
                    continue;
                }
                row.mean_length += iv.length();
                ++filled;
                const bool covered = iv.contains(report.theta[k]);
                covered_pairs += covered ? 1 : 0;
                covered_all = covered_all && covered;
            }
            joint += covered_all ? 1 : 0;
            row.seconds_per_rep += res.seconds;
            if (res.bounds) {
                row.mean_upper += res.bounds->wl_max;
                row.mean_lower += res.bounds->wl_min;
                ++bounded;
                if (report.true_loss < res.bounds->wl_min || report.true_loss > res.bounds->wl_max) {
                    ++row.bracket_failures;
                }
            } else {
                ++row.bracket_failures;
            }
        }
        const double reps = static_cast<double>(replications);
        if (filled > 0) row.mean_length /= static_cast<double>(filled);
        if (bounded > 0) {
            row.mean_upper /= static_cast<double>(bounded);
            row.mean_lower /= static_cast<double>(bounded);
        }
        row.seconds_per_rep /= reps;
        row.joint_coverage = static_cast<double>(joint) / reps;
        row.good_coverage = static_cast<double>(covered_pairs) / (reps * static_cast<double>(goods));
        report.rows.push_back(row);
    }
    return report;
}

}  // namespace qlw::simulate
