#pragma once

// Data generation from the demand model Y_k = theta_k / (P_k - W_k) and the
// Monte Carlo studies built on it.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "qlw/sample.hpp"

namespace qlw::simulate {

struct DgpConfig {
    std::vector<double> theta{0.2, 0.3, 0.5};
    std::size_t n = 1000;
    /// When set, prices are endogenous: P = Z + m * W + U(0, 0.1) with
    /// Z ~ U(1, 1.5) recorded as the instrument. Otherwise P ~ U(1, 2), W ~
    /// U(0, 1) independently and no instrument column is produced.
    std::optional<double> endogeneity;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SimulatedDraw {
    std::vector<GoodSample> goods;
    std::vector<std::vector<double>> shocks;  // latent W per good
};

/// One data set; good k of replication `replication` uses the Philox stream
/// (seed, replication, k).
SimulatedDraw draw_sample(const DgpConfig& config, std::uint64_t replication = 0);

struct GoodSummary {
    double theta = 0.0;
    double mean_lower = 0.0;
    double mean_upper = 0.0;
    double mean_length = 0.0;
    double coverage = 0.0;
    std::size_t empty_sets = 0;
};

/// Averages of the welfare-loss upper bound under the four constraint sets:
///  i)   confidence box and sum(theta) = 1
///  ii)  confidence box only
///  iii) theta_k in [1e-6, 1] and sum(theta) = 1
///  iv)  theta_k in [1e-6, 1] only
struct WelfareSummary {
    double box_sum = 0.0;
    double box_only = 0.0;
    double unit_sum = 0.0;
    double unit_only = 0.0;
    /// Replications where constraint i) was infeasible (the box misses the
    /// simplex); excluded from its average.
    std::size_t box_sum_infeasible = 0;
    double true_loss = 0.0;
};

struct Table1Row {
    std::size_t n = 0;
    std::vector<GoodSummary> goods;
    WelfareSummary welfare;
    double joint_coverage = 0.0;
    double seconds_intervals = 0.0;  // summed per-good compute time
    double seconds_welfare = 0.0;
};

struct Table1Options {
    std::vector<std::size_t> sample_sizes{200, 1000, 5000};
    std::vector<double> theta{0.2, 0.3, 0.5};
    std::vector<double> delta{0.5, 0.8, 0.2};
    std::vector<double> y_star{0.2, 0.6, 0.8};
    double alpha = 0.1;
    std::size_t grid_nodes = 1000;
    double grid_lo = 0.001;
    double grid_hi = 1.0;
    unsigned threads = 0;
};

struct Table1Report {
    std::size_t replications = 0;
    std::uint64_t seed = 0;
    double alpha = 0.0;
    std::vector<Table1Row> rows;
};

/// Three-good study: per-good xi-only intervals at level 1 - alpha/K over the
/// grid, and welfare upper bounds under constraints i-iv, averaged over
/// replications.
Table1Report mc_table1(std::size_t replications, std::uint64_t seed, const Table1Options& options = {});

struct Table2Row {
    std::size_t n = 0;
    double mean_length = 0.0;     // over goods and replications
    double seconds_per_rep = 0.0; // summed per-good interval time per replication
    double mean_upper = 0.0;
    double mean_lower = 0.0;
    double joint_coverage = 0.0;  // share of replications whose box covers theta
    double good_coverage = 0.0;   // share of (replication, good) intervals covering
    std::size_t bracket_failures = 0;  // replications with true loss outside [lower, upper]
    std::size_t empty_sets = 0;
};

struct Table2Options {
    std::vector<std::size_t> sample_sizes{200, 1000, 5000};
    double alpha = 0.1;
    std::size_t grid_nodes = 1000;
    double grid_lo = 0.001;
    double grid_hi = 1.0;
    unsigned threads = 0;
};

struct Table2Report {
    std::size_t goods = 0;
    std::size_t replications = 0;
    std::uint64_t seed = 0;
    std::vector<double> theta;
    std::vector<double> delta;
    std::vector<double> y_star;
    double true_loss = 0.0;
    std::vector<Table2Row> rows;
};

/// Many-goods study: theta equally spaced on [0.1, 0.9]; one (delta, y*)
/// draw from U[0.1, 1.1] x U[0.2, 1.2] held fixed across replications and
/// sample sizes; welfare bounds by endpoint substitution.
Table2Report mc_table2(std::size_t goods, std::size_t replications, std::uint64_t seed,
                       const Table2Options& options = {});

}  // namespace qlw::simulate
