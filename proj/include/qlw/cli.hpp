#pragma once

// Batch commands behind the qlw tool. Each command reads a RunConfig, writes
// CSV files under config.out and returns a process exit status.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qlw/confset.hpp"

namespace qlw::cli {

enum class LsChoice { Auto, Ols, Tsls };

struct RunConfig {
    std::string command;  // ci | welfare | simulate | mc | diagnose

    std::filesystem::path input;      // micro-data CSV
    std::filesystem::path queries;    // per-individual (delta, y*) file
    std::filesystem::path intervals;  // ci output, alternative to input for welfare
    std::filesystem::path out = ".";

    double alpha = 0.1;
    // Unset grid values fall back to per-command defaults: 5000 nodes on
    // [1e-6, 6] for data, 1000 nodes on [0.001, 1] for Monte Carlo.
    std::optional<std::size_t> grid_nodes;
    std::optional<double> grid_lo;
    std::optional<double> grid_hi;
    confset::CombineMode mode = confset::CombineMode::Intersect;
    LsChoice ls = LsChoice::Auto;
    std::optional<std::uint64_t> seed;
    double jitter = 0.0;
    std::optional<double> sum_to;
    double floor = confset::kPositivityFloor;

    // simulate / mc
    std::size_t reps = 500;
    int table = 1;
    std::size_t goods = 10;
    std::size_t n = 1000;
    std::vector<std::size_t> sample_sizes;  // mc; empty = table default
    std::vector<double> theta{0.2, 0.3, 0.5};
    std::optional<double> endogeneity;

    unsigned threads = 0;  // 0 = all hardware threads
    bool profiles = true;  // ci: dump the xi profile of every good
    bool text_table = false;

    /// Sets one key from its text form, validating it. Throws ConfigError
    /// naming the key. Keys use the flag spelling without dashes
    /// (grid-nodes, sum-to, ...); underscores are accepted too.
    void set(std::string_view key, std::string_view value);

    /// Cross-field checks for the selected command (e.g. seed required).
    void validate() const;
};

/// Flat "key = value" text, '#' starts a comment. Errors carry
/// "<source>:<line>:" prefixes.
RunConfig parse_config(std::istream& in, std::string_view source = "<config>");
RunConfig load_config(const std::filesystem::path& path);
/// Inverse of parse_config for every key that differs from its default.
std::string to_text(const RunConfig& config);

int cmd_ci(const RunConfig& config, std::ostream& log);
int cmd_welfare(const RunConfig& config, std::ostream& log);
int cmd_simulate(const RunConfig& config, std::ostream& log);
int cmd_mc(const RunConfig& config, std::ostream& log);
int cmd_diagnose(const RunConfig& config, std::ostream& log);

/// Validates and dispatches on config.command. Errors are written to `err` as
/// "error: <Kind>: <message>" and mapped to exit codes 2/3/4.
int run(const RunConfig& config, std::ostream& log, std::ostream& err);

}  // namespace qlw::cli
