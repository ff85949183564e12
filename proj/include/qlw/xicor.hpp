#pragma once

// Chatterjee's rank correlation xi_n(first, second): sort the pairs by `first`,
// then measure how erratically the ranks of `second` move along that order.
// Close to 0 under independence, approaches 1 when second is a measurable
// function of first.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace qlw::xicor {

/// Borrowed view of paired observations (first = conditioning variable,
/// second = response). Validated by every operation that takes one.
struct PairedSample {
    std::span<const double> first;
    std::span<const double> second;

    /// Throws InvalidSample on length mismatch, n < 2 or a non-finite entry.
    void validate() const;
};

struct XiReport {
    double xi = 0.0;
    std::size_t n = 0;
    double normalized = 0.0;  // sqrt(n) * xi
    std::size_t ties_broken = 0;
};

/// The data after sorting by `first`, with the rank bookkeeping that feeds xi.
struct SortedRanks {
    std::vector<double> first;
    std::vector<double> second;
    std::vector<std::int64_t> r;  // #{j : second_j <= second_(i)}
    std::vector<std::int64_t> l;  // #{j : second_j >= second_(i)}
    std::size_t ties_broken = 0;
};

/// Sorts by `first`, breaking ties in `first` uniformly at random from `seed`.
/// Ties in `second` use the max-rank convention: r counts values <= and l
/// counts values >=, so both come out of one sorted pass.
SortedRanks ranks_after_sort(const PairedSample& sample, std::uint64_t seed);

XiReport xi(const PairedSample& sample, std::uint64_t seed);

/// sqrt(0.4) * z_{1-alpha}: the one-sided critical value for sqrt(n) * xi_n
/// under independence.
double critical_value(double alpha);

/// Ranks of a fixed response column, computed once and reused against many
/// conditioning columns (e.g. one per grid node of a test inversion).
class ResponseRanks {
public:
    explicit ResponseRanks(std::span<const double> second);

    std::size_t size() const noexcept { return max_rank_.size(); }
    bool has_ties() const noexcept { return has_ties_; }
    std::span<const std::int64_t> max_rank() const noexcept { return max_rank_; }
    std::span<const std::int64_t> ge_count() const noexcept { return ge_count_; }

    /// xi_n(first, second); O(n log n). Thread-safe.
    XiReport evaluate(std::span<const double> first, std::uint64_t seed) const;

private:
    std::vector<std::int64_t> max_rank_;
    std::vector<std::int64_t> ge_count_;
    double tie_denominator_ = 0.0;  // 2 * sum l_i (n - l_i)
    bool has_ties_ = false;
};

}  // namespace qlw::xicor
