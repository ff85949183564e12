#include "qlw/xicor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "qlw/errors.hpp"
#include "qlw/normal.hpp"
#include "qlw/rng.hpp"

namespace qlw::xicor {
namespace {

// Stream id reserved for tie breaking in `first`.
constexpr std::uint64_t kTieStream = 0x7469655f62726bULL;

struct Keyed {
    double value;
    std::uint32_t index;
};

struct Ordering {
    std::vector<Keyed> items;
    std::vector<Keyed> buffer;
    std::vector<std::uint32_t> offsets;
};

// Stable sort of `items` by value. Distribution sort into n equal-width
// buckets, then insertion sort inside each bucket: linear time on the smooth
// continuous data this is used for, with std::stable_sort guarding buckets
// that turn out crowded.
void bucket_sort(std::vector<Keyed>& items, Ordering& scratch) {
    const std::size_t n = items.size();
    if (n < 2) return;
    auto by_value = [](const Keyed& a, const Keyed& b) { return a.value < b.value; };
    if (n <= 64) {
        std::stable_sort(items.begin(), items.end(), by_value);
        return;
    }
    auto [lo_it, hi_it] = std::minmax_element(items.begin(), items.end(), by_value);
    const double lo = lo_it->value;
    const double hi = hi_it->value;
    if (lo == hi) return;
    const double scale = static_cast<double>(n) / (hi - lo);
    if (!std::isfinite(scale)) {
        std::stable_sort(items.begin(), items.end(), by_value);
        return;
    }
    auto bucket_of = [&](double v) {
        const auto b = static_cast<std::size_t>((v - lo) * scale);
        return b < n ? b : n - 1;
    };

    auto& offsets = scratch.offsets;
    offsets.assign(n + 1, 0);
    for (const auto& item : items) ++offsets[bucket_of(item.value) + 1];
    for (std::size_t b = 0; b < n; ++b) offsets[b + 1] += offsets[b];
    auto& buffer = scratch.buffer;
    buffer.resize(n);
    // offsets[b] starts at bucket b's first slot and ends one past its last.
    for (const auto& item : items) buffer[offsets[bucket_of(item.value)]++] = item;
    std::size_t begin = 0;
    for (std::size_t b = 0; b < n; ++b) {
        const std::size_t end = offsets[b];
        const std::size_t size = end - begin;
        if (size > 32) {
            std::stable_sort(buffer.begin() + begin, buffer.begin() + end, by_value);
        } else {
            for (std::size_t i = begin + 1; i < end; ++i) {
                const Keyed item = buffer[i];
                std::size_t j = i;
                while (j > begin && item.value < buffer[j - 1].value) {
                    buffer[j] = buffer[j - 1];
                    --j;
                }
                buffer[j] = item;
            }
        }
        begin = end;
    }
    items.swap(buffer);
}

// Fills scratch.items with the permutation sorting `first` ascending; runs of
// equal values are put in a uniformly random order drawn from `seed`.
// Returns the number of rows beyond the first of each tied run.
std::size_t order_by_first(std::span<const double> first, std::uint64_t seed, Ordering& scratch) {
    const std::size_t n = first.size();
    auto& items = scratch.items;
    items.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        items[i] = {first[i] + 0.0, static_cast<std::uint32_t>(i)};
    }
    bucket_sort(items, scratch);

    std::size_t ties = 0;
    std::size_t run_start = 0;
    for (std::size_t i = 1; i <= n; ++i) {
        if (i < n && items[i].value == items[run_start].value) continue;
        if (i - run_start > 1) {
            ties += i - run_start - 1;
            // The sort is stable, so the run is in input order; draw a
            // fresh stream per run so the result does not depend on other runs.
            Philox rng(seed, kTieStream, run_start);
            shuffle(std::span<Keyed>(items.data() + run_start, i - run_start), rng);
        }
        run_start = i;
    }
    return ties;
}

Ordering& thread_scratch() {
    thread_local Ordering scratch;
    return scratch;
}

void validate_column(std::span<const double> column, const char* name) {
    for (std::size_t i = 0; i < column.size(); ++i) {
        if (!std::isfinite(column[i])) {
            throw Error(ErrorKind::InvalidSample,
                        std::string("non-finite value in ") + name + " at index " + std::to_string(i));
        }
    }
}

}  // namespace

void PairedSample::validate() const {
    if (first.size() != second.size()) {
        throw Error(ErrorKind::InvalidSample, "length mismatch: " + std::to_string(first.size()) + " vs " +
                                                  std::to_string(second.size()));
    }
    if (first.size() < 2) {
        throw Error(ErrorKind::InvalidSample, "need at least 2 pairs, got " + std::to_string(first.size()));
    }
    if (first.size() > std::numeric_limits<std::uint32_t>::max()) {
        throw Error(ErrorKind::InvalidSample, "sample too large");
    }
    validate_column(first, "first");
    validate_column(second, "second");
}

ResponseRanks::ResponseRanks(std::span<const double> second) {
    const std::size_t n = second.size();
    validate_column(second, "second");
    max_rank_.resize(n);
    ge_count_.resize(n);

    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return second[a] < second[b]; });

    double denominator = 0.0;
    std::size_t start = 0;
    for (std::size_t i = 1; i <= n; ++i) {
        if (i < n && second[order[i]] == second[order[start]]) continue;
        if (i - start > 1) has_ties_ = true;
        const auto le = static_cast<std::int64_t>(i);
        const auto ge = static_cast<std::int64_t>(n - start);
        for (std::size_t j = start; j < i; ++j) {
            max_rank_[order[j]] = le;
            ge_count_[order[j]] = ge;
            denominator += static_cast<double>(ge) * static_cast<double>(static_cast<std::int64_t>(n) - ge);
        }
        start = i;
    }
    tie_denominator_ = 2.0 * denominator;
}

XiReport ResponseRanks::evaluate(std::span<const double> first, std::uint64_t seed) const {
    if (first.size() != size()) {
        throw Error(ErrorKind::InvalidSample, "length mismatch: " + std::to_string(first.size()) + " vs " +
                                                  std::to_string(size()));
    }
    if (size() < 2) {
        throw Error(ErrorKind::InvalidSample, "need at least 2 pairs, got " + std::to_string(size()));
    }
    validate_column(first, "first");
    const std::size_t n = size();
    if (has_ties_ && tie_denominator_ == 0.0) {
        throw Error(ErrorKind::DegenerateResponse, "every response value is equal");
    }

    Ordering& scratch = thread_scratch();
    XiReport report;
    report.n = n;
    report.ties_broken = order_by_first(first, seed, scratch);

    std::int64_t total_variation = 0;
    std::int64_t previous = max_rank_[scratch.items[0].index];
    for (std::size_t i = 1; i < n; ++i) {
        const std::int64_t current = max_rank_[scratch.items[i].index];
        total_variation += current > previous ? current - previous : previous - current;
        previous = current;
    }

    const double nd = static_cast<double>(n);
    const double tv = static_cast<double>(total_variation);
    if (has_ties_) {
        report.xi = 1.0 - nd * tv / tie_denominator_;
    } else {
        report.xi = 1.0 - 3.0 * tv / (nd * nd - 1.0);
    }
    report.normalized = std::sqrt(nd) * report.xi;
    return report;
}

SortedRanks ranks_after_sort(const PairedSample& sample, std::uint64_t seed) {
    sample.validate();
    const ResponseRanks response(sample.second);
    Ordering scratch;
    SortedRanks out;
    out.ties_broken = order_by_first(sample.first, seed, scratch);
    const std::size_t n = sample.first.size();
    out.first.reserve(n);
    out.second.reserve(n);
    out.r.reserve(n);
    out.l.reserve(n);
    for (const auto& item : scratch.items) {
        out.first.push_back(sample.first[item.index]);
        out.second.push_back(sample.second[item.index]);
        out.r.push_back(response.max_rank()[item.index]);
        out.l.push_back(response.ge_count()[item.index]);
    }
    return out;
}

XiReport xi(const PairedSample& sample, std::uint64_t seed) {
    sample.validate();
    return ResponseRanks(sample.second).evaluate(sample.first, seed);
}

double critical_value(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw Error(ErrorKind::InvalidLevel, "alpha must lie in (0,1), got " + std::to_string(alpha));
    }
    return std::sqrt(0.4) * normal_quantile(1.0 - alpha);
}

}  // namespace qlw::xicor
