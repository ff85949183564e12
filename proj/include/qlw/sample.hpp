#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qlw {

/// Micro data for one good: prices, quantities and an optional instrument.
struct GoodSample {
    std::string good_id;
    std::vector<double> price;
    std::vector<double> quantity;
    std::optional<std::vector<double>> instrument;

    std::size_t size() const noexcept { return price.size(); }
    bool has_instrument() const noexcept { return instrument.has_value(); }

    /// The variable assumed independent of the preference shock: the
    /// instrument when present, otherwise the price (exogenous prices).
    std::span<const double> independence_variable() const noexcept {
        return instrument ? std::span<const double>(*instrument) : std::span<const double>(price);
    }

    /// Throws InvalidSample unless all columns have the same length n >= 3,
    /// prices and quantities are finite and strictly positive, and the
    /// instrument (if any) is finite.
    void validate() const;
};

enum class IntervalSource { Xi, LeastSquares, Intersect, Box };

std::string_view to_string(IntervalSource source);

/// Closed interval [lower, upper] held at a confidence level. `empty` marks
/// an empty set; lower/upper are then meaningless.
struct Interval {
    double lower = 0.0;
    double upper = 0.0;
    double level = 0.0;
    IntervalSource source = IntervalSource::Box;
    bool empty = false;

    static Interval make(double lower, double upper, double level, IntervalSource source) {
        return Interval{lower, upper, level, source, lower > upper};
    }
    static Interval make_empty(double level, IntervalSource source) {
        return Interval{0.0, 0.0, level, source, true};
    }

    bool contains(double x) const noexcept { return !empty && lower <= x && x <= upper; }
    double length() const noexcept { return empty ? 0.0 : upper - lower; }
};

}  // namespace qlw
