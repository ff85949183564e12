#pragma once

// File formats: micro-data CSV, per-individual query files, interval tables
// and the flat key = value run configuration.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qlw/sample.hpp"

namespace qlw::io {

/// Minimal RFC 4180 reader: comma separated, double quotes escape commas and
/// quotes, CRLF tolerated. Blank lines are skipped; `line` is 1-based.
struct CsvRow {
    std::size_t line = 0;
    std::vector<std::string> cells;
};

std::vector<CsvRow> read_csv(std::istream& in);

/// Strict decimal parse (optional sign, digits, '.', exponent); whitespace
/// around the number is ignored. Nullopt on anything else.
std::optional<double> parse_real(std::string_view text);

/// Shortest text that reads back to the same double ("nan", "inf" for
/// non-finite values).
std::string format_real(double value);

/// Columns good_id, price, quantity and optionally instrument, any order.
/// Rows are grouped by good_id in order of first appearance.
/// Errors: SchemaError (missing column), ParseError (line, column), InvalidSample
/// (nonpositive price/quantity; every offending line is listed),
/// TooFewObservations (a good with fewer than 3 rows).
std::vector<GoodSample> parse_samples(std::istream& in);
std::vector<GoodSample> ingest_csv(const std::filesystem::path& path);

void write_samples(std::ostream& out, const std::vector<GoodSample>& goods);

/// One individual: a price change and reference consumption per good.
struct QueryRow {
    std::string id;
    std::vector<double> delta;
    std::vector<double> y_star;
};

struct QueryTable {
    std::vector<std::string> goods;
    std::vector<QueryRow> rows;
};

/// Wide format: id, then delta/ystar column pairs, one pair per good
/// (headers delta_<good>, ystar_<good> name the goods, otherwise goods are
/// positional). Long format: columns id, good_id, delta, ystar.
QueryTable parse_queries(std::istream& in);
QueryTable read_queries(const std::filesystem::path& path);

/// Per-good intervals as written by the ci command.
struct IntervalRow {
    std::string good_id;
    std::string mode;
    std::string status;  // OK, EMPTY, or the name of the error that stopped the good
    Interval interval;
};

/// Header of the interval table; theta is in numeraire units.
inline constexpr std::string_view kIntervalHeader =
    "good_id,mode,level,theta_lower_numeraire,theta_upper_numeraire,theta_length_numeraire,status,n";

std::vector<IntervalRow> parse_intervals(std::istream& in);
std::vector<IntervalRow> read_intervals(const std::filesystem::path& path);

}  // namespace qlw::io
