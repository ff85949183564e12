#include "qlw/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <unordered_map>

#include "qlw/errors.hpp"

namespace qlw::io {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::string lower(std::string_view s) {
    std::string out(trim(s));
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::ifstream open(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::ConfigError, "cannot open '" + path.string() + "'");
    return in;
}

// Header lookup: column name -> index, names compared case-insensitively.
class Header {
public:
    explicit Header(const CsvRow& row) {
        for (std::size_t i = 0; i < row.cells.size(); ++i) {
            std::string name = lower(row.cells[i]);
            if (i == 0 && name.rfind("\xEF\xBB\xBF", 0) == 0) name.erase(0, 3);  // UTF-8 BOM
            index_.emplace(name, i);
            names_.push_back(std::move(name));
        }
    }
    std::optional<std::size_t> find(std::string_view name) const {
        const auto it = index_.find(std::string(name));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }
    std::size_t require(std::string_view name, std::string_view what) const {
        if (auto i = find(name)) return *i;
        throw Error(ErrorKind::SchemaError, std::string(what) + " is missing required column '" + std::string(name) + "'");
    }
    const std::vector<std::string>& names() const { return names_; }

private:
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::string> names_;
};

const std::string& cell(const CsvRow& row, std::size_t col, const Header& header) {
    if (col >= row.cells.size()) {
        throw Error(ErrorKind::ParseError, "line " + std::to_string(row.line) + ", column '" + header.names()[col] +
                                               "': missing value");
    }
    return row.cells[col];
}

double real_cell(const CsvRow& row, std::size_t col, const Header& header) {
    const std::string& text = cell(row, col, header);
    if (auto v = parse_real(text)) return *v;
    throw Error(ErrorKind::ParseError, "line " + std::to_string(row.line) + ", column '" + header.names()[col] +
                                           "': '" + text + "' is not a number");
}

}  // namespace

std::vector<CsvRow> read_csv(std::istream& in) {
    std::vector<CsvRow> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        CsvRow row;
        row.line = line_no;
        std::string field;
        bool quoted = false;
        for (std::size_t i = 0;; ++i) {
            if (i == line.size()) {
                if (!quoted) break;
                // Quoted field spans a newline.
                std::string next;
                if (!std::getline(in, next)) {
                    throw Error(ErrorKind::ParseError, "line " + std::to_string(row.line) + ": unterminated quote");
                }
                ++line_no;
                field += '\n';
                line = std::move(next);
                i = static_cast<std::size_t>(-1);
                continue;
            }
            const char c = line[i];
            if (quoted) {
                if (c == '"') {
                    if (i + 1 < line.size() && line[i + 1] == '"') {
                        field += '"';
                        ++i;
                    } else {
                        quoted = false;
                    }
                } else {
                    field += c;
                }
            } else if (c == '"') {
                quoted = true;
            } else if (c == ',') {
                row.cells.push_back(std::move(field));
                field.clear();
            } else if (c != '\r' || i + 1 != line.size()) {
                field += c;
            }
        }
        row.cells.push_back(std::move(field));
        if (row.cells.size() == 1 && trim(row.cells[0]).empty()) continue;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::optional<double> parse_real(std::string_view text) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    if (text.empty()) return std::nullopt;
    double value = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value, std::chars_format::general);
    if (ec != std::errc() || end != text.data() + text.size()) return std::nullopt;
    if (!std::isfinite(value)) return std::nullopt;
    return value;
}

std::string format_real(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    (void)ec;
    return std::string(buf, end);
}

std::vector<GoodSample> parse_samples(std::istream& in) {
    const std::vector<CsvRow> rows = read_csv(in);
    if (rows.empty()) throw Error(ErrorKind::SchemaError, "data file is empty (no header)");
    const Header header(rows.front());
    const std::size_t c_good = header.require("good_id", "data file");
    const std::size_t c_price = header.require("price", "data file");
    const std::size_t c_quantity = header.require("quantity", "data file");
    const std::optional<std::size_t> c_instrument = header.find("instrument");

    std::vector<GoodSample> goods;
    std::unordered_map<std::string, std::size_t> slot;
    std::vector<std::size_t> bad_lines;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const CsvRow& row = rows[r];
        const std::string id(trim(cell(row, c_good, header)));
        if (id.empty()) {
            throw Error(ErrorKind::ParseError, "line " + std::to_string(row.line) + ", column 'good_id': empty");
        }
        const double price = real_cell(row, c_price, header);
        const double quantity = real_cell(row, c_quantity, header);
        if (!(price > 0.0) || !(quantity > 0.0)) {
            bad_lines.push_back(row.line);
            continue;
        }
        auto [it, inserted] = slot.emplace(id, goods.size());
        if (inserted) {
            GoodSample g;
            g.good_id = id;
            if (c_instrument) g.instrument.emplace();
            goods.push_back(std::move(g));
        }
        GoodSample& g = goods[it->second];
        g.price.push_back(price);
        g.quantity.push_back(quantity);
        if (c_instrument) g.instrument->push_back(real_cell(row, *c_instrument, header));
    }
    if (!bad_lines.empty()) {
        std::string msg = "nonpositive price or quantity on line";
        msg += bad_lines.size() > 1 ? "s " : " ";
        for (std::size_t i = 0; i < bad_lines.size(); ++i) {
            if (i) msg += ", ";
            msg += std::to_string(bad_lines[i]);
        }
        throw Error(ErrorKind::InvalidSample, msg);
    }
    if (goods.empty()) throw Error(ErrorKind::TooFewObservations, "data file has no rows");
    for (const GoodSample& g : goods) {
        if (g.size() < 3) {
            throw Error(ErrorKind::TooFewObservations,
                        "good '" + g.good_id + "' has " + std::to_string(g.size()) + " rows; at least 3 needed");
        }
    }
    return goods;
}

std::vector<GoodSample> ingest_csv(const std::filesystem::path& path) {
    std::ifstream in = open(path);
    return parse_samples(in);
}

void write_samples(std::ostream& out, const std::vector<GoodSample>& goods) {
    const bool instrument = std::any_of(goods.begin(), goods.end(), [](const GoodSample& g) { return g.has_instrument(); });
    out << "good_id,price,quantity" << (instrument ? ",instrument" : "") << '\n';
    for (const GoodSample& g : goods) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            out << g.good_id << ',' << format_real(g.price[i]) << ',' << format_real(g.quantity[i]);
            if (instrument) out << ',' << (g.has_instrument() ? format_real((*g.instrument)[i]) : "");
            out << '\n';
        }
    }
}

QueryTable parse_queries(std::istream& in) {
    const std::vector<CsvRow> rows = read_csv(in);
    if (rows.empty()) throw Error(ErrorKind::SchemaError, "query file is empty (no header)");
    const Header header(rows.front());
    QueryTable table;

    if (header.find("good_id") && header.find("delta") && header.find("ystar")) {
        const std::size_t c_id = header.require("id", "long-format query file");
        const std::size_t c_good = *header.find("good_id");
        const std::size_t c_delta = *header.find("delta");
        const std::size_t c_ystar = *header.find("ystar");
        std::unordered_map<std::string, std::size_t> good_slot, row_slot;
        struct Entry {
            std::size_t row, good;
            double delta, ystar;
            std::size_t line;
        };
        std::vector<Entry> entries;
        for (std::size_t r = 1; r < rows.size(); ++r) {
            const std::string id(trim(cell(rows[r], c_id, header)));
            const std::string good(trim(cell(rows[r], c_good, header)));
            auto g = good_slot.emplace(good, table.goods.size());
            if (g.second) table.goods.push_back(good);
            auto i = row_slot.emplace(id, table.rows.size());
            if (i.second) table.rows.push_back(QueryRow{id, {}, {}});
            entries.push_back({i.first->second, g.first->second, real_cell(rows[r], c_delta, header),
                               real_cell(rows[r], c_ystar, header), rows[r].line});
        }
        const double missing = std::numeric_limits<double>::quiet_NaN();
        for (QueryRow& row : table.rows) {
            row.delta.assign(table.goods.size(), missing);
            row.y_star.assign(table.goods.size(), missing);
        }
        for (const Entry& e : entries) {
            QueryRow& row = table.rows[e.row];
            if (!std::isnan(row.delta[e.good])) {
                throw Error(ErrorKind::SchemaError, "line " + std::to_string(e.line) + ": individual '" + row.id +
                                                        "' lists good '" + table.goods[e.good] + "' twice");
            }
            row.delta[e.good] = e.delta;
            row.y_star[e.good] = e.ystar;
        }
        for (const QueryRow& row : table.rows) {
            for (std::size_t k = 0; k < table.goods.size(); ++k) {
                if (std::isnan(row.delta[k])) {
                    throw Error(ErrorKind::SchemaError,
                                "individual '" + row.id + "' has no row for good '" + table.goods[k] + "'");
                }
            }
        }
        return table;
    }

    const std::vector<std::string>& names = header.names();
    if (names.size() < 3 || (names.size() - 1) % 2 != 0) {
        throw Error(ErrorKind::SchemaError,
                    "wide-format query file needs an id column followed by delta/ystar pairs; found " +
                        std::to_string(names.size()) + " columns");
    }
    const std::size_t goods = (names.size() - 1) / 2;
    for (std::size_t k = 0; k < goods; ++k) {
        const std::string& d = names[1 + 2 * k];
        const std::string& y = names[2 + 2 * k];
        if (d.rfind("delta_", 0) == 0 && y.rfind("ystar_", 0) == 0 && d.substr(6) == y.substr(6)) {
            // Keep the original spelling of the good id.
            table.goods.emplace_back(trim(rows.front().cells[1 + 2 * k]).substr(6));
        } else {
            table.goods.push_back("good" + std::to_string(k + 1));
        }
    }
    for (std::size_t r = 1; r < rows.size(); ++r) {
        QueryRow q;
        q.id = std::string(trim(cell(rows[r], 0, header)));
        for (std::size_t k = 0; k < goods; ++k) {
            q.delta.push_back(real_cell(rows[r], 1 + 2 * k, header));
            q.y_star.push_back(real_cell(rows[r], 2 + 2 * k, header));
        }
        table.rows.push_back(std::move(q));
    }
    return table;
}

QueryTable read_queries(const std::filesystem::path& path) {
    std::ifstream in = open(path);
    return parse_queries(in);
}

std::vector<IntervalRow> parse_intervals(std::istream& in) {
    const std::vector<CsvRow> rows = read_csv(in);
    if (rows.empty()) throw Error(ErrorKind::SchemaError, "interval file is empty (no header)");
    const Header header(rows.front());
    const std::size_t c_good = header.require("good_id", "interval file");
    const std::size_t c_mode = header.require("mode", "interval file");
    const std::size_t c_level = header.require("level", "interval file");
    const std::size_t c_lo = header.require("theta_lower_numeraire", "interval file");
    const std::size_t c_hi = header.require("theta_upper_numeraire", "interval file");
    const std::size_t c_status = header.require("status", "interval file");

    std::vector<IntervalRow> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const CsvRow& row = rows[r];
        IntervalRow iv;
        iv.good_id = std::string(trim(cell(row, c_good, header)));
        iv.mode = lower(cell(row, c_mode, header));
        iv.status = std::string(trim(cell(row, c_status, header)));
        const double level = real_cell(row, c_level, header);
        const IntervalSource source = iv.mode == "xi" ? IntervalSource::Xi
                                      : iv.mode == "ls" ? IntervalSource::LeastSquares
                                                        : IntervalSource::Intersect;
        if (iv.status == "OK") {
            // Unbounded uppers are written as "inf", which parse_real rejects.
            const std::string& hi_text = cell(row, c_hi, header);
            const double hi = lower(hi_text) == "inf" ? std::numeric_limits<double>::infinity()
                                                      : real_cell(row, c_hi, header);
            iv.interval = Interval::make(real_cell(row, c_lo, header), hi, level, source);
        } else {
            iv.interval = Interval::make_empty(level, source);
        }
        out.push_back(std::move(iv));
    }
    return out;
}

std::vector<IntervalRow> read_intervals(const std::filesystem::path& path) {
    std::ifstream in = open(path);
    return parse_intervals(in);
}

}  // namespace qlw::io
