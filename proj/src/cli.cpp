#include "qlw/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "qlw/errors.hpp"
#include "qlw/io.hpp"
#include "qlw/parallel.hpp"
#include "qlw/regress.hpp"
#include "qlw/rng.hpp"
#include "qlw/simulate.hpp"
#include "qlw/welfare.hpp"

namespace qlw::cli {
namespace {

using io::format_real;

[[noreturn]] void bad(std::string_view key, const std::string& why) {
    throw Error(ErrorKind::ConfigError, std::string(key) + ": " + why);
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double real_value(std::string_view key, std::string_view text) {
    if (auto v = io::parse_real(text)) return *v;
    bad(key, "'" + std::string(text) + "' is not a finite number");
}

std::uint64_t count_value(std::string_view key, std::string_view text) {
    const std::string t = trim(text);
    std::uint64_t v = 0;
    const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || end != t.data() + t.size()) {
        bad(key, "'" + std::string(text) + "' is not a nonnegative integer");
    }
    return v;
}

bool bool_value(std::string_view key, std::string_view text) {
    const std::string t = trim(text);
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    bad(key, "'" + t + "' is not a boolean");
}

std::vector<std::string> split_list(std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = text.find(',', start);
        out.push_back(trim(text.substr(start, comma == std::string_view::npos ? text.npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_real(v[i]);
    return s;
}

std::string join(const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

std::string_view to_string(LsChoice ls) {
    switch (ls) {
        case LsChoice::Auto: return "auto";
        case LsChoice::Ols: return "ols";
        case LsChoice::Tsls: return "tsls";
    }
    return "auto";
}

std::ofstream create(const std::filesystem::path& path) {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::ConfigError, "cannot write '" + path.string() + "'");
    return out;
}

regress::FitMode ls_mode_for(const RunConfig& config, const GoodSample& good) {
    switch (config.ls) {
        case LsChoice::Ols: return regress::FitMode::Ols;
        case LsChoice::Tsls: return regress::FitMode::Tsls;
        case LsChoice::Auto: break;
    }
    return good.has_instrument() ? regress::FitMode::Tsls : regress::FitMode::Ols;
}

confset::CombinedOptions combined_options(const RunConfig& config, const GoodSample& good) {
    confset::CombinedOptions o;
    o.grid_nodes = config.grid_nodes.value_or(confset::kEmpiricalGridNodes);
    o.xi_grid_lo = config.grid_lo.value_or(confset::kPositivityFloor);
    o.xi_grid_hi = config.grid_hi.value_or(6.0);
    o.positivity_floor = config.floor;
    o.ls_mode = ls_mode_for(config, good);
    o.jitter_half_width = config.jitter;
    o.threads = config.threads;
    return o;
}

std::uint64_t good_seed(const RunConfig& config, std::size_t k) {
    return mix_seed(config.seed.value_or(0), k);
}

// One line of the interval table; status is OK, EMPTY or an error name.
struct IntervalLine {
    std::string good_id;
    confset::CombineMode mode;
    Interval interval;
    std::string status;
    std::size_t n = 0;
};

void write_interval(std::ostream& out, const IntervalLine& row) {
    out << row.good_id << ',' << confset::to_string(row.mode) << ',' << format_real(row.interval.level) << ',';
    if (row.status == "OK") {
        out << format_real(row.interval.lower) << ',' << format_real(row.interval.upper) << ','
            << format_real(row.interval.length());
    } else {
        out << ",,";
    }
    out << ',' << row.status << ',' << row.n << '\n';
}

int worst(int a, int b) { return std::max(a, b); }

// Per-good interval with module errors turned into a status, so one bad good
// does not stop the others.
IntervalLine interval_line(const GoodSample& good, double share, confset::CombineMode mode, std::uint64_t seed,
                           const confset::CombinedOptions& options, int& status) {
    IntervalLine row{good.good_id, mode, {}, "OK", good.size()};
    try {
        row.interval = confset::cs_combined(good, share, mode, seed, options);
        if (row.interval.empty) row.status = "EMPTY";
    } catch (const Error& e) {
        row.interval = Interval::make_empty(1.0 - share, IntervalSource::Box);
        row.status = std::string(qlw::to_string(e.kind()));
        status = worst(status, exit_code(e.kind()));
    }
    return row;
}

void print_table(std::ostream& out, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
    for (const auto& r : rows) {
        for (std::size_t c = 0; c < r.size() && c < width.size(); ++c) width[c] = std::max(width[c], r[c].size());
    }
    auto line = [&](const std::vector<std::string>& r) {
        for (std::size_t c = 0; c < r.size(); ++c) {
            out << (c ? "  " : "") << std::setw(static_cast<int>(width[c])) << r[c];
        }
        out << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
}

std::string fixed(double v, int digits = 3) {
    if (!std::isfinite(v)) return format_real(v);
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

}  // namespace

void RunConfig::set(std::string_view raw_key, std::string_view value) {
    std::string key = trim(raw_key);
    std::replace(key.begin(), key.end(), '_', '-');
    const std::string v = trim(value);

    if (key == "command") {
        command = v;
    } else if (key == "input") {
        input = v;
    } else if (key == "queries") {
        queries = v;
    } else if (key == "intervals") {
        intervals = v;
    } else if (key == "out") {
        if (v.empty()) bad(key, "empty path");
        out = v;
    } else if (key == "alpha") {
        const double a = real_value(key, v);
        if (!(a > 0.0 && a < 1.0)) bad(key, "must lie in (0, 1), got " + v);
        alpha = a;
    } else if (key == "grid-nodes") {
        const auto g = count_value(key, v);
        if (g < 2) bad(key, "needs at least 2 nodes, got " + v);
        grid_nodes = static_cast<std::size_t>(g);
    } else if (key == "grid-lo") {
        const double x = real_value(key, v);
        if (x < 0.0) bad(key, "must be >= 0, got " + v);
        grid_lo = x;
    } else if (key == "grid-hi") {
        const double x = real_value(key, v);
        if (!(x > 0.0)) bad(key, "must be > 0, got " + v);
        grid_hi = x;
    } else if (key == "mode") {
        if (v == "xi") mode = confset::CombineMode::XiOnly;
        else if (v == "ls") mode = confset::CombineMode::LsOnly;
        else if (v == "intersect") mode = confset::CombineMode::Intersect;
        else bad(key, "expected xi, ls or intersect, got '" + v + "'");
    } else if (key == "ls") {
        if (v == "auto") ls = LsChoice::Auto;
        else if (v == "ols") ls = LsChoice::Ols;
        else if (v == "tsls") ls = LsChoice::Tsls;
        else bad(key, "expected auto, ols or tsls, got '" + v + "'");
    } else if (key == "seed") {
        seed = count_value(key, v);
    } else if (key == "jitter") {
        const double h = real_value(key, v);
        if (h < 0.0) bad(key, "half-width must be >= 0, got " + v);
        jitter = h;
    } else if (key == "sum-to") {
        if (v.empty() || v == "none") {
            sum_to.reset();
            return;
        }
        const double s = real_value(key, v);
        if (!(s > 0.0)) bad(key, "must be > 0, got " + v);
        sum_to = s;
    } else if (key == "floor") {
        const double f = real_value(key, v);
        if (!(f > 0.0)) bad(key, "must be > 0, got " + v);
        floor = f;
    } else if (key == "reps") {
        const auto r = count_value(key, v);
        if (r < 1) bad(key, "needs at least 1 replication");
        reps = static_cast<std::size_t>(r);
    } else if (key == "table") {
        if (v != "1" && v != "2") bad(key, "expected 1 or 2, got '" + v + "'");
        table = v == "1" ? 1 : 2;
    } else if (key == "goods") {
        const auto k = count_value(key, v);
        if (k < 2) bad(key, "needs at least 2 goods, got " + v);
        goods = static_cast<std::size_t>(k);
    } else if (key == "n") {
        const auto m = count_value(key, v);
        if (m < 3) bad(key, "sample size must be >= 3, got " + v);
        n = static_cast<std::size_t>(m);
    } else if (key == "sample-sizes") {
        std::vector<std::size_t> sizes;
        for (const std::string& item : split_list(v)) {
            const auto m = count_value(key, item);
            if (m < 3) bad(key, "sample size must be >= 3, got " + item);
            sizes.push_back(static_cast<std::size_t>(m));
        }
        sample_sizes = std::move(sizes);
    } else if (key == "theta") {
        std::vector<double> t;
        for (const std::string& item : split_list(v)) {
            const double x = real_value(key, item);
            if (!(x > 0.0)) bad(key, "theta must be > 0, got " + item);
            t.push_back(x);
        }
        theta = std::move(t);
    } else if (key == "endogeneity") {
        if (v.empty() || v == "none") {
            endogeneity.reset();
            return;
        }
        const double m = real_value(key, v);
        if (!(m >= 0.0 && m <= 1.0)) bad(key, "must lie in [0, 1], got " + v);
        endogeneity = m;
    } else if (key == "threads") {
        const auto t = count_value(key, v);
        if (t > 4096) bad(key, "implausible thread count " + v);
        threads = static_cast<unsigned>(t);
    } else if (key == "profiles") {
        profiles = bool_value(key, v);
    } else if (key == "text-table") {
        text_table = bool_value(key, v);
    } else {
        bad(key, "unknown key");
    }
}

void RunConfig::validate() const {
    static const std::vector<std::string> commands{"ci", "welfare", "simulate", "mc", "diagnose"};
    if (std::find(commands.begin(), commands.end(), command) == commands.end()) {
        bad("command", "expected one of ci, welfare, simulate, mc, diagnose; got '" + command + "'");
    }
    if (grid_lo && grid_hi && !(*grid_hi > *grid_lo)) {
        bad("grid-hi", "must exceed grid-lo (" + format_real(*grid_lo) + "), got " + format_real(*grid_hi));
    }
    if ((command == "ci" || command == "diagnose") && input.empty()) bad("input", "required by " + command);
    if (command == "welfare") {
        if (queries.empty()) bad("queries", "required by welfare");
        if (input.empty() == intervals.empty()) bad("input", "welfare needs exactly one of input or intervals");
    }
    if ((command == "simulate" || command == "mc") && !seed) {
        bad("seed", command + " requires an explicit seed for reproducibility");
    }
}

RunConfig parse_config(std::istream& in, std::string_view source) {
    RunConfig config;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        const std::string body = trim(std::string_view(line).substr(0, hash));
        if (body.empty()) continue;
        const std::size_t eq = body.find('=');
        const std::string where = std::string(source) + ":" + std::to_string(line_no) + ": ";
        if (eq == std::string::npos) {
            throw Error(ErrorKind::ConfigError, where + "expected 'key = value', got '" + body + "'");
        }
        try {
            config.set(body.substr(0, eq), body.substr(eq + 1));
        } catch (const Error& e) {
            // Strip the "ConfigError: " prefix the constructor added.
            const std::string what = e.what();
            const std::size_t colon = what.find(": ");
            throw Error(e.kind(), where + (colon == std::string::npos ? what : what.substr(colon + 2)));
        }
    }
    return config;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ConfigError, "cannot open config file '" + path.string() + "'");
    return parse_config(in, path.string());
}

std::string to_text(const RunConfig& c) {
    const RunConfig d;
    std::ostringstream s;
    auto put = [&](std::string_view key, const std::string& value) { s << key << " = " << value << '\n'; };
    if (!c.command.empty()) put("command", c.command);
    if (!c.input.empty()) put("input", c.input.string());
    if (!c.queries.empty()) put("queries", c.queries.string());
    if (!c.intervals.empty()) put("intervals", c.intervals.string());
    if (c.out != d.out) put("out", c.out.string());
    if (c.alpha != d.alpha) put("alpha", format_real(c.alpha));
    if (c.grid_nodes) put("grid-nodes", std::to_string(*c.grid_nodes));
    if (c.grid_lo) put("grid-lo", format_real(*c.grid_lo));
    if (c.grid_hi) put("grid-hi", format_real(*c.grid_hi));
    if (c.mode != d.mode) put("mode", std::string(confset::to_string(c.mode)));
    if (c.ls != d.ls) put("ls", std::string(to_string(c.ls)));
    if (c.seed) put("seed", std::to_string(*c.seed));
    if (c.jitter != d.jitter) put("jitter", format_real(c.jitter));
    if (c.sum_to) put("sum-to", format_real(*c.sum_to));
    if (c.floor != d.floor) put("floor", format_real(c.floor));
    if (c.reps != d.reps) put("reps", std::to_string(c.reps));
    if (c.table != d.table) put("table", std::to_string(c.table));
    if (c.goods != d.goods) put("goods", std::to_string(c.goods));
    if (c.n != d.n) put("n", std::to_string(c.n));
    if (!c.sample_sizes.empty()) put("sample-sizes", join(c.sample_sizes));
    if (c.theta != d.theta) put("theta", join(c.theta));
    if (c.endogeneity) put("endogeneity", format_real(*c.endogeneity));
    if (c.threads != d.threads) put("threads", std::to_string(c.threads));
    if (c.profiles != d.profiles) put("profiles", c.profiles ? "true" : "false");
    if (c.text_table != d.text_table) put("text-table", c.text_table ? "true" : "false");
    return s.str();
}

int cmd_ci(const RunConfig& config, std::ostream& log) {
    const std::vector<GoodSample> goods = io::ingest_csv(config.input);
    const double share = confset::bonferroni_share(config.alpha, goods.size(), false);
    int status = 0;

    std::vector<IntervalLine> lines;
    for (std::size_t k = 0; k < goods.size(); ++k) {
        const GoodSample& good = goods[k];
        const std::uint64_t seed = good_seed(config, k);
        const confset::CombinedOptions options = combined_options(config, good);

        // The xi row goes through cs_xi directly so its profile can be dumped;
        // jitter matches what cs_combined would apply.
        GoodSample xi_sample = good;
        if (config.jitter > 0.0) {
            xi_sample.instrument = confset::smooth_instrument(good.independence_variable(), config.jitter, seed);
        }
        IntervalLine xi_line{good.good_id, confset::CombineMode::XiOnly, {}, "OK", good.size()};
        try {
            const confset::GridSpec grid{options.xi_grid_lo, options.xi_grid_hi, options.grid_nodes};
            const confset::XiConfidenceSet set = confset::cs_xi(xi_sample, share, grid, seed, {config.threads});
            xi_line.interval = set.interval;
            if (set.interval.empty) xi_line.status = "EMPTY";
            if (config.profiles) {
                std::ofstream p = create(config.out / "profiles" / ("profile_" + good.good_id + ".csv"));
                p << "theta_numeraire,stat_sqrt_n_xi,critical,level,accepted\n";
                for (std::size_t j = 0; j < set.profile.thetas.size(); ++j) {
                    p << format_real(set.profile.thetas[j]) << ',' << format_real(set.profile.stats[j]) << ','
                      << format_real(set.profile.critical) << ',' << format_real(1.0 - share) << ','
                      << (set.profile.stats[j] <= set.profile.critical ? 1 : 0) << '\n';
                }
            }
        } catch (const Error& e) {
            xi_line.interval = Interval::make_empty(1.0 - share, IntervalSource::Xi);
            xi_line.status = std::string(qlw::to_string(e.kind()));
            status = worst(status, exit_code(e.kind()));
        }
        lines.push_back(std::move(xi_line));
        lines.push_back(interval_line(good, share, confset::CombineMode::LsOnly, seed, options, status));
        lines.push_back(interval_line(good, share, confset::CombineMode::Intersect, seed, options, status));
    }

    {
        std::ofstream out = create(config.out / "intervals.csv");
        out << io::kIntervalHeader << '\n';
        for (const IntervalLine& row : lines) write_interval(out, row);
    }

    std::vector<std::vector<std::string>> table;
    for (const IntervalLine& row : lines) {
        const bool ok = row.status == "OK";
        table.push_back({row.good_id, std::string(confset::to_string(row.mode)), fixed(row.interval.level, 4),
                         ok ? fixed(row.interval.lower, 4) : "", ok ? fixed(row.interval.upper, 4) : "",
                         row.status});
    }
    const std::vector<std::string> header{"good", "mode", "level", "lower", "upper", "status"};
    print_table(log, header, table);
    if (config.text_table) {
        std::ofstream t = create(config.out / "intervals.txt");
        print_table(t, header, table);
    }
    return status;
}

int cmd_welfare(const RunConfig& config, std::ostream& log) {
    const io::QueryTable queries = io::read_queries(config.queries);
    const std::size_t K = queries.goods.size();
    const std::string mode(confset::to_string(config.mode));

    // Box of per-good intervals in the order of the query file's goods.
    std::vector<Interval> box(K);
    std::vector<std::string> box_status(K, "OK");
    int status = 0;
    if (!config.intervals.empty()) {
        std::vector<io::IntervalRow> rows = io::read_intervals(config.intervals);
        rows.erase(std::remove_if(rows.begin(), rows.end(), [&](const io::IntervalRow& r) { return r.mode != mode; }),
                   rows.end());
        const bool positional = rows.size() == K && std::none_of(rows.begin(), rows.end(), [&](const io::IntervalRow& r) {
                                    return std::find(queries.goods.begin(), queries.goods.end(), r.good_id) !=
                                           queries.goods.end();
                                });
        for (std::size_t k = 0; k < K; ++k) {
            const io::IntervalRow* hit = nullptr;
            if (positional) {
                hit = &rows[k];
            } else {
                for (const io::IntervalRow& r : rows) {
                    if (r.good_id == queries.goods[k]) hit = &r;
                }
            }
            if (!hit) {
                throw Error(ErrorKind::SchemaError,
                            "interval file has no '" + mode + "' row for good '" + queries.goods[k] + "'");
            }
            box[k] = hit->interval;
            box_status[k] = hit->status;
        }
    } else {
        const std::vector<GoodSample> goods = io::ingest_csv(config.input);
        if (goods.size() != K) {
            throw Error(ErrorKind::SchemaError, "query file has " + std::to_string(K) + " goods but data file has " +
                                                    std::to_string(goods.size()));
        }
        const double share = confset::bonferroni_share(config.alpha, K, false);
        for (std::size_t k = 0; k < K; ++k) {
            auto it = std::find_if(goods.begin(), goods.end(),
                                   [&](const GoodSample& g) { return g.good_id == queries.goods[k]; });
            if (it == goods.end()) it = goods.begin() + static_cast<std::ptrdiff_t>(k);
            const std::size_t index = static_cast<std::size_t>(it - goods.begin());
            const IntervalLine line =
                interval_line(*it, share, config.mode, good_seed(config, index), combined_options(config, *it), status);
            box[k] = line.interval;
            box_status[k] = line.status;
        }
    }
    for (std::size_t k = 0; k < K; ++k) {
        if (box_status[k] != "OK" && box_status[k] != "EMPTY") {
            log << "good " << queries.goods[k] << ": no interval (" << box_status[k] << ")\n";
        }
    }

    welfare::ConstraintSet constraints;
    constraints.box = box;
    constraints.sum_to = config.sum_to;
    constraints.positivity_floor = config.floor;
    const double level = constraints.joint_level();

    struct Result {
        welfare::WelfareBounds bounds;
        std::string status = "OK";
        int exit = 0;
    };
    std::vector<Result> results(queries.rows.size());
    parallel_for(results.size(), config.threads, [&](std::size_t i) {
        const io::QueryRow& q = queries.rows[i];
        Result& r = results[i];
        const bool box_missing = std::any_of(box_status.begin(), box_status.end(),
                                             [](const std::string& s) { return s != "OK" && s != "EMPTY"; });
        if (box_missing) {
            r.status = "NO_INTERVAL";
            return;
        }
        try {
            r.bounds = welfare::bounds(constraints, welfare::WelfareQuery{q.delta, q.y_star, config.alpha});
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::EmptyConfidenceSet) {
                r.status = "EMPTY";
            } else {
                r.status = std::string(qlw::to_string(e.kind()));
                r.exit = exit_code(e.kind());
            }
        }
    });

    std::vector<std::size_t> order(results.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const bool ok_a = results[a].status == "OK", ok_b = results[b].status == "OK";
        if (ok_a != ok_b) return ok_a;
        return ok_a && results[a].bounds.wl_max < results[b].bounds.wl_max;
    });

    std::ofstream out = create(config.out / "welfare.csv");
    out << "rank,id,wl_min_numeraire,wl_max_numeraire,level,min_certified,status\n";
    std::size_t rank = 0, empty = 0;
    for (std::size_t i : order) {
        const Result& r = results[i];
        status = worst(status, r.exit);
        if (r.status == "OK") {
            out << ++rank << ',' << queries.rows[i].id << ',' << format_real(r.bounds.wl_min) << ','
                << format_real(r.bounds.wl_max) << ',' << format_real(level) << ','
                << (r.bounds.min_certified ? 1 : 0) << ",OK\n";
        } else {
            if (r.status == "EMPTY") ++empty;
            out << ',' << queries.rows[i].id << ",,," << format_real(level) << ",," << r.status << '\n';
        }
    }
    log << "individuals: " << results.size() << ", bounded: " << rank << ", empty: " << empty
        << ", joint level: " << fixed(level, 4) << '\n';
    return status;
}

int cmd_simulate(const RunConfig& config, std::ostream& log) {
    simulate::DgpConfig dgp;
    dgp.theta = config.theta;
    dgp.n = config.n;
    dgp.endogeneity = config.endogeneity;
    dgp.seed = *config.seed;
    const simulate::SimulatedDraw draw = simulate::draw_sample(dgp);
    {
        std::ofstream out = create(config.out / "sample.csv");
        io::write_samples(out, draw.goods);
    }
    std::ofstream truth = create(config.out / "truth.csv");
    truth << "good_id,theta_numeraire\n";
    for (std::size_t k = 0; k < draw.goods.size(); ++k) {
        truth << draw.goods[k].good_id << ',' << format_real(config.theta[k]) << '\n';
    }
    log << "wrote " << draw.goods.size() << " goods x " << config.n << " rows to " << (config.out / "sample.csv").string()
        << '\n';
    return 0;
}

int cmd_mc(const RunConfig& config, std::ostream& log) {
    const std::uint64_t seed = *config.seed;
    if (config.table == 1) {
        simulate::Table1Options o;
        if (!config.sample_sizes.empty()) o.sample_sizes = config.sample_sizes;
        o.alpha = config.alpha;
        if (config.grid_nodes) o.grid_nodes = *config.grid_nodes;
        if (config.grid_lo) o.grid_lo = *config.grid_lo;
        if (config.grid_hi) o.grid_hi = *config.grid_hi;
        o.threads = config.threads;
        const simulate::Table1Report report = simulate::mc_table1(config.reps, seed, o);
        const double good_level = 1.0 - config.alpha / static_cast<double>(o.theta.size());

        std::ofstream goods_out = create(config.out / "table1_intervals.csv");
        goods_out << "n,good,theta_true_numeraire,mean_lower_numeraire,mean_upper_numeraire,mean_length_numeraire,"
                     "coverage,empty_sets,level,replications\n";
        std::ofstream welfare_out = create(config.out / "table1_welfare.csv");
        welfare_out << "n,constraint,mean_wl_max_numeraire,true_wl_numeraire,level,replications_used\n";
        std::vector<std::vector<std::string>> text;
        for (const simulate::Table1Row& row : report.rows) {
            std::vector<std::string> line{std::to_string(row.n)};
            for (std::size_t k = 0; k < row.goods.size(); ++k) {
                const simulate::GoodSummary& g = row.goods[k];
                goods_out << row.n << ",good" << k + 1 << ',' << format_real(g.theta) << ','
                          << format_real(g.mean_lower) << ',' << format_real(g.mean_upper) << ','
                          << format_real(g.mean_length) << ',' << format_real(g.coverage) << ',' << g.empty_sets
                          << ',' << format_real(good_level) << ',' << report.replications << '\n';
                line.push_back("[" + fixed(g.mean_lower) + ", " + fixed(g.mean_upper) + "]");
            }
            const simulate::WelfareSummary& w = row.welfare;
            const std::size_t used_i = report.replications - w.box_sum_infeasible;
            // Constraints i/ii use the confidence box (joint level 1 - alpha);
            // iii/iv only the parameter space, which holds with certainty.
            struct Constraint {
                const char* name;
                double value;
                double level;
                std::size_t used;
            };
            const Constraint constraints[] = {{"i", w.box_sum, 1.0 - config.alpha, used_i},
                                              {"ii", w.box_only, 1.0 - config.alpha, report.replications},
                                              {"iii", w.unit_sum, 1.0, report.replications},
                                              {"iv", w.unit_only, 1.0, report.replications}};
            for (const Constraint& c : constraints) {
                welfare_out << row.n << ',' << c.name << ',' << format_real(c.value) << ','
                            << format_real(w.true_loss) << ',' << format_real(c.level) << ',' << c.used << '\n';
                line.push_back(fixed(c.value));
            }
            text.push_back(std::move(line));
            log << "n=" << row.n << ": intervals " << fixed(row.seconds_intervals, 2) << " s, welfare "
                << fixed(row.seconds_welfare, 2) << " s (summed over workers)\n";
        }
        const std::vector<std::string> header{"n", "theta1", "theta2", "theta3", "i", "ii", "iii", "iv"};
        print_table(log, header, text);
        if (config.text_table) {
            std::ofstream t = create(config.out / "table1.txt");
            print_table(t, header, text);
        }
        return 0;
    }

    simulate::Table2Options o;
    if (!config.sample_sizes.empty()) o.sample_sizes = config.sample_sizes;
    o.alpha = config.alpha;
    if (config.grid_nodes) o.grid_nodes = *config.grid_nodes;
    if (config.grid_lo) o.grid_lo = *config.grid_lo;
    if (config.grid_hi) o.grid_hi = *config.grid_hi;
    o.threads = config.threads;
    const simulate::Table2Report report = simulate::mc_table2(config.goods, config.reps, seed, o);
    const double good_level = 1.0 - config.alpha / static_cast<double>(config.goods);

    std::ofstream out = create(config.out / "table2.csv");
    out << "goods,n,mean_length_numeraire,mean_wl_lower_numeraire,mean_wl_upper_numeraire,true_wl_numeraire,"
           "joint_coverage,good_coverage,bracket_failures,empty_sets,level,replications\n";
    std::vector<std::vector<std::string>> text;
    for (const simulate::Table2Row& row : report.rows) {
        out << report.goods << ',' << row.n << ',' << format_real(row.mean_length) << ','
            << format_real(row.mean_lower) << ',' << format_real(row.mean_upper) << ','
            << format_real(report.true_loss) << ',' << format_real(row.joint_coverage) << ','
            << format_real(row.good_coverage) << ',' << row.bracket_failures << ',' << row.empty_sets << ','
            << format_real(good_level) << ',' << report.replications << '\n';
        text.push_back({std::to_string(row.n), fixed(row.mean_length), fixed(row.mean_lower), fixed(row.mean_upper),
                        fixed(row.joint_coverage), std::to_string(row.bracket_failures)});
        log << "n=" << row.n << ": " << fixed(row.seconds_per_rep, 3) << " s per replication (interval stage)\n";
    }
    const std::vector<std::string> header{"n", "length", "wl_lower", "wl_upper", "coverage", "bracket_fail"};
    log << "true welfare loss: " << fixed(report.true_loss, 4) << '\n';
    print_table(log, header, text);
    if (config.text_table) {
        std::ofstream t = create(config.out / "table2.txt");
        print_table(t, header, text);
    }
    return 0;
}

int cmd_diagnose(const RunConfig& config, std::ostream& log) {
    const std::vector<GoodSample> goods = io::ingest_csv(config.input);
    const double share = confset::bonferroni_share(config.alpha, goods.size(), false);
    int status = 0;
    std::ofstream out = create(config.out / "diagnose.csv");
    out << "good_id,n,stat_at_zero,stat_at_inf,critical,level,case,ls_lower_numeraire,ls_upper_numeraire,"
           "intersect_lower_numeraire,intersect_upper_numeraire,status\n";
    std::vector<std::vector<std::string>> text;
    for (std::size_t k = 0; k < goods.size(); ++k) {
        const GoodSample& good = goods[k];
        const std::uint64_t seed = good_seed(config, k);
        GoodSample xi_sample = good;
        if (config.jitter > 0.0) {
            xi_sample.instrument = confset::smooth_instrument(good.independence_variable(), config.jitter, seed);
        }
        const confset::ShapeDiagnostic d = confset::shape_diagnostic(xi_sample, share, seed);
        const confset::CombinedOptions options = combined_options(config, good);
        const IntervalLine ls = interval_line(good, share, confset::CombineMode::LsOnly, seed, options, status);
        const IntervalLine both = interval_line(good, share, confset::CombineMode::Intersect, seed, options, status);
        auto ends = [](const IntervalLine& l) {
            return l.status == "OK" ? format_real(l.interval.lower) + ',' + format_real(l.interval.upper)
                                    : std::string(",");
        };
        const std::string row_status = ls.status != "OK" ? ls.status : both.status;
        out << good.good_id << ',' << good.size() << ',' << format_real(d.stat_at_zero) << ','
            << format_real(d.stat_at_inf) << ',' << format_real(d.critical) << ',' << format_real(1.0 - share) << ','
            << confset::to_string(d.case_id) << ',' << ends(ls) << ',' << ends(both) << ',' << row_status << '\n';
        text.push_back({good.good_id, fixed(d.stat_at_zero), fixed(d.stat_at_inf), fixed(d.critical),
                        std::string(confset::to_string(d.case_id))});
    }
    print_table(log, {"good", "stat(P,Z)", "stat(Y,Z)", "critical", "case"}, text);
    return status;
}

int run(const RunConfig& config, std::ostream& log, std::ostream& err) {
    try {
        config.validate();
        // Fail on an unusable output directory before any computation.
        std::filesystem::create_directories(config.out);
        if (config.command == "ci") return cmd_ci(config, log);
        if (config.command == "welfare") return cmd_welfare(config, log);
        if (config.command == "simulate") return cmd_simulate(config, log);
        if (config.command == "mc") return cmd_mc(config, log);
        return cmd_diagnose(config, log);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: ConfigError: " << e.what() << '\n';
        return exit_code(ErrorKind::ConfigError);
    }
}

}  // namespace qlw::cli
