#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "qlw/confset.hpp"
#include "qlw/errors.hpp"
#include "qlw/io.hpp"
#include "qlw/regress.hpp"
#include "qlw/simulate.hpp"
#include "qlw/welfare.hpp"
#include "qlw/xicor.hpp"

namespace py = pybind11;
using namespace qlw;

namespace {

confset::CombineMode combine_mode(const std::string& name) {
    if (name == "xi") return confset::CombineMode::XiOnly;
    if (name == "ls") return confset::CombineMode::LsOnly;
    if (name == "intersect") return confset::CombineMode::Intersect;
    throw Error(ErrorKind::ConfigError, "mode must be 'xi', 'ls' or 'intersect', got '" + name + "'");
}

regress::FitMode fit_mode(const std::string& name) {
    if (name == "ols") return regress::FitMode::Ols;
    if (name == "tsls") return regress::FitMode::Tsls;
    throw Error(ErrorKind::ConfigError, "fit mode must be 'ols' or 'tsls', got '" + name + "'");
}

// Accepts Interval objects or (lower, upper) pairs.
std::vector<Interval> as_box(const py::sequence& box, double level) {
    std::vector<Interval> out;
    for (const py::handle item : box) {
        if (py::isinstance<Interval>(item)) {
            out.push_back(item.cast<Interval>());
        } else {
            const auto pair = item.cast<std::pair<double, double>>();
            out.push_back(Interval::make(pair.first, pair.second, level, IntervalSource::Box));
        }
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Confidence bounds on individual welfare loss (C++ core)";

    // Messages read "<Kind>: <detail>", matching the CLI's error lines.
    py::register_exception<Error>(m, "QlwError", PyExc_ValueError);

    py::enum_<IntervalSource>(m, "IntervalSource")
        .value("XI", IntervalSource::Xi)
        .value("LEAST_SQUARES", IntervalSource::LeastSquares)
        .value("INTERSECT", IntervalSource::Intersect)
        .value("BOX", IntervalSource::Box);

    py::class_<Interval>(m, "Interval")
        .def(py::init(&Interval::make), py::arg("lower"), py::arg("upper"), py::arg("level") = 0.9,
             py::arg("source") = IntervalSource::Box)
        .def_readonly("lower", &Interval::lower)
        .def_readonly("upper", &Interval::upper)
        .def_readonly("level", &Interval::level)
        .def_readonly("empty", &Interval::empty)
        .def_property_readonly("source", [](const Interval& i) { return std::string(to_string(i.source)); })
        .def("contains", &Interval::contains)
        .def("length", &Interval::length)
        .def("__repr__", [](const Interval& i) {
            if (i.empty) return std::string("Interval(empty)");
            return "Interval(" + std::to_string(i.lower) + ", " + std::to_string(i.upper) +
                   ", level=" + std::to_string(i.level) + ")";
        });

    py::class_<GoodSample>(m, "GoodSample")
        .def(py::init([](std::string id, std::vector<double> price, std::vector<double> quantity,
                         std::optional<std::vector<double>> instrument) {
                 GoodSample g{std::move(id), std::move(price), std::move(quantity), std::move(instrument)};
                 g.validate();
                 return g;
             }),
             py::arg("good_id"), py::arg("price"), py::arg("quantity"), py::arg("instrument") = py::none())
        .def_readonly("good_id", &GoodSample::good_id)
        .def_readonly("price", &GoodSample::price)
        .def_readonly("quantity", &GoodSample::quantity)
        .def_readonly("instrument", &GoodSample::instrument)
        .def("__len__", &GoodSample::size);

    py::class_<xicor::XiReport>(m, "XiReport")
        .def_readonly("xi", &xicor::XiReport::xi)
        .def_readonly("n", &xicor::XiReport::n)
        .def_readonly("normalized", &xicor::XiReport::normalized)
        .def_readonly("ties_broken", &xicor::XiReport::ties_broken);

    m.def(
        "xi",
        [](const std::vector<double>& first, const std::vector<double>& second, std::uint64_t seed) {
            return xicor::xi({first, second}, seed);
        },
        py::arg("first"), py::arg("second"), py::arg("seed") = 0,
        "Chatterjee's xi_n(first, second); ties in `first` are broken at random from `seed`.");
    m.def("critical_value", &xicor::critical_value, py::arg("alpha"));

    py::class_<regress::LsFit>(m, "LsFit")
        .def_readonly("beta_hat", &regress::LsFit::beta_hat)
        .def_readonly("intercept_hat", &regress::LsFit::intercept_hat)
        .def_readonly("se_beta", &regress::LsFit::se_beta)
        .def_readonly("n", &regress::LsFit::n)
        .def_readonly("weak_first_stage", &regress::LsFit::weak_first_stage);
    m.def(
        "fit_inverse_demand",
        [](const GoodSample& g, const std::string& mode) { return regress::fit_inverse_demand(g, fit_mode(mode)); },
        py::arg("sample"), py::arg("mode") = "ols");
    m.def("theta_interval_delta", &regress::theta_interval_delta, py::arg("fit"), py::arg("level"));

    py::class_<confset::XiProfile>(m, "XiProfile")
        .def_readonly("thetas", &confset::XiProfile::thetas)
        .def_readonly("stats", &confset::XiProfile::stats)
        .def_readonly("critical", &confset::XiProfile::critical)
        .def_readonly("accepted_segments", &confset::XiProfile::accepted_segments);
    py::class_<confset::XiConfidenceSet>(m, "XiConfidenceSet")
        .def_readonly("interval", &confset::XiConfidenceSet::interval)
        .def_readonly("profile", &confset::XiConfidenceSet::profile);

    m.def(
        "cs_xi",
        [](const GoodSample& g, double alpha, double lo, double hi, std::size_t nodes, std::uint64_t seed,
           unsigned threads) {
            return confset::cs_xi(g, alpha, {lo, hi, nodes}, seed, {threads});
        },
        py::arg("sample"), py::arg("alpha"), py::arg("lo") = 0.001, py::arg("hi") = 1.0, py::arg("nodes") = 1000,
        py::arg("seed") = 0, py::arg("threads") = 1, py::call_guard<py::gil_scoped_release>());
    m.def(
        "cs_combined",
        [](const GoodSample& g, double alpha_share, const std::string& mode, std::uint64_t seed,
           std::size_t grid_nodes, double grid_lo, double grid_hi, const std::string& ls, double jitter,
           unsigned threads) {
            confset::CombinedOptions o;
            o.grid_nodes = grid_nodes;
            o.xi_grid_lo = grid_lo;
            o.xi_grid_hi = grid_hi;
            o.ls_mode = fit_mode(ls);
            o.jitter_half_width = jitter;
            o.threads = threads;
            py::gil_scoped_release release;
            return confset::cs_combined(g, alpha_share, combine_mode(mode), seed, o);
        },
        py::arg("sample"), py::arg("alpha_share"), py::arg("mode") = "intersect", py::arg("seed") = 0,
        py::arg("grid_nodes") = confset::kEmpiricalGridNodes, py::arg("grid_lo") = confset::kPositivityFloor,
        py::arg("grid_hi") = 6.0, py::arg("ls") = "ols", py::arg("jitter") = 0.0, py::arg("threads") = 1);
    m.def("xi_statistic", &confset::xi_statistic, py::arg("sample"), py::arg("theta"), py::arg("seed") = 0);
    m.def("intersect", &confset::intersect);
    m.def("bonferroni_share", &confset::bonferroni_share, py::arg("alpha"), py::arg("goods"),
          py::arg("intersecting") = false);

    py::class_<confset::ShapeDiagnostic>(m, "ShapeDiagnostic")
        .def_readonly("stat_at_zero", &confset::ShapeDiagnostic::stat_at_zero)
        .def_readonly("stat_at_inf", &confset::ShapeDiagnostic::stat_at_inf)
        .def_readonly("critical", &confset::ShapeDiagnostic::critical)
        .def_property_readonly("case", [](const confset::ShapeDiagnostic& d) {
            return std::string(confset::to_string(d.case_id));
        });
    m.def("shape_diagnostic", &confset::shape_diagnostic, py::arg("sample"), py::arg("alpha"), py::arg("seed") = 0);

    m.def(
        "welfare_loss",
        [](const std::vector<double>& theta, const std::vector<double>& delta, const std::vector<double>& y_star) {
            return welfare::welfare_loss(theta, {delta, y_star, 0.1});
        },
        py::arg("theta"), py::arg("delta"), py::arg("y_star"));

    py::class_<welfare::WelfareBounds>(m, "WelfareBounds")
        .def_readonly("wl_min", &welfare::WelfareBounds::wl_min)
        .def_readonly("wl_max", &welfare::WelfareBounds::wl_max)
        .def_readonly("level", &welfare::WelfareBounds::level)
        .def_readonly("argmax_theta", &welfare::WelfareBounds::argmax_theta)
        .def_readonly("argmin_theta", &welfare::WelfareBounds::argmin_theta)
        .def_readonly("kkt_residual", &welfare::WelfareBounds::kkt_residual)
        .def_readonly("min_certified", &welfare::WelfareBounds::min_certified);
    m.def(
        "welfare_bounds",
        [](const py::sequence& box, const std::vector<double>& delta, const std::vector<double>& y_star,
           std::optional<double> sum_to, double floor, double level) {
            welfare::ConstraintSet cs{as_box(box, level), sum_to, floor};
            return welfare::bounds(cs, {delta, y_star, 0.1});
        },
        py::arg("box"), py::arg("delta"), py::arg("y_star"), py::arg("sum_to") = py::none(),
        py::arg("floor") = confset::kPositivityFloor, py::arg("level") = 1.0,
        "Min and max of the welfare loss over a box of theta intervals, optionally with sum(theta) = sum_to. "
        "Box entries are Interval objects or (lower, upper) pairs (the latter held at `level`).");

    m.def(
        "draw_sample",
        [](std::vector<double> theta, std::size_t n, std::uint64_t seed, std::optional<double> endogeneity,
           std::uint64_t replication) {
            simulate::DgpConfig c{std::move(theta), n, endogeneity, seed};
            auto d = simulate::draw_sample(c, replication);
            return py::make_tuple(d.goods, d.shocks);
        },
        py::arg("theta"), py::arg("n"), py::arg("seed"), py::arg("endogeneity") = py::none(),
        py::arg("replication") = 0, "Returns (goods, shocks) for one synthetic data set.");

    m.def("ingest_csv", &io::ingest_csv, py::arg("path"));
}
