#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tentshadow/error.hpp"
#include "tentshadow/maps.hpp"
#include "tentshadow/measures.hpp"
#include "tentshadow/perturbation.hpp"
#include "tentshadow/shadowing.hpp"
#include "tentshadow/stochshadow.hpp"
#include "tentshadow/transfer.hpp"

namespace py = pybind11;
using namespace tentshadow;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

std::vector<double> to_vector(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    require(a.ndim() == 1, "expected a one-dimensional array");
    return {a.data(), a.data() + a.size()};
}

py::array_t<double> density_array(const DensityVector& rho) {
    return py::array_t<double>(rho.values().size(), rho.values().data());
}

UlamOperator make_operator(double s, std::size_t bins, std::optional<double> eps) {
    TentMap f(s);
    return eps ? perturbed_operator(f, bins, *eps) : ulam_matrix(f, bins);
}

} // namespace

PYBIND11_MODULE(_tentshadow, m) {
    m.doc() = "Tent-map pseudotrajectories, transfer operators and shadowing experiments";
    m.attr("__version__") = TENTSHADOW_VERSION;

    auto base = py::register_exception<Error>(m, "TentshadowError", PyExc_RuntimeError);
    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    py::class_<TentMap>(m, "TentMap")
        .def(py::init<double>(), py::arg("slope"))
        .def_property_readonly("slope", &TentMap::slope)
        .def("__call__", &TentMap::operator(), py::arg("x"))
        .def("__repr__", [](const TentMap& f) { return "TentMap(" + std::to_string(f.slope()) + ")"; });

    m.def(
        "orbit", [](double s, double x0, std::size_t n) { return to_array(orbit(TentMap(s), x0, n)); },
        py::arg("s"), py::arg("x0"), py::arg("n"));
    m.def(
        "detect_periodic_parameter",
        [](double s, std::size_t n_max, double tol) {
            auto r = detect_periodic_parameter(TentMap(s), n_max, tol);
            py::dict d;
            d["period"] = r.period ? py::cast(*r.period) : py::none();
            d["xi"] = r.xi ? py::cast(*r.xi) : py::none();
            return d;
        },
        py::arg("s"), py::arg("n_max"), py::arg("tol") = 1e-12);
    m.def(
        "find_periodic_parameter",
        [](std::size_t n, double lo, double hi) { return find_periodic_parameter(n, Interval(lo, hi)); },
        py::arg("n"), py::arg("lo"), py::arg("hi"));
    m.def(
        "capture_time", [](double s, double delta, double eps) { return capture_time(TentMap(s), delta, eps); },
        py::arg("s"), py::arg("delta"), py::arg("eps"));
    m.def(
        "tube_return_time",
        [](double s, double delta, std::size_t m_max) { return tube_return_time(TentMap(s), delta, m_max); },
        py::arg("s"), py::arg("delta"), py::arg("m_max") = 1000);

    m.def(
        "gen_realization",
        [](double s, double eps, double x0, std::size_t n, std::uint64_t seed, std::uint64_t stream) {
            return to_array(gen_realization(TentMap(s), UniformKernel(eps), x0, n, seed, stream).points);
        },
        py::arg("s"), py::arg("eps"), py::arg("x0"), py::arg("n"), py::arg("seed"), py::arg("stream") = 0);
    m.def(
        "adversarial_pseudotrajectory",
        [](double s, double eps, std::size_t n) {
            auto t = adversarial_pseudotrajectory(TentMap(s), eps, n);
            return py::make_tuple(to_array(t.points), t.direction);
        },
        py::arg("s"), py::arg("eps"), py::arg("n"));
    m.def(
        "is_admissible",
        [](double s, const py::array_t<double, py::array::c_style | py::array::forcecast>& traj, double eps) {
            auto pts = to_vector(traj);
            return check_admissible(pts, TentMap(s), eps).admissible;
        },
        py::arg("s"), py::arg("traj"), py::arg("eps"));

    m.def(
        "ulam_matrix",
        [](double s, std::size_t bins, std::optional<double> eps) {
            auto op = make_operator(s, bins, eps);
            py::array_t<double> dense({bins, bins});
            auto view = dense.mutable_unchecked<2>();
            for (std::size_t i = 0; i < bins; ++i)
                for (std::size_t j = 0; j < bins; ++j) view(i, j) = 0.0;
            for (Eigen::Index i = 0; i < op.matrix.outerSize(); ++i)
                for (SparseMatrix::InnerIterator it(op.matrix, i); it; ++it) view(it.row(), it.col()) = it.value();
            return dense;
        },
        py::arg("s"), py::arg("bins"), py::arg("eps") = py::none());
    m.def(
        "stationary_density",
        [](double s, std::size_t bins, std::optional<double> eps, double tol, std::size_t max_iter) {
            return density_array(stationary_density(make_operator(s, bins, eps), tol, max_iter).density);
        },
        py::arg("s"), py::arg("bins"), py::arg("eps") = py::none(), py::arg("tol") = 1e-12,
        py::arg("max_iter") = 200000);
    m.def(
        "correlations",
        [](double s, double eps, const std::string& phi, std::size_t n_max) {
            auto op = perturbed_operator(TentMap(s), BinsRule{}.bins_for(eps), eps);
            auto rho = stationary_density(op).density;
            return to_array(correlation_sequence(op, rho, observable(phi), observable(phi), n_max));
        },
        py::arg("s"), py::arg("eps"), py::arg("phi") = "x", py::arg("n_max") = 30);
    m.def(
        "stability_slope",
        [](double s, const std::vector<double>& eps_grid) {
            auto fit = stability_speed_fit(TentMap(s), eps_grid);
            return py::make_tuple(fit.slope, fit.r_squared);
        },
        py::arg("s"), py::arg("eps_grid"));

    m.def(
        "shadow_search",
        [](double s, const py::array_t<double, py::array::c_style | py::array::forcecast>& traj, double accuracy,
           std::optional<std::size_t> horizon) {
            auto pts = to_vector(traj);
            require(!pts.empty(), "empty trajectory");
            auto res = shadow_search(TentMap(s), pts, accuracy, horizon.value_or(pts.size() - 1));
            py::dict d;
            d["point"] = res.point ? py::cast(*res.point) : py::none();
            d["achieved"] = res.achieved;
            d["failed_at"] = res.failed_at ? py::cast(*res.failed_at) : py::none();
            d["orbit"] = to_array(res.orbit);
            return d;
        },
        py::arg("s"), py::arg("traj"), py::arg("accuracy"), py::arg("horizon") = py::none());
    m.def("cky_constant", &cky_constant, py::arg("s"), py::arg("m"));
    m.def(
        "lower_bound",
        [](double s, double eps) {
            auto r = lower_bound_demo(TentMap(s), eps);
            return py::make_tuple(r.n_eps, r.bound);
        },
        py::arg("s"), py::arg("eps"));
    m.def(
        "periodic_points",
        [](double s, std::size_t n, bool primitive_only) {
            std::vector<double> pts;
            for (const auto& p : periodic_points(TentMap(s), n, primitive_only)) pts.push_back(p.point);
            return to_array(pts);
        },
        py::arg("s"), py::arg("n"), py::arg("primitive_only") = false);

    m.def(
        "stochastic_shadowing",
        [](double s, double eps, const std::string& phi, std::size_t n, std::size_t trials, std::uint64_t seed,
           std::size_t threads) {
            StochShadowOptions opts;
            opts.threads = threads;
            ExperimentReport rep;
            {
                py::gil_scoped_release release;
                rep = stochastic_shadowing_trial(TentMap(s), eps, observable(phi), n, trials, seed, opts);
            }
            py::list triples;
            for (const auto& r : rep.records)
                triples.append(py::make_tuple(r.triple.d_pseudo_stat, r.triple.d_true_inv, r.triple.d_pseudo_true));
            py::dict d;
            d["fraction_in_b"] = rep.fraction_in_b;
            d["c_phi_estimate"] = rep.c_phi_estimate;
            d["triples"] = triples;
            return d;
        },
        py::arg("s"), py::arg("eps"), py::arg("phi"), py::arg("n"), py::arg("trials"), py::arg("seed"),
        py::arg("threads") = 0);
    m.def("observable_ids", &observable_ids);
}
