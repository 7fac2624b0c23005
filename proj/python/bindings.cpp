#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rdness/error.hpp"
#include "rdness/exact.hpp"
#include "rdness/experiments.hpp"
#include "rdness/flows.hpp"
#include "rdness/localeq.hpp"
#include "rdness/simulate.hpp"
#include "rdness/spde.hpp"
#include "rdness/theory.hpp"

namespace py = pybind11;
using namespace rdness;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

ModelParams make_params(double a, double b, double lambda, int d, int n) {
    ModelParams p{a, b, lambda, d, n};
    p.validate();
    return p;
}

py::dict stream_to_dict(const SampleStream& s) {
    py::dict out;
    out["replica"] = s.replica;
    out["times"] = to_array(s.times);
    out["densities"] = to_array(s.densities);
    std::vector<std::array<int, 3>> ks(s.mode_set.begin(), s.mode_set.end());
    out["modes_k"] = ks;
    const auto m = static_cast<py::ssize_t>(s.mode_set.size());
    py::array_t<std::complex<double>> modes({static_cast<py::ssize_t>(s.size()), m});
    auto w = modes.mutable_unchecked<2>();
    for (py::ssize_t i = 0; i < static_cast<py::ssize_t>(s.size()); ++i)
        for (py::ssize_t j = 0; j < m; ++j) w(i, j) = s.mode(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    out["modes"] = modes;
    if (s.box_radius >= 0) {
        py::array_t<std::uint32_t> pc({static_cast<py::ssize_t>(s.size()), static_cast<py::ssize_t>(s.pattern_space)});
        std::copy(s.pattern_counts.begin(), s.pattern_counts.end(), pc.mutable_data());
        out["pattern_counts"] = pc;
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Reaction-diffusion exclusion process: closed forms, exact solver, simulator";
    m.attr("__version__") = kLibraryVersion;

    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
    py::register_exception<SizeError>(m, "SizeError", PyExc_ValueError);
    py::register_exception<ConsistencyError>(m, "ConsistencyError", PyExc_RuntimeError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init(&make_params), py::arg("a") = 1.0, py::arg("b") = 1.0, py::arg("lam") = 0.0, py::arg("d") = 1,
             py::arg("n") = 16)
        .def_readwrite("a", &ModelParams::a)
        .def_readwrite("b", &ModelParams::b)
        .def_readwrite("lam", &ModelParams::lambda)
        .def_readwrite("d", &ModelParams::d)
        .def_readwrite("n", &ModelParams::n)
        .def("validate", &ModelParams::validate)
        .def_property_readonly("eps0", &ModelParams::eps0)
        .def_property_readonly("c_max", &ModelParams::c_max)
        .def("__repr__", [](const ModelParams& p) {
            return "ModelParams(a=" + std::to_string(p.a) + ", b=" + std::to_string(p.b) + ", lam=" +
                   std::to_string(p.lambda) + ", d=" + std::to_string(p.d) + ", n=" + std::to_string(p.n) + ")";
        });

    py::class_<FixedPoint>(m, "FixedPoint")
        .def_readonly("rho", &FixedPoint::rho)
        .def_readonly("chi", &FixedPoint::chi)
        .def_readonly("slope", &FixedPoint::slope)
        .def_readonly("noise", &FixedPoint::noise)
        .def_readonly("eps0", &FixedPoint::eps0)
        .def_readonly("kappa", &FixedPoint::kappa)
        .def_property_readonly("excess", &FixedPoint::excess);

    m.def("reaction_drift", &reaction_drift, py::arg("rho"), py::arg("p"));
    m.def("reaction_noise", &reaction_noise, py::arg("rho"), py::arg("p"));
    m.def("rho_star", &rho_star, py::arg("p"));
    m.def("fixed_point", &fixed_point, py::arg("p"));
    m.def("mode_variance", py::overload_cast<double, const ModelParams&>(&mode_variance), py::arg("k2"), py::arg("p"));
    m.def("mode_rate", [](double k2, const ModelParams& p) { return mode_rate(k2, fixed_point(p)); }, py::arg("k2"),
          py::arg("p"));
    m.def("xi", &xi, py::arg("r"));
    m.def("gaussian_entropy_sum", &gaussian_entropy_sum, py::arg("p"), py::arg("cutoff"));
    m.def("green_scale", &green_scale, py::arg("n"), py::arg("d"));

    m.def("stationary_distribution", [](const ModelParams& p) {
        return to_array(stationary_distribution(build_generator(p)));
    }, py::arg("p"), "Exact stationary law over configuration codes (n^d <= 16).");
    m.def("product_measure", [](int d, int n, double rho) { return to_array(product_measure(Torus(d, n), rho)); },
          py::arg("d"), py::arg("n"), py::arg("rho"));
    m.def("adjoint_one", [](const ModelParams& p) {
        const auto r = adjoint_one(p);
        py::dict out;
        out["density_ratio"] = to_array(r.density_ratio);
        out["closed_form"] = to_array(r.closed_form);
        out["matrix"] = to_array(r.matrix);
        out["max_residual"] = r.max_residual;
        return out;
    }, py::arg("p"));
    m.def("relative_entropy", [](const std::vector<double>& mu, const std::vector<double>& nu) {
        return relative_entropy(mu, nu);
    }, py::arg("mu"), py::arg("nu"));
    m.def("total_variation", [](const std::vector<double>& mu, const std::vector<double>& nu) {
        return total_variation(mu, nu);
    }, py::arg("mu"), py::arg("nu"));
    m.def("product_marginal", [](int d, int radius, double rho) { return to_array(product_marginal(d, radius, rho)); },
          py::arg("d"), py::arg("radius"), py::arg("rho"));

    m.def("simulate", [](const ModelParams& p, std::uint64_t seed, double total_time, double interval, int replicas,
                         int mode_cutoff, int box_radius, double burn_in, int threads) {
        SimConfig c;
        c.params = p;
        c.seed = seed;
        c.total_time = total_time;
        c.sample_interval = interval;
        c.replicas = replicas;
        c.mode_cutoff = mode_cutoff;
        c.box_radius = box_radius;
        c.burn_in = burn_in;
        c.threads = threads;
        RunResult r;
        {
            py::gil_scoped_release release;
            r = run(c);
        }
        py::list out;
        for (const auto& s : r.replicas) out.append(stream_to_dict(s));
        return out;
    }, py::arg("p"), py::arg("seed") = 1, py::arg("total_time") = 10.0, py::arg("interval") = 0.1,
       py::arg("replicas") = 1, py::arg("mode_cutoff") = 0, py::arg("box_radius") = -1,
       py::arg("burn_in") = std::numeric_limits<double>::quiet_NaN(), py::arg("threads") = 1,
       "Stationary sample streams, one dict per replica.");

    m.def("flow_energy", [](int ell, int n, int d, bool minimal) {
        return build_flow(ell, n, d, minimal ? FlowKind::MinimalEnergy : FlowKind::Sweep).energy();
    }, py::arg("ell"), py::arg("n"), py::arg("d"), py::arg("minimal") = false);

    m.def("sample_gaussian_field", [](const ModelParams& p, int cutoff, std::uint64_t seed) {
        CounterRng rng(seed);
        const auto s = sample_stationary(p, cutoff, rng);
        std::vector<std::array<int, 3>> ks(s.ks.begin(), s.ks.end());
        return py::make_tuple(ks, s.coef, to_array(s.variance));
    }, py::arg("p"), py::arg("cutoff"), py::arg("seed") = 1);
}
