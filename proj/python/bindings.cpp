#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bandclt/config.hpp"
#include "bandclt/errors.hpp"
#include "bandclt/experiment.hpp"
#include "bandclt/les.hpp"
#include "bandclt/matgen.hpp"
#include "bandclt/profiles.hpp"
#include "bandclt/theory.hpp"

namespace py = pybind11;
using namespace bandclt;

namespace {

VarianceMethod method_from(const std::string& s) {
  if (s == "closed") return VarianceMethod::ClosedForm;
  if (s == "convolution") return VarianceMethod::ConvolutionSeries;
  if (s == "fourier") return VarianceMethod::FourierSeries;
  if (s == "contour") return VarianceMethod::ContourQuadrature;
  throw ConfigError("unknown method '" + s + "'");
}

py::dict theory_dict(const TheoryVariance& v) {
  py::dict d;
  d["value"] = v.value;
  d["method"] = method_name(v.method);
  d["trunc_error"] = v.trunc_error;
  d["truncation"] = v.truncation;
  d["series_value"] = v.series_value ? py::cast(*v.series_value) : py::none();
  return d;
}

PeriodizedProfile periodized(const std::string& profile, double nu) { return {parse_profile(profile), nu}; }

}  // namespace

PYBIND11_MODULE(_bandclt, m) {
  m.doc() = "Linear eigenvalue statistics of non-Hermitian random band matrices";
  m.attr("__version__") = BANDCLT_VERSION;

  auto base_error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base_error.ptr());
  py::register_exception<DomainError>(m, "DomainError", base_error.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base_error.ptr());

  py::class_<VarianceProfile>(m, "VarianceProfile")
      .def_static("uniform", &VarianceProfile::uniform)
      .def_static("piecewise", &VarianceProfile::piecewise, py::arg("breaks"), py::arg("values"))
      .def_static("tabulated", &VarianceProfile::tabulated, py::arg("samples"))
      .def_static("parse", &parse_profile, py::arg("text"))
      .def("__call__", &VarianceProfile::operator())
      .def_property_readonly("normalization", &VarianceProfile::normalization)
      .def_property_readonly("sup", &VarianceProfile::sup)
      .def("transform", &VarianceProfile::transform, py::arg("freq"));

  py::class_<PeriodizedProfile>(m, "PeriodizedProfile")
      .def(py::init<VarianceProfile, double>(), py::arg("base"), py::arg("nu"))
      .def_property_readonly("nu", &PeriodizedProfile::nu)
      .def("evaluate", &PeriodizedProfile::evaluate, py::arg("x"))
      .def("fourier_coeff", &PeriodizedProfile::fourier_coeff, py::arg("k"))
      .def("fourier_transform", &PeriodizedProfile::fourier_transform, py::arg("t"))
      .def("self_convolution_at_zero", &PeriodizedProfile::self_convolution_at_zero, py::arg("l"),
           py::arg("grid_size") = 1024);

  py::enum_<Topology>(m, "Topology")
      .value("PeriodicNu", Topology::PeriodicNu)
      .value("PeriodicZero", Topology::PeriodicZero)
      .value("NonPeriodicZero", Topology::NonPeriodicZero);

  py::class_<BandSpec>(m, "BandSpec")
      .def(py::init([](std::size_t n, std::size_t b, const std::string& topology, const std::string& profile,
                       double nu) { return BandSpec(n, b, parse_topology(topology), periodized(profile, nu)); }),
           py::arg("n"), py::arg("b"), py::arg("topology") = "periodic-zero", py::arg("profile") = "uniform",
           py::arg("nu") = 0.0)
      .def_property_readonly("n", &BandSpec::n)
      .def_property_readonly("half_width", &BandSpec::half_width)
      .def_property_readonly("width", &BandSpec::width)
      .def_property_readonly("nu", &BandSpec::nu)
      .def_property_readonly("topology", [](const BandSpec& s) { return topology_name(s.topology()); });

  py::class_<BandMatrix>(m, "BandMatrix")
      .def_property_readonly("n", &BandMatrix::n)
      .def_property_readonly("half_width", &BandMatrix::half_width)
      .def_property_readonly("seed", &BandMatrix::seed)
      .def_property_readonly("replicate", &BandMatrix::replicate)
      .def("__getitem__", [](const BandMatrix& b, std::pair<std::size_t, std::size_t> ij) {
        return b(ij.first, ij.second);
      })
      .def("bands", [](const BandMatrix& b) { return std::vector<cplx>(b.bands().begin(), b.bands().end()); })
      .def("to_dense", [](const BandMatrix& b, std::size_t limit) { return to_dense(b, limit); },
           py::arg("dense_limit") = kDefaultDenseLimit);

  m.def("sample",
        [](const BandSpec& spec, std::uint64_t seed, std::size_t replicate) {
          return sample(spec, EntryLaw::ComplexStandardGaussian, seed, replicate);
        },
        py::arg("spec"), py::arg("seed") = 0, py::arg("replicate") = 0);
  m.def("band_index_set", &band_index_set, py::arg("spec"), py::arg("j"));

  m.def("trace_power", &trace_power, py::arg("m"), py::arg("l"));
  m.def("trace_powers", &trace_powers, py::arg("m"), py::arg("max_power"));
  m.def("les_delta",
        [](const BandMatrix& mat, const std::string& f, std::size_t limit) {
          return les_delta(mat, TestFunction::parse(f), limit).value;
        },
        py::arg("m"), py::arg("f"), py::arg("dense_limit") = kDefaultDenseLimit);
  m.def("spectrum", &spectrum, py::arg("m"), py::arg("dense_limit") = kDefaultDenseLimit);
  m.def("spectral_norm", &spectral_norm, py::arg("m"), py::arg("iters") = 50, py::arg("seed") = 0);
  m.def("resolvent_trace",
        [](const BandMatrix& mat, cplx z, const std::string& method, int terms) {
          const auto r = resolvent_trace(mat, z, method == "neumann" ? ResolventMethod::Neumann : ResolventMethod::LU,
                                         terms);
          return py::make_tuple(r.value, r.norm_estimate, r.well_separated);
        },
        py::arg("m"), py::arg("z"), py::arg("method") = "lu", py::arg("neumann_terms") = 40);

  m.def("sinc_power_integral", &sinc_power_integral, py::arg("l"));
  m.def("sinc_power_integral_exact", [](int l) { return sinc_power_integral_exact(l).str(); }, py::arg("l"));
  m.def("irwin_hall_pdf", &irwin_hall_pdf, py::arg("m"), py::arg("x"));
  m.def("eulerian", &eulerian, py::arg("n"), py::arg("m"));
  m.def("monomial_variance",
        [](int l, double nu, const std::string& profile, const std::string& method) {
          return theory_dict(monomial_variance(periodized(profile, nu), l, method_from(method)));
        },
        py::arg("l"), py::arg("nu") = 0.0, py::arg("profile") = "uniform", py::arg("method") = "closed");
  m.def("kernel",
        [](cplx z, cplx eta, double nu, const std::string& profile) {
          const auto v = CovarianceKernel(KernelParams(periodized(profile, nu)))(z, eta);
          return py::make_tuple(v.value, v.trunc_error);
        },
        py::arg("z"), py::arg("eta"), py::arg("nu") = 0.0, py::arg("profile") = "uniform");
  m.def("limiting_covariance",
        [](const std::string& fi, const std::string& fj, double nu, const std::string& profile, double epsilon,
           int nodes) {
          return theory_dict(limiting_covariance(TestFunction::parse(fi), TestFunction::parse(fj),
                                                 KernelParams(periodized(profile, nu)), {epsilon, nodes}));
        },
        py::arg("fi"), py::arg("fj"), py::arg("nu") = 0.0, py::arg("profile") = "uniform",
        py::arg("epsilon") = 0.25, py::arg("nodes") = 512);
  m.def("pseudo_covariance",
        [](const std::string& fi, const std::string& fj, double nu, const std::string& profile) {
          return pseudo_covariance(TestFunction::parse(fi), TestFunction::parse(fj),
                                   KernelParams(periodized(profile, nu)));
        },
        py::arg("fi"), py::arg("fj"), py::arg("nu") = 0.0, py::arg("profile") = "uniform");

  m.def("bandwidth_from_exponent", &bandwidth_from_exponent, py::arg("n"), py::arg("exponent"));
  m.def("run_experiment",
        [](const std::string& config_json) {
          ExperimentReport rep;
          {
            py::gil_scoped_release release;
            rep = run(parse_config(config_json));
          }
          return py::make_tuple(report_json(rep), samples_csv(rep));
        },
        py::arg("config_json"), "Run an experiment; returns (report_json, samples_csv).");
}
