// Python bindings for the network-construction library: the network type and
// its calculus, the problem catalog with its reference solutions, calibration,
// the Monte-Carlo construction itself, and the closed-form constants.

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <string>
#include <vector>

#include "kolmonet/calculus.hpp"
#include "kolmonet/common.hpp"
#include "kolmonet/constructor.hpp"
#include "kolmonet/network.hpp"
#include "kolmonet/oracle.hpp"
#include "kolmonet/sde.hpp"
#include "kolmonet/verify.hpp"

namespace py = pybind11;
using namespace kolmo;

namespace {

std::vector<long> arch_list(const NeuralNetwork& net) {
  std::vector<long> dims;
  for (Eigen::Index v : architecture(net).dims) dims.push_back(static_cast<long>(v));
  return dims;
}

py::dict error_report_dict(const ErrorReport& rep) {
  py::dict d;
  d["lp_error"] = rep.lp_error;
  d["stderr"] = rep.stderr_;
  d["max_abs_error"] = rep.max_abs_error;
  d["probes"] = rep.probes;
  d["p"] = rep.p;
  d["params"] = rep.params;
  return d;
}

}  // namespace

PYBIND11_MODULE(kolmonet, m) {
  m.doc() =
      "Explicit deep ReLU network construction for Kolmogorov PDEs: network "
      "calculus, problem catalog, calibration, and Monte-Carlo builds.";

  py::class_<NeuralNetwork>(m, "Network",
                            "Immutable ReLU network stored as explicit "
                            "weight/bias layers.")
      .def("depth", &NeuralNetwork::depth)
      .def("input_dim", &NeuralNetwork::input_dim)
      .def("output_dim", &NeuralNetwork::output_dim)
      .def("param_count",
           [](const NeuralNetwork& net) { return param_count(net); })
      .def("arch", &arch_list, "Layer widths (l_0, ..., l_L).")
      .def(
          "realize",
          [](const NeuralNetwork& net, const Eigen::VectorXd& x) {
            return realize(net, x);
          },
          py::arg("x"))
      .def(
          "realize_batch",
          [](const NeuralNetwork& net, const Eigen::MatrixXd& X) {
            return realize_batch(net, X);
          },
          py::arg("X"), "Columns are inputs; column j of the result is net(X[:,j]).")
      .def("to_json", [](const NeuralNetwork& net) { return to_json(net); })
      .def(
          "save", [](const NeuralNetwork& net, const std::string& path) {
            save_network(net, path);
          },
          py::arg("path"))
      .def_static(
          "load", [](const std::string& path) { return load_network(path); },
          py::arg("path"));

  m.def("from_json", &from_json, py::arg("text"));

  // Network calculus.
  m.def("relu_identity", &relu_identity, py::arg("d"),
        "Exact identity on R^d with architecture (d, 2d, d).");
  m.def("weighted_sum", &weighted_sum, py::arg("nets"), py::arg("weights"),
        "Parallel sum realizing sum_m w_m nets[m](x).");
  m.def("compose", &compose, py::arg("outer"), py::arg("inner"), py::arg("id_net"),
        "Composition glued through an identity block.");
  m.def("residual_step", &residual_step, py::arg("accum"), py::arg("increment"),
        py::arg("id_net"), "Realizes x -> accum(x) + increment(accum(x)).");
  m.def("linear_net", &linear_net, py::arg("S"));
  m.def("zero_net", &zero_net, py::arg("d"));
  m.def("sum_coords_net", &sum_coords_net, py::arg("d"));
  m.def("max_coords_net", &max_coords_net, py::arg("d"));

  // Problem catalog and oracles.
  py::class_<CatalogEntry>(m, "Problem",
                           "A catalog PDE instance bundled with its reference "
                           "solution.")
      .def_property_readonly(
          "name", [](const CatalogEntry& e) { return e.problem.name; })
      .def_property_readonly("dim",
                             [](const CatalogEntry& e) { return e.problem.d; })
      .def_property_readonly("T", [](const CatalogEntry& e) { return e.problem.T; })
      .def_property_readonly(
          "drift_net", [](const CatalogEntry& e) { return *e.problem.drift_net; })
      .def_property_readonly(
          "f0_net", [](const CatalogEntry& e) { return *e.problem.f0_net; })
      .def(
          "validate",
          [](const CatalogEntry& e, std::uint64_t seed) {
            validate_problem(e.problem, seed);
          },
          py::arg("seed") = 0)
      .def(
          "reference_value",
          [](const CatalogEntry& e, const Eigen::VectorXd& x) {
            return reference_value(e, x);
          },
          py::arg("x"), "u(T, x), closed-form or seeded Monte Carlo.")
      .def(
          "feynman_kac",
          [](const CatalogEntry& e, const Eigen::VectorXd& x, long samples,
             std::uint64_t seed) {
            const McEstimate est = feynman_kac(e.problem, x, samples, seed);
            return py::make_tuple(est.value, est.stderr_);
          },
          py::arg("x"), py::arg("samples") = 10000, py::arg("seed") = 0,
          "(value, stderr) of the Euler-Monte-Carlo estimate of u(T, x).")
      .def(
          "lp_error",
          [](const CatalogEntry& e, const NeuralNetwork& net, double p,
             long probes, std::uint64_t seed) {
            return error_report_dict(lp_error(net, e, p, probes, seed));
          },
          py::arg("net"), py::arg("p") = 2.0, py::arg("probes") = 2048,
          py::arg("seed") = 0);

  m.def("catalog_names", &catalog_names);
  m.def("make_problem", &make_problem, py::arg("name"), py::arg("d"),
        py::arg("T") = 1.0);

  // Calibration and construction.
  m.def(
      "calibrate",
      [](const CatalogEntry& entry, double epsilon, double p, std::uint64_t seed,
         long budget) {
        CalibrationTrace trace;
        const RateConstants rc = calibrate(entry, epsilon, p, seed, budget, &trace);
        py::list steps;
        for (const CalibrationStep& s : trace.steps) {
          py::dict d;
          d["M"] = s.M;
          d["delta"] = s.delta;
          d["error"] = s.error;
          d["stderr"] = s.stderr_;
          d["action"] = s.action;
          steps.append(d);
        }
        py::dict out;
        out["M"] = rc.M;
        out["delta"] = rc.delta;
        out["steps"] = steps;
        return out;
      },
      py::arg("problem"), py::arg("eps"), py::arg("p") = 2.0, py::arg("seed") = 0,
      py::arg("budget") = 40,
      "Doubling search for (M, delta) reaching lp_error <= eps/2.");

  m.def(
      "construct",
      [](const CatalogEntry& entry, std::uint64_t M, double delta, int candidates,
         std::uint64_t seed, double eps, double p) {
        RateConstants rc;
        rc.M = M;
        rc.delta = delta;
        const ConstructionReport rep =
            select_realization(entry, rc, candidates, seed, eps, p);
        py::dict out;
        out["network"] = rep.network;
        out["param_count"] = rep.param_count;
        out["depth"] = rep.depth;
        out["M"] = rep.M;
        out["delta"] = rep.delta;
        out["selected_index"] = rep.selected_index;
        out["selected_error"] = rep.selected_error;
        out["selected_stderr"] = rep.selected_stderr;
        return out;
      },
      py::arg("problem"), py::arg("M"), py::arg("delta") = 1.0,
      py::arg("candidates") = 8, py::arg("seed") = 0, py::arg("eps") = 0.1,
      py::arg("p") = 2.0,
      "Builds `candidates` Monte-Carlo networks and keeps the measured best.");

  m.def(
      "plan",
      [](const CatalogEntry& entry, std::uint64_t M, double delta) {
        const BuildPlan p = plan_construction(entry.problem, M, delta);
        py::dict out;
        std::vector<long> dims;
        for (Eigen::Index v : p.sample_arch.dims) dims.push_back(long(v));
        out["sample_arch"] = dims;
        out["sample_params"] = p.sample_params;
        out["mc_params"] = p.mc_params;
        out["steps"] = p.steps;
        out["depth"] = p.depth;
        return out;
      },
      py::arg("problem"), py::arg("M"), py::arg("delta") = 1.0,
      "Exact size bookkeeping of the build without materializing weights.");

  m.def(
      "paper_constants",
      [](double d, double eps, double kappa, double eta, double p, double T,
         double drift_zero_norm) {
        PaperConstantsInput in;
        in.d = d;
        in.epsilon = eps;
        in.kappa = kappa;
        in.eta = eta;
        in.p = p;
        in.T = T;
        in.drift_zero_norm = drift_zero_norm;
        const RateConstants rc = paper_constants(in);
        py::dict out;
        out["log_M"] = rc.log_M;
        out["log_delta"] = rc.log_delta;
        out["m_overflows"] = rc.m_overflows;
        out["log_param_bound"] = log_paper_param_bound(in);
        return out;
      },
      py::arg("d"), py::arg("eps"), py::arg("kappa"), py::arg("eta") = 3.0,
      py::arg("p") = 2.0, py::arg("T") = 1.0, py::arg("drift_zero_norm") = 0.0,
      "Log-space closed-form Monte-Carlo count, step control and size bound.");

  m.def(
      "param_certificate",
      [](std::uint64_t params, double c, double d, double eps) {
        const CertificateResult r = param_certificate(params, c, d, eps);
        py::dict out;
        out["pass"] = r.pass;
        out["log_margin"] = r.log_margin;
        return out;
      },
      py::arg("params"), py::arg("c"), py::arg("d"), py::arg("eps"),
      "Checks P <= c d^c eps^-c in log space.");
}
