#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "kolmonet/network.hpp"
#include "kolmonet/sde.hpp"

namespace kolmo {

// Reference value u(T, x), either closed-form or Monte Carlo Feynman-Kac.
struct ReferenceSolution {
  enum class Kind { ClosedForm, MonteCarlo };
  Kind kind = Kind::ClosedForm;
  std::string tag;  // ClosedForm label
  std::function<double(const Eigen::VectorXd&)> closed_form;
  long mc_samples = 100000;  // MonteCarlo only
  std::uint64_t mc_seed = 0x9e3779b9u;
};

struct CatalogEntry {
  KolmogorovProblem problem;
  ReferenceSolution reference;
};

// Problems: heat-linear, heat-quadratic, heat-max, ou-linear, ou-quadratic,
// bounded-drift. Throws ShapeError on an unknown name.
CatalogEntry make_problem(const std::string& name, int d, double T);
std::vector<std::string> catalog_names();

// E f0(X_T^x) by Euler-Monte Carlo on the fine grid h = T/2^10.
// half width = 3 stderr.
McEstimate feynman_kac(const KolmogorovProblem& problem, const Eigen::VectorXd& x,
                       long samples, std::uint64_t seed);

// Evaluates the reference at x; MonteCarlo references derive their seed from
// the probe's bit pattern, so the value is a pure function of (entry, x).
double reference_value(const CatalogEntry& entry, const Eigen::VectorXd& x,
                       double* stderr_out = nullptr);

struct ErrorReport {
  double lp_error = 0;      // ( E_mu |net - u|^p )^{1/p} over the probe draw
  double stderr_ = 0;       // delta-method stderr, MC-reference noise folded in
  double max_abs_error = 0;
  long probes = 0;
  double p = 2;
  std::uint64_t params = 0;

  double half_width() const { return 3.0 * stderr_; }
};

// Probes are drawn from problem.measure with stream derive_stream(seed, j).
ErrorReport lp_error(const NeuralNetwork& net, const CatalogEntry& entry,
                     double p, long probes, std::uint64_t seed);

// Same statistic from precomputed values at caller-chosen probes.
ErrorReport lp_error_from_values(const std::vector<double>& net_values,
                                 const std::vector<double>& ref_values, double p);

// MC estimate of int ||z||^q nu_d(dz).
McEstimate moment_of_measure(const MeasureSpec& measure, int d, double q,
                             long probes, std::uint64_t seed);

}  // namespace kolmo
