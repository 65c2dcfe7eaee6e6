#include "kolmonet/oracle.hpp"

#include <bit>
#include <cmath>

#include "kolmonet/calculus.hpp"

namespace kolmo {

namespace {

std::uint64_t hash_vector(const Eigen::VectorXd& x) {
  std::uint64_t h = 0x517cc1b727220a95ULL;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    h = mix64(h ^ std::bit_cast<std::uint64_t>(x(i)));
  return h;
}

McEstimate mean_with_se(const std::vector<double>& vals) {
  const auto n = static_cast<double>(vals.size());
  double sum = 0;
  for (double v : vals) sum += v;
  const double mean = sum / n;
  double ss = 0;
  for (double v : vals) ss += (v - mean) * (v - mean);
  McEstimate est;
  est.samples = static_cast<long>(vals.size());
  est.value = mean;
  est.stderr_ = vals.size() > 1 ? std::sqrt(ss / (n - 1) / n) : 0.0;
  return est;
}

KolmogorovProblem base_heat(int d, double T) {
  KolmogorovProblem pb;
  pb.d = d;
  pb.T = T;
  pb.A = Eigen::MatrixXd::Identity(d, d);
  pb.drift = [d](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(d).eval(); };
  pb.drift_net = zero_net(d);
  pb.drift_lipschitz = 0;
  pb.drift_C = 0;
  pb.drift_c = 0;
  pb.measure.kind = MeasureSpec::Kind::UniformCube;
  return pb;
}

KolmogorovProblem base_ou(int d, double T) {
  KolmogorovProblem pb = base_heat(d, T);
  pb.drift = [](const Eigen::VectorXd& x) { return (-x).eval(); };
  pb.drift_net = linear_net(-Eigen::MatrixXd::Identity(d, d));
  pb.drift_lipschitz = 1;
  pb.drift_C = 0;
  pb.drift_c = 1;
  return pb;
}

// Piecewise-linear segment count keeping the coordinatewise t^2 interpolation
// bias around 1e-2 across the d ladder (error ~ 64 d / S^2).
int quad_segments(int d) {
  return 80 * static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));
}

double expected_max_two(double x1, double x2, double T) {
  const double theta = 2.0 * std::sqrt(T);
  const double alpha = (x1 - x2) / theta;
  return x1 * normal_cdf(alpha) + x2 * normal_cdf(-alpha) + theta * normal_pdf(alpha);
}

}  // namespace

std::vector<std::string> catalog_names() {
  return {"heat-linear", "heat-quadratic", "heat-max",
          "ou-linear",   "ou-quadratic",   "bounded-drift"};
}

CatalogEntry make_problem(const std::string& name, int d, double T) {
  if (d < 1 || !(T > 0)) throw ShapeError("make_problem: need d >= 1, T > 0");
  CatalogEntry entry;
  if (name == "heat-linear") {
    KolmogorovProblem pb = base_heat(d, T);
    pb.name = name;
    pb.initial_value = [](const Eigen::VectorXd& x) { return x.sum(); };
    pb.f0_net = sum_coords_net(d);
    pb.f0_growth = 1;
    pb.f0_lip_L0 = std::sqrt(static_cast<double>(d));
    pb.f0_lip_ell = 0;
    // Covers the Lipschitz/growth hypotheses AND the network budget
    // P(phi0)+P(phi1)+P(id) <= kappa d^kappa at every d (tight at d=1).
    pb.kappa_hint = 18;
    pb.eta_hint = 3;
    entry.problem = std::move(pb);
    entry.reference.kind = ReferenceSolution::Kind::ClosedForm;
    entry.reference.tag = "sum(x)";
    entry.reference.closed_form = [](const Eigen::VectorXd& x) { return x.sum(); };
  } else if (name == "heat-quadratic") {
    KolmogorovProblem pb = base_heat(d, T);
    pb.name = name;
    pb.initial_value = [](const Eigen::VectorXd& x) { return x.squaredNorm(); };
    pb.f0_net = pwl_coordwise_net(d, [](double t) { return t * t; }, -8.0, 8.0,
                                  quad_segments(d));
    pb.f0_growth = 2;
    pb.f0_lip_L0 = 2;
    pb.f0_lip_ell = 1;
    pb.kappa_hint = 24;
    pb.eta_hint = 5;
    entry.problem = std::move(pb);
    entry.reference.kind = ReferenceSolution::Kind::ClosedForm;
    entry.reference.tag = "|x|^2 + 2dT";
    entry.reference.closed_form = [d, T](const Eigen::VectorXd& x) {
      return x.squaredNorm() + 2.0 * d * T;
    };
  } else if (name == "heat-max") {
    KolmogorovProblem pb = base_heat(d, T);
    pb.name = name;
    pb.initial_value = [](const Eigen::VectorXd& x) { return x.maxCoeff(); };
    pb.f0_net = max_coords_net(d);
    pb.f0_growth = 1;
    pb.f0_lip_L0 = 1;
    pb.f0_lip_ell = 0;
    pb.kappa_hint = 18;
    pb.eta_hint = 3;
    entry.problem = std::move(pb);
    if (d == 1) {
      entry.reference.kind = ReferenceSolution::Kind::ClosedForm;
      entry.reference.tag = "x";
      entry.reference.closed_form = [](const Eigen::VectorXd& x) { return x(0); };
    } else if (d == 2) {
      entry.reference.kind = ReferenceSolution::Kind::ClosedForm;
      entry.reference.tag = "E max of two gaussians";
      entry.reference.closed_form = [T](const Eigen::VectorXd& x) {
        return expected_max_two(x(0), x(1), T);
      };
    } else {
      entry.reference.kind = ReferenceSolution::Kind::MonteCarlo;
    }
  } else if (name == "ou-linear") {
    KolmogorovProblem pb = base_ou(d, T);
    pb.name = name;
    pb.initial_value = [](const Eigen::VectorXd& x) { return x.sum(); };
    pb.f0_net = sum_coords_net(d);
    pb.f0_growth = 1;
    pb.f0_lip_L0 = std::sqrt(static_cast<double>(d));
    pb.f0_lip_ell = 0;
    pb.kappa_hint = 21;
    pb.eta_hint = 3;
    entry.problem = std::move(pb);
    entry.reference.kind = ReferenceSolution::Kind::ClosedForm;
    entry.reference.tag = "sum(x) e^{-T}";
    entry.reference.closed_form = [T](const Eigen::VectorXd& x) {
      return x.sum() * std::exp(-T);
    };
  } else if (name == "ou-quadratic") {
    KolmogorovProblem pb = base_ou(d, T);
    pb.name = name;
    pb.initial_value = [](const Eigen::VectorXd& x) { return x.squaredNorm(); };
    pb.f0_net = pwl_coordwise_net(d, [](double t) { return t * t; }, -8.0, 8.0,
                                  quad_segments(d));
    pb.f0_growth = 2;
    pb.f0_lip_L0 = 2;
    pb.f0_lip_ell = 1;
    pb.kappa_hint = 24;
    pb.eta_hint = 5;
    entry.problem = std::move(pb);
    entry.reference.kind = ReferenceSolution::Kind::ClosedForm;
    entry.reference.tag = "e^{-2T}|x|^2 + d(1-e^{-2T})";
    entry.reference.closed_form = [d, T](const Eigen::VectorXd& x) {
      const double decay = std::exp(-2.0 * T);
      return decay * x.squaredNorm() + d * (1.0 - decay);
    };
  } else if (name == "bounded-drift") {
    KolmogorovProblem pb = base_heat(d, T);
    pb.name = name;
    pb.drift = [](const Eigen::VectorXd& x) {
      return (x / (1.0 + x.squaredNorm())).eval();
    };
    // Coordinatewise surrogate of the x/(1+||x||^2) drift; it matches
    // the interpolated drift only at d = 1.
    pb.drift_net = pwl_coordmap_net(d, [](double t) { return t / (1.0 + t * t); },
                                    -8.0, 8.0, 128);
    pb.drift_lipschitz = 1;
    pb.drift_C = 0.5;
    pb.drift_c = 0;
    pb.initial_value = [](const Eigen::VectorXd& x) { return x.maxCoeff(); };
    pb.f0_net = max_coords_net(d);
    pb.f0_growth = 1;
    pb.f0_lip_L0 = 1;
    pb.f0_lip_ell = 0;
    pb.kappa_hint = 24;
    pb.eta_hint = 3;
    entry.problem = std::move(pb);
    entry.reference.kind = ReferenceSolution::Kind::MonteCarlo;
  } else {
    throw ShapeError("make_problem: unknown problem '" + name + "'");
  }
  return entry;
}

McEstimate feynman_kac(const KolmogorovProblem& problem, const Eigen::VectorXd& x,
                       long samples, std::uint64_t seed) {
  if (samples < 2) throw ShapeError("feynman_kac: need >= 2 samples");
  if (x.size() != problem.d) throw ShapeError("feynman_kac: probe dim mismatch");
  const EulerConfig cfg = EulerConfig::from_steps(1024, problem.T);
  const Eigen::MatrixXd diff = diffusion_factor(problem.A);
  const double sd = std::sqrt(cfg.h);
  const Eigen::Index d = problem.d;
  std::vector<double> vals(static_cast<std::size_t>(samples));
  parallel_for(static_cast<std::size_t>(samples), [&](std::size_t j) {
    SplitMix64 g(derive_stream(seed, j));
    Eigen::VectorXd y = x, dW(d);
    for (long k = 0; k < cfg.steps; ++k) {
      for (Eigen::Index i = 0; i < d; ++i) dW(i) = sd * g.next_gaussian();
      y += cfg.h * problem.drift(y) + diff * dW;
    }
    if (!y.allFinite()) throw NumericError("feynman_kac: non-finite endpoint");
    vals[j] = problem.initial_value(y);
  });
  return mean_with_se(vals);
}

double reference_value(const CatalogEntry& entry, const Eigen::VectorXd& x,
                       double* stderr_out) {
  if (entry.reference.kind == ReferenceSolution::Kind::ClosedForm) {
    if (stderr_out) *stderr_out = 0;
    return entry.reference.closed_form(x);
  }
  const std::uint64_t seed = derive_stream(entry.reference.mc_seed, hash_vector(x));
  McEstimate est = feynman_kac(entry.problem, x, entry.reference.mc_samples, seed);
  if (stderr_out) *stderr_out = est.stderr_;
  return est.value;
}

ErrorReport lp_error(const NeuralNetwork& net, const CatalogEntry& entry,
                     double p, long probes, std::uint64_t seed) {
  if (!(p > 0)) throw ShapeError("lp_error: p must be > 0");
  if (probes < 1) throw ShapeError("lp_error: need >= 1 probe");
  const int d = entry.problem.d;
  if (net.input_dim() != d || net.output_dim() != 1)
    throw ShapeError("lp_error: net must map R^d to R");
  const Eigen::MatrixXd X = entry.problem.measure.sample_batch(d, probes, seed);
  const Eigen::MatrixXd out = realize_batch(net, X);
  std::vector<double> net_vals(static_cast<std::size_t>(probes));
  std::vector<double> ref_vals(static_cast<std::size_t>(probes));
  std::vector<double> ref_ses(static_cast<std::size_t>(probes), 0.0);
  for (long j = 0; j < probes; ++j) {
    net_vals[static_cast<std::size_t>(j)] = out(0, j);
    ref_vals[static_cast<std::size_t>(j)] =
        reference_value(entry, X.col(j), &ref_ses[static_cast<std::size_t>(j)]);
  }
  ErrorReport rep = lp_error_from_values(net_vals, ref_vals, p);
  rep.params = param_count(net);
  if (entry.reference.kind == ReferenceSolution::Kind::MonteCarlo &&
      rep.lp_error > 0) {
    // fold per-probe reference noise through d(lp)/d(err_j)
    const double n = static_cast<double>(probes);
    double var = rep.stderr_ * rep.stderr_;
    for (long j = 0; j < probes; ++j) {
      const double e = std::fabs(net_vals[static_cast<std::size_t>(j)] -
                                 ref_vals[static_cast<std::size_t>(j)]);
      const double dj = std::pow(e / rep.lp_error, p - 1) / n *
                        ref_ses[static_cast<std::size_t>(j)];
      var += dj * dj;
    }
    rep.stderr_ = std::sqrt(var);
  }
  return rep;
}

ErrorReport lp_error_from_values(const std::vector<double>& net_values,
                                 const std::vector<double>& ref_values, double p) {
  if (net_values.size() != ref_values.size() || net_values.empty())
    throw ShapeError("lp_error_from_values: length mismatch");
  std::vector<double> powed(net_values.size());
  double maxe = 0;
  for (std::size_t j = 0; j < net_values.size(); ++j) {
    const double e = std::fabs(net_values[j] - ref_values[j]);
    maxe = std::max(maxe, e);
    powed[j] = std::pow(e, p);
  }
  McEstimate m = mean_with_se(powed);
  ErrorReport rep;
  rep.probes = static_cast<long>(net_values.size());
  rep.p = p;
  rep.max_abs_error = maxe;
  rep.lp_error = std::pow(m.value, 1.0 / p);
  rep.stderr_ = m.value > 0
                    ? std::pow(m.value, 1.0 / p - 1.0) / p * m.stderr_
                    : m.stderr_;
  return rep;
}

McEstimate moment_of_measure(const MeasureSpec& measure, int d, double q,
                             long probes, std::uint64_t seed) {
  if (q < 0) throw ShapeError("moment_of_measure: exponent must be >= 0");
  if (probes < 2) throw ShapeError("moment_of_measure: need >= 2 probes");
  std::vector<double> vals(static_cast<std::size_t>(probes));
  parallel_for(static_cast<std::size_t>(probes), [&](std::size_t j) {
    SplitMix64 g(derive_stream(seed, j));
    vals[j] = std::pow(measure.sample(d, g).norm(), q);
  });
  return mean_with_se(vals);
}

}  // namespace kolmo
