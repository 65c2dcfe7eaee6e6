#include "kolmonet/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <utility>

#include "kolmonet/calculus.hpp"
#include "kolmonet/constructor.hpp"

namespace kolmo {

namespace {

struct MeanSe {
  double mean = 0;
  double se = 0;
};

MeanSe mean_se(const std::vector<double>& vals) {
  const double n = static_cast<double>(vals.size());
  double sum = 0;
  for (double v : vals) sum += v;
  const double m = sum / n;
  double ss = 0;
  for (double v : vals) ss += (v - m) * (v - m);
  const double var = vals.size() > 1 ? ss / (n - 1.0) : 0.0;
  return {m, std::sqrt(var / n)};
}

// (mean vals)^{1/p} with the delta-method standard error.
MeanSe power_mean(const std::vector<double>& powed, double p) {
  const MeanSe m = mean_se(powed);
  if (m.mean <= 0) return {0.0, 0.0};
  const double value = std::pow(m.mean, 1.0 / p);
  const double se = std::pow(m.mean, 1.0 / p - 1.0) / p * m.se;
  return {value, se};
}

Eigen::VectorXd measure_center(const MeasureSpec& measure, int d) {
  switch (measure.kind) {
    case MeasureSpec::Kind::UniformCube:
      return Eigen::VectorXd::Constant(d, 0.5);
    case MeasureSpec::Kind::GaussianIso:
      return Eigen::VectorXd::Zero(d);
    case MeasureSpec::Kind::PointMass:
      return measure.point;
  }
  throw ShapeError("measure_center: unknown measure kind");
}

// Uniform draw from the centered ball of the given radius.
Eigen::VectorXd ball_probe(SplitMix64& g, int d, double radius) {
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v(i) = g.next_gaussian();
  const double nrm = v.norm();
  if (nrm < 1e-300) return Eigen::VectorXd::Zero(d);
  const double r = radius * std::pow(g.next_double(), 1.0 / d);
  return (r / nrm) * v;
}

// int_0^1 (r a + (1-r) b)^ell dr, closed form.
double segment_moment(double a, double b, double ell) {
  if (ell == 0.0) return 1.0;
  if (std::abs(a - b) <= 1e-12 * std::max(1.0, std::max(a, b)))
    return std::pow(0.5 * (a + b), ell);
  return (std::pow(a, ell + 1.0) - std::pow(b, ell + 1.0)) /
         ((ell + 1.0) * (a - b));
}

std::string fmt(const char* pattern, double a, double b = 0, double c = 0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c);
  return buf;
}

}  // namespace

std::string CheckResult::str() const {
  char buf[320];
  std::snprintf(buf, sizeof(buf), "[%s] %s: lhs=%.8g rhs=%.8g sigma=%.3g n=%ld",
                pass ? "PASS" : "FAIL", name.c_str(), lhs, rhs, sigma, samples);
  std::string out(buf);
  if (!detail.empty()) {
    out += " | ";
    out += detail;
  }
  return out;
}

Sampler named_sampler(const std::string& name) {
  if (name == "uniform01") return [](SplitMix64& g) { return g.next_double(); };
  if (name == "absnormal")
    return [](SplitMix64& g) { return std::abs(g.next_gaussian()); };
  if (name == "const-half") return [](SplitMix64&) { return 0.5; };
  if (name == "exp1")
    return [](SplitMix64& g) { return -std::log(g.next_double()); };
  throw ShapeError("named_sampler: unknown sampler '" + name + "'");
}

std::vector<std::string> sampler_names() {
  return {"uniform01", "absnormal", "const-half", "exp1"};
}

CheckResult markov_check(const Sampler& dist, double epsilon, double q,
                         long samples, std::uint64_t seed) {
  if (!(epsilon > 0) || !(q > 0)) throw ShapeError("markov_check: eps, q > 0");
  if (samples < 2) throw ShapeError("markov_check: need >= 2 samples");
  std::vector<double> absx(static_cast<std::size_t>(samples));
  parallel_for(absx.size(), [&](std::size_t i) {
    SplitMix64 g(derive_stream(seed, i));
    absx[i] = std::abs(dist(g));
  });

  std::vector<double> hits(absx.size()), powed(absx.size());
  for (std::size_t i = 0; i < absx.size(); ++i) {
    hits[i] = absx[i] >= epsilon ? 1.0 : 0.0;
    powed[i] = std::pow(absx[i], q);
  }
  const MeanSe ph = mean_se(hits);
  const MeanSe mq = power_mean(powed, q);

  CheckResult r;
  r.name = fmt("markov eps=%g q=%g", epsilon, q);
  r.samples = samples;
  r.lhs = ph.mean > 0 ? std::pow(ph.mean, 1.0 / q) : 0.0;
  const double ph_se =
      ph.mean > 0 ? std::pow(ph.mean, 1.0 / q - 1.0) / q * ph.se : 0.0;
  r.rhs = mq.mean / epsilon;
  r.sigma = std::hypot(ph_se, mq.se / epsilon);
  r.pass = r.lhs <= r.rhs + 3.0 * r.sigma;
  r.detail = fmt("tail probability %.4g", ph.mean);
  return r;
}

CheckResult brownian_moment_check(const Eigen::MatrixXd& diff, double t,
                                  double p, long samples, std::uint64_t seed) {
  const McEstimate est = brownian_moment(diff, t, p, samples, seed);
  CheckResult r;
  r.name = fmt("brownian-moment p=%g t=%g", p, t) +
           fmt(" d=%g", static_cast<double>(diff.rows()));
  r.samples = samples;
  r.lhs = est.value;
  r.rhs = std::sqrt(std::max(1.0, p - 1.0) * diff.squaredNorm() * t);
  r.sigma = est.stderr_;
  r.pass = r.lhs <= r.rhs + 3.0 * r.sigma;
  return r;
}

CheckResult apriori_moment_check(const KolmogorovProblem& problem,
                                 const Eigen::VectorXd& x0, double delta,
                                 double p, long samples, std::uint64_t seed) {
  if (x0.size() != problem.d)
    throw ShapeError("apriori_moment_check: x0 dimension mismatch");
  if (samples < 2) throw ShapeError("apriori_moment_check: need >= 2 samples");
  const EulerConfig cfg = EulerConfig::from_delta(delta, problem.T);
  const Eigen::MatrixXd diff = diffusion_factor(problem.A);
  const long nodes = cfg.steps + 1;

  // ||Y_{t_k}||^p per node and sample; per-sample column writes keep the
  // reduction order fixed.
  Eigen::MatrixXd powed(nodes, samples);
  parallel_for(static_cast<std::size_t>(samples), [&](std::size_t j) {
    const NoiseRealization noise = NoiseRealization::generate(
        derive_stream(seed, j), cfg.steps, problem.d, cfg.h);
    const EulerResult res = euler_path(problem.drift, x0, diff, cfg, noise, true);
    for (long k = 0; k < nodes; ++k)
      powed(k, static_cast<Eigen::Index>(j)) =
          std::pow((*res.path)[static_cast<std::size_t>(k)].norm(), p);
  });

  long worst = 0;
  MeanSe worst_stat{-1.0, 0.0};
  std::vector<double> row(static_cast<std::size_t>(samples));
  for (long k = 0; k < nodes; ++k) {
    for (long j = 0; j < samples; ++j)
      row[static_cast<std::size_t>(j)] = powed(k, j);
    const MeanSe stat = power_mean(row, p);
    if (stat.mean > worst_stat.mean) {
      worst_stat = stat;
      worst = k;
    }
  }

  const McEstimate w = brownian_moment(diff, problem.T, p, samples,
                                       derive_stream(seed, 0x77AA));
  const double growth = std::exp(problem.drift_c * problem.T);

  CheckResult r;
  r.name = fmt("apriori-moment p=%g delta=%g", p, delta);
  r.samples = samples;
  r.lhs = worst_stat.mean;
  r.rhs = (x0.norm() + problem.drift_C * problem.T + w.value) * growth;
  r.sigma = std::hypot(worst_stat.se, growth * w.stderr_);
  r.pass = r.lhs <= r.rhs + 3.0 * r.sigma;
  r.detail = fmt("sup over %g grid nodes at node %g", static_cast<double>(nodes),
                 static_cast<double>(worst));
  return r;
}

CheckResult pathwise_perturbation_check(const KolmogorovProblem& problem,
                                        const Eigen::VectorXd& x0, double delta,
                                        double p, long samples,
                                        std::uint64_t seed) {
  if (!(p >= 2)) throw ShapeError("pathwise_perturbation_check: p >= 2");
  const EulerConfig cfg = EulerConfig::from_delta(delta, problem.T);
  const Eigen::MatrixXd diff = diffusion_factor(problem.A);
  const int refine = 64;
  const double factor =
      std::exp((problem.drift_lipschitz + (1.0 - 1.0 / p)) * p * problem.T);

  std::vector<double> ratios(static_cast<std::size_t>(samples), 0.0);
  coupled_paths(problem.drift, problem.drift, x0, diff, cfg, refine, p, samples,
                seed,
                [&](long j, const Eigen::VectorXd& X, const Eigen::VectorXd& Y,
                    double integ) {
                  const double lhs = std::pow((X - Y).norm(), p);
                  const double rhs = factor * integ;  // Young parameter 1
                  double ratio;
                  if (rhs > 0)
                    ratio = lhs / rhs;
                  else
                    ratio = lhs > 0 ? std::numeric_limits<double>::infinity()
                                    : 0.0;
                  ratios[static_cast<std::size_t>(j)] = ratio;
                });

  double worst = 0;
  for (double v : ratios) worst = std::max(worst, v);

  CheckResult r;
  r.name = fmt("pathwise-perturbation p=%g delta=%g", p, delta);
  r.samples = samples;
  r.lhs = worst;
  r.rhs = 1.05;  // slack for the 64x fine-Euler proxy of the exact path
  r.sigma = 0;
  r.pass = r.lhs <= r.rhs;
  r.detail = "worst per-path ratio, exact solution proxied at refine=64";
  return r;
}

CheckResult strong_perturbation_check(const KolmogorovProblem& problem,
                                      const Eigen::VectorXd& x0, double delta,
                                      double p, long samples,
                                      std::uint64_t seed) {
  if (!(p >= 2)) throw ShapeError("strong_perturbation_check: p >= 2");
  const EulerConfig cfg = EulerConfig::from_delta(delta, problem.T);
  const Eigen::MatrixXd diff = diffusion_factor(problem.A);
  const int refine = 64;

  std::vector<double> dist_pow(static_cast<std::size_t>(samples));
  std::vector<double> integs(static_cast<std::size_t>(samples));
  coupled_paths(problem.drift, problem.drift, x0, diff, cfg, refine, p, samples,
                seed,
                [&](long j, const Eigen::VectorXd& X, const Eigen::VectorXd& Y,
                    double integ) {
                  dist_pow[static_cast<std::size_t>(j)] =
                      std::pow((X - Y).norm(), p);
                  integs[static_cast<std::size_t>(j)] = integ;
                });

  const MeanSe lhs = power_mean(dist_pow, p);
  const MeanSe integral = mean_se(integs);
  const double factor = std::exp(
      (problem.drift_lipschitz + (1.0 - 1.0 / p) / cfg.delta) * problem.T);
  const double young = std::pow(cfg.delta, 1.0 - 1.0 / p);
  double rhs = 0, rhs_se = 0;
  if (integral.mean > 0) {
    rhs = factor * young * std::pow(integral.mean, 1.0 / p);
    rhs_se = factor * young * std::pow(integral.mean, 1.0 / p - 1.0) / p *
             integral.se;
  }

  CheckResult r;
  r.name = fmt("strong-perturbation p=%g delta=%g", p, delta);
  r.samples = samples;
  r.lhs = lhs.mean;
  r.rhs = rhs;
  r.sigma = std::hypot(lhs.se, rhs_se);
  r.pass = r.lhs <= r.rhs + 3.0 * r.sigma;
  r.detail = fmt("coarse steps %g, drift integral %.4g",
                 static_cast<double>(cfg.steps), integral.mean);
  return r;
}

CheckResult weak_perturbation_check(const KolmogorovProblem& problem,
                                    double delta, double p, long samples,
                                    std::uint64_t seed) {
  if (!(p >= 2)) throw ShapeError("weak_perturbation_check: p >= 2");
  if (!problem.drift_net || !problem.f0_net)
    throw ShapeError("weak_perturbation_check: problem carries no networks");
  const int d = problem.d;
  const double T = problem.T;
  const double q = p / (p - 1.0);
  const EulerConfig cfg = EulerConfig::from_delta(delta, T);
  const Eigen::MatrixXd diff = diffusion_factor(problem.A);
  const NeuralNetwork& f0_net = *problem.f0_net;
  const NeuralNetwork& drift_net = *problem.drift_net;

  // Approximation/growth constants probed on the ball of radius 5 and
  // inflated 10%; Lipschitz data for the exact drift comes declared.
  const double sig0 = problem.f0_growth;
  const double sig1 = 1.0;
  const double ell = problem.f0_lip_ell;
  const double L1 = problem.drift_lipschitz;
  const double c = problem.drift_c;

  const long nprobe = 10000;
  Eigen::MatrixXd probes(d, nprobe);
  parallel_for(static_cast<std::size_t>(nprobe), [&](std::size_t i) {
    SplitMix64 g(derive_stream(seed, 0x5BA11000ULL + i));
    probes.col(static_cast<Eigen::Index>(i)) = ball_probe(g, d, 5.0);
  });
  const Eigen::MatrixXd f0_vals = realize_batch(f0_net, probes);
  const Eigen::MatrixXd drift_vals = realize_batch(drift_net, probes);

  double eps0 = 0, eps1 = 0, capC = 0, L0 = 0;
  for (long i = 0; i < nprobe; ++i) {
    const Eigen::VectorXd x = probes.col(i);
    const double nx = x.norm();
    eps0 = std::max(eps0, std::abs(f0_vals(0, i) - problem.initial_value(x)) /
                              (1.0 + std::pow(nx, sig0)));
    eps1 = std::max(eps1, (drift_vals.col(i) - problem.drift(x)).norm() /
                              (1.0 + nx));
    capC = std::max(capC, drift_vals.col(i).norm() - c * nx);
  }
  for (long i = 0; i + 1 < nprobe; i += 2) {
    const Eigen::VectorXd x = probes.col(i), y = probes.col(i + 1);
    const double gap = (x - y).norm();
    if (gap < 1e-12) continue;
    L0 = std::max(L0, std::abs(f0_vals(0, i) - f0_vals(0, i + 1)) /
                          ((1.0 + segment_moment(x.norm(), y.norm(), ell)) * gap));
  }
  eps0 *= 1.1;
  eps1 *= 1.1;
  capC = std::max(0.0, capC) * 1.1;
  L0 *= 1.1;

  const double r_moment = std::max({sig0, sig1 * p, p, ell * q});
  const McEstimate w = brownian_moment(diff, T, r_moment, samples,
                                       derive_stream(seed, 0xBB77));

  // Coupled estimate of E f0(X_T) - E phi0(Y_T): X rides the fine grid with
  // the exact drift, Y is the coarse chain driven by the drift network.
  const Eigen::VectorXd xi = measure_center(problem.measure, d);
  const int refine =
      static_cast<int>(std::max<long>(1, (1024 + cfg.steps - 1) / cfg.steps));
  std::vector<double> gaps(static_cast<std::size_t>(samples));
  coupled_paths(
      problem.drift,
      [&](const Eigen::VectorXd& y) { return realize(drift_net, y); }, xi, diff,
      cfg, refine, p, samples, seed,
      [&](long j, const Eigen::VectorXd& X, const Eigen::VectorXd& Y, double) {
        gaps[static_cast<std::size_t>(j)] =
            problem.initial_value(X) - realize(f0_net, Y)(0);
      });
  const MeanSe gap = mean_se(gaps);

  const double bracket = eps0 + eps1 + std::sqrt(cfg.h / T);
  const double growth =
      std::exp(ell + 3.0 + 2.0 * L1 +
               (ell * std::max(L1, c) + c * std::max(sig1, 1.0) +
                L1 * std::max(sig0, 1.0) + 2.0) *
                   T);
  // phi2 = exact identity, so eps2 = 0 and sigma2 = 0.
  const double base = xi.norm() + 2.0 +
                      std::max({1.0, capC,
                                problem.drift(Eigen::VectorXd::Zero(d)).norm()}) *
                          std::max(1.0, T) +
                      w.value;
  const double power = std::max({1.0, sig0, sig1}) + ell;
  const double scale = growth * std::pow(base, power) * std::max(1.0, L0);

  CheckResult r;
  r.name = fmt("weak-perturbation p=%g delta=%g", p, delta);
  r.samples = samples;
  r.lhs = std::abs(gap.mean);
  r.rhs = bracket * scale;
  const double rhs_se = bracket * growth * power *
                        std::pow(base, power - 1.0) * std::max(1.0, L0) *
                        w.stderr_;
  r.sigma = std::hypot(gap.se, rhs_se);
  r.pass = r.lhs <= r.rhs + 3.0 * r.sigma;
  r.detail = fmt("eps0=%.3g eps1=%.3g", eps0, eps1) +
             fmt(" L0=%.3g C=%.3g", L0, capC) + fmt(" h=%g", cfg.h);
  return r;
}

std::string sweep_kind_name(SweepKind kind) {
  switch (kind) {
    case SweepKind::EulerWeak: return "euler";
    case SweepKind::MonteCarlo: return "mc";
    case SweepKind::ParamGrowthInD: return "params-d";
    case SweepKind::ParamGrowthInEps: return "params-eps";
  }
  throw ShapeError("sweep_kind_name: unknown kind");
}

void write_sweep_csv(const std::string& path, const SweepResult& result) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ShapeError("write_sweep_csv: cannot open '" + path + "'");
  std::string text = "axis,value,stderr,extra\n";
  for (std::size_t i = 0; i < result.axis.size(); ++i) {
    append_double(text, result.axis[i]);
    text += ',';
    append_double(text, result.values[i]);
    text += ',';
    append_double(text, result.stderrs[i]);
    text += ',';
    text += i < result.extras.size() ? result.extras[i] : "";
    text += '\n';
  }
  out << text;
}

namespace {

std::vector<double> default_axis(SweepKind kind) {
  switch (kind) {
    case SweepKind::EulerWeak: return {0.1, 0.05, 0.025, 0.0125};
    case SweepKind::MonteCarlo: return {4, 16, 64, 256};
    case SweepKind::ParamGrowthInD: return {1, 2, 4, 8, 16};
    case SweepKind::ParamGrowthInEps: return {0.4, 0.2, 0.1, 0.05};
  }
  throw ShapeError("default_axis: unknown kind");
}

std::string default_problem(SweepKind kind) {
  switch (kind) {
    case SweepKind::EulerWeak: return "ou-linear";
    case SweepKind::MonteCarlo: return "heat-max";
    // Parameter-growth sweeps calibrate at every axis point; heat-linear has
    // an O(d^2)-parameter surrogate and no Euler bias, so repeated
    // calibration stays cheap out to d = 16.
    default: return "heat-linear";
  }
}

}  // namespace

SweepResult rate_sweep(SweepKind kind, const std::string& problem_name, int d,
                       double T, const std::vector<double>& axis,
                       const SweepParams& params, std::uint64_t seed) {
  if (!axis.empty() && axis.size() < 3)
    throw ShapeError("rate_sweep: need at least 3 axis points for a slope fit");
  SweepResult result;
  result.kind = kind;
  result.axis = axis.empty() ? default_axis(kind) : axis;
  const std::string name =
      problem_name.empty() ? default_problem(kind) : problem_name;
  if (d < 1) d = kind == SweepKind::EulerWeak ? 1 : 2;

  std::vector<double> fit_x;
  for (std::size_t i = 0; i < result.axis.size(); ++i) {
    const double a = result.axis[i];
    double value = 0, se = 0;
    std::string extra;
    switch (kind) {
      case SweepKind::EulerWeak: {
        const CatalogEntry entry = make_problem(name, d, T);
        const long steps = std::max<long>(1, std::llround(T / a));
        const EulerConfig cfg = EulerConfig::from_steps(steps, T);
        result.axis[i] = cfg.h;
        const long n = params.samples > 0 ? params.samples : 40000;
        const int refine =
            static_cast<int>(std::max<long>(1, (1024 + steps - 1) / steps));
        const Eigen::MatrixXd diff = diffusion_factor(entry.problem.A);
        const Eigen::VectorXd xi = measure_center(entry.problem.measure, d);
        std::vector<double> gaps(static_cast<std::size_t>(n));
        coupled_paths(entry.problem.drift, entry.problem.drift, xi, diff, cfg,
                      refine, params.p, n, derive_stream(seed, 0xE01E0000ULL + i),
                      [&](long j, const Eigen::VectorXd& X,
                          const Eigen::VectorXd& Y, double) {
                        gaps[static_cast<std::size_t>(j)] =
                            entry.problem.initial_value(X) -
                            entry.problem.initial_value(Y);
                      });
        const MeanSe gap = mean_se(gaps);
        value = std::abs(gap.mean);
        se = gap.se;
        extra = "steps=" + std::to_string(steps);
        fit_x.push_back(std::log(cfg.h));
        break;
      }
      case SweepKind::MonteCarlo: {
        const CatalogEntry entry = make_problem(name, d, T);
        const auto M = static_cast<std::uint64_t>(std::llround(a));
        const long probes = params.samples > 0 ? params.samples : 2048;
        // One build's error field is spatially correlated (every probe sees
        // the same noise draws), so a single lp_error has ~1 degree of
        // freedom; average squared errors over many independent builds and
        // take the standard error from the build-to-build scatter.
        const int reps = 64;
        const std::uint64_t eval_seed = derive_stream(seed, 0xE7A1BEEFULL);
        std::vector<double> sq(reps);
        for (int k = 0; k < reps; ++k) {
          const McErrorEstimate ev = estimate_mc_error(
              entry, M, 1.0, params.p, probes,
              derive_stream(seed, 0xAB000000ULL + i * 256 + k), eval_seed);
          sq[static_cast<std::size_t>(k)] =
              ev.report.lp_error * ev.report.lp_error;
        }
        const MeanSe msq = mean_se(sq);
        value = std::sqrt(msq.mean);
        se = value > 0 ? msq.se / (2.0 * value) : 0.0;
        extra = "reps=" + std::to_string(reps);
        fit_x.push_back(std::log(static_cast<double>(M)));
        break;
      }
      case SweepKind::ParamGrowthInD:
      case SweepKind::ParamGrowthInEps: {
        const int dim = kind == SweepKind::ParamGrowthInD
                            ? static_cast<int>(std::llround(a))
                            : d;
        const double eps =
            kind == SweepKind::ParamGrowthInEps ? a : params.epsilon;
        const CatalogEntry entry = make_problem(name, dim, T);
        const RateConstants constants =
            calibrate(entry, eps, params.p, derive_stream(seed, 0xD0000000ULL + i),
                      40);
        const BuildPlan plan =
            plan_construction(entry.problem, constants.M, constants.delta);
        value = static_cast<double>(plan.mc_params);
        se = 0;
        extra = "M=" + std::to_string(constants.M) +
                ";delta=" + format_double(constants.delta) +
                ";depth=" + std::to_string(plan.depth);
        fit_x.push_back(kind == SweepKind::ParamGrowthInD
                            ? std::log(static_cast<double>(dim))
                            : -std::log(eps));
        break;
      }
    }
    result.values.push_back(value);
    result.stderrs.push_back(se);
    result.extras.push_back(extra);
  }

  std::vector<double> fit_y;
  for (double v : result.values)
    fit_y.push_back(std::log(std::max(v, 1e-300)));
  result.fit = fit_line(fit_x, fit_y);

  if (!params.out_path.empty()) {
    write_sweep_csv(params.out_path, result);
    result.csv_path = params.out_path;
  }
  return result;
}

namespace {

using u128 = unsigned __int128;

Architecture random_arch(SplitMix64& g, Eigen::Index din, Eigen::Index dout) {
  const int depth = 2 + static_cast<int>(g.next_u64() % 3);
  Architecture arch;
  arch.dims.push_back(din);
  for (int i = 1; i < depth; ++i)
    arch.dims.push_back(1 + static_cast<Eigen::Index>(g.next_u64() % 8));
  arch.dims.push_back(dout);
  return arch;
}

NeuralNetwork random_net(SplitMix64& g, const Architecture& arch) {
  std::vector<NeuralNetwork::Layer> layers;
  for (std::size_t n = 1; n < arch.dims.size(); ++n) {
    NeuralNetwork::Layer layer;
    layer.W.resize(arch.dims[n], arch.dims[n - 1]);
    layer.b.resize(arch.dims[n]);
    for (Eigen::Index r = 0; r < layer.W.rows(); ++r) {
      for (Eigen::Index col = 0; col < layer.W.cols(); ++col)
        layer.W(r, col) = 2.0 * g.next_double() - 1.0;
      layer.b(r) = 2.0 * g.next_double() - 1.0;
    }
    layers.push_back(std::move(layer));
  }
  return NeuralNetwork(std::move(layers), Activation::relu());
}

Eigen::VectorXd random_probe(SplitMix64& g, Eigen::Index d) {
  Eigen::VectorXd x(d);
  for (Eigen::Index i = 0; i < d; ++i) x(i) = 4.0 * g.next_double() - 2.0;
  return x;
}

struct OpStats {
  double worst = 0;       // realization error
  long arch_bad = 0;      // architecture mismatches
  long bound_bad = 0;     // parameter-bound violations
};

void push_op_results(std::vector<CheckResult>& out, const std::string& op,
                     const OpStats& s, int instances) {
  CheckResult real;
  real.name = op + " realization";
  real.samples = instances;
  real.lhs = s.worst;
  real.rhs = 1e-9;
  real.pass = real.lhs <= real.rhs;
  out.push_back(real);

  CheckResult arch;
  arch.name = op + " architecture";
  arch.samples = instances;
  arch.lhs = static_cast<double>(s.arch_bad);
  arch.rhs = 0;
  arch.pass = s.arch_bad == 0;
  out.push_back(arch);

  CheckResult bound;
  bound.name = op + " param-bound";
  bound.samples = instances;
  bound.lhs = static_cast<double>(s.bound_bad);
  bound.rhs = 0;
  bound.pass = s.bound_bad == 0;
  out.push_back(bound);
}

}  // namespace

std::vector<CheckResult> calculus_suite(int instances, std::uint64_t seed) {
  if (instances < 1) throw ShapeError("calculus_suite: need >= 1 instance");
  std::vector<CheckResult> results;

  {
    CheckResult ident;
    ident.name = "relu-identity d=1..32";
    ident.samples = 32;
    SplitMix64 g(derive_stream(seed, 0x1DE));
    long bad = 0;
    double worst = 0;
    for (int d = 1; d <= 32; ++d) {
      const NeuralNetwork net = relu_identity(d);
      const Architecture arch = architecture(net);
      if (arch.dims != std::vector<Eigen::Index>{d, 2 * d, d}) ++bad;
      if (param_count(net) != 4ull * d * d + 3ull * d) ++bad;
      for (int k = 0; k < 3; ++k) {
        const Eigen::VectorXd x = random_probe(g, d);
        worst = std::max(worst, (realize(net, x) - x).cwiseAbs().maxCoeff());
      }
    }
    ident.lhs = worst + static_cast<double>(bad);
    ident.rhs = 0;
    ident.pass = bad == 0 && worst == 0.0;
    results.push_back(ident);
  }

  OpStats sum_stats, comp_stats, res_stats;
  SplitMix64 g(derive_stream(seed, 0xCA1C));
  for (int it = 0; it < instances; ++it) {
    {
      const Eigen::Index din = 1 + static_cast<Eigen::Index>(g.next_u64() % 4);
      const Eigen::Index dout = 1 + static_cast<Eigen::Index>(g.next_u64() % 4);
      const Architecture arch = random_arch(g, din, dout);
      const std::size_t M = 1 + g.next_u64() % 4;
      std::vector<NeuralNetwork> nets;
      std::vector<double> weights;
      for (std::size_t m = 0; m < M; ++m) {
        nets.push_back(random_net(g, arch));
        weights.push_back(4.0 * g.next_double() - 2.0);
      }
      const NeuralNetwork ws = weighted_sum(nets, weights);
      for (int k = 0; k < 5; ++k) {
        const Eigen::VectorXd x = random_probe(g, din);
        Eigen::VectorXd expect = Eigen::VectorXd::Zero(dout);
        for (std::size_t m = 0; m < M; ++m)
          expect += weights[m] * realize(nets[m], x);
        sum_stats.worst = std::max(
            sum_stats.worst, (realize(ws, x) - expect).cwiseAbs().maxCoeff());
      }
      if (!(architecture(ws) == arch_weighted_sum(arch, M))) ++sum_stats.arch_bad;
      if (static_cast<u128>(param_count(ws)) >
          static_cast<u128>(M) * M * param_count(nets[0]))
        ++sum_stats.bound_bad;
    }
    {
      const Eigen::Index a = 1 + static_cast<Eigen::Index>(g.next_u64() % 4);
      const Eigen::Index b = 1 + static_cast<Eigen::Index>(g.next_u64() % 4);
      const Eigen::Index c = 1 + static_cast<Eigen::Index>(g.next_u64() % 4);
      const NeuralNetwork inner = random_net(g, random_arch(g, a, b));
      const NeuralNetwork outer = random_net(g, random_arch(g, b, c));
      const NeuralNetwork id = relu_identity(static_cast<int>(b));
      const NeuralNetwork out = compose(outer, inner, id);
      for (int k = 0; k < 5; ++k) {
        const Eigen::VectorXd x = random_probe(g, a);
        const Eigen::VectorXd expect = realize(outer, realize(inner, x));
        comp_stats.worst = std::max(
            comp_stats.worst, (realize(out, x) - expect).cwiseAbs().maxCoeff());
      }
      if (!(architecture(out) ==
            arch_compose(architecture(outer), architecture(inner), 2 * b)))
        ++comp_stats.arch_bad;
      // 2 b^2 P(out) <= max{2 b^2, P(id)} (P(outer) + P(inner)), all integers.
      const u128 lhs = static_cast<u128>(2) * b * b * param_count(out);
      const u128 cap = std::max<u128>(static_cast<u128>(2) * b * b,
                                      param_count(id)) *
                       (static_cast<u128>(param_count(outer)) +
                        param_count(inner));
      if (lhs > cap) ++comp_stats.bound_bad;
    }
    {
      const Eigen::Index din = 1 + static_cast<Eigen::Index>(g.next_u64() % 4);
      const Eigen::Index dres = 1 + static_cast<Eigen::Index>(g.next_u64() % 4);
      const Architecture acc_arch = random_arch(g, din, dres);
      Architecture inc_arch = random_arch(g, dres, dres);
      const Eigen::Index acc_last = acc_arch.dims[acc_arch.dims.size() - 2];
      Eigen::Index& inc_last = inc_arch.dims[inc_arch.dims.size() - 2];
      inc_last = std::max(inc_last, acc_last - 2 * dres);
      const NeuralNetwork accum = random_net(g, acc_arch);
      const NeuralNetwork inc = random_net(g, inc_arch);
      const NeuralNetwork id = relu_identity(static_cast<int>(dres));
      const NeuralNetwork res = residual_step(accum, inc, id);
      for (int k = 0; k < 5; ++k) {
        const Eigen::VectorXd x = random_probe(g, din);
        const Eigen::VectorXd u = realize(accum, x);
        const Eigen::VectorXd expect = u + realize(inc, u);
        res_stats.worst = std::max(
            res_stats.worst, (realize(res, x) - expect).cwiseAbs().maxCoeff());
      }
      if (!(architecture(res) ==
            arch_residual_step(acc_arch, inc_arch, 2 * dres)))
        ++res_stats.arch_bad;
      const u128 cube_base =
          static_cast<u128>(param_count(inc)) + param_count(id);
      if (static_cast<u128>(param_count(res)) >
          static_cast<u128>(param_count(accum)) + cube_base * cube_base * cube_base)
        ++res_stats.bound_bad;
    }
  }
  push_op_results(results, "weighted-sum", sum_stats, instances);
  push_op_results(results, "compose", comp_stats, instances);
  push_op_results(results, "residual-step", res_stats, instances);
  return results;
}

std::vector<CheckResult> markov_suite(long samples, std::uint64_t seed) {
  struct Config {
    const char* dist;
    double eps;
    double q;
  };
  const std::vector<Config> configs = {
      {"uniform01", 0.5, 2}, {"uniform01", 0.9, 1}, {"absnormal", 1, 2},
      {"absnormal", 2, 2},   {"absnormal", 2, 4},   {"exp1", 3, 1},
      {"const-half", 0.5, 2},
  };
  std::vector<CheckResult> results;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const Config& c = configs[i];
    CheckResult r = markov_check(named_sampler(c.dist), c.eps, c.q, samples,
                                 derive_stream(seed, i));
    r.name = std::string(c.dist) + " " + r.name;
    results.push_back(std::move(r));
  }
  return results;
}

std::vector<CheckResult> moments_suite(long samples, std::uint64_t seed) {
  std::vector<CheckResult> results;
  results.push_back(brownian_moment_check(Eigen::MatrixXd::Identity(1, 1), 1.0,
                                          2.0, samples, derive_stream(seed, 1)));
  results.push_back(brownian_moment_check(Eigen::MatrixXd::Identity(3, 3), 2.0,
                                          4.0, samples, derive_stream(seed, 2)));
  Eigen::MatrixXd skewed(2, 2);
  skewed << 1.0, 0.5, 0.0, 1.0;
  results.push_back(
      brownian_moment_check(skewed, 0.5, 2.0, samples, derive_stream(seed, 3)));
  return results;
}

std::vector<CheckResult> perturbation_suite(const std::string& problem_name,
                                            int d, double T, long samples,
                                            std::uint64_t seed) {
  const std::string name = problem_name.empty() ? "ou-linear" : problem_name;
  const CatalogEntry entry = make_problem(name, d, T);
  const Eigen::VectorXd x0 = measure_center(entry.problem.measure, d);
  std::vector<CheckResult> results;
  results.push_back(
      apriori_moment_check(entry.problem, x0, 0.25, 2, samples,
                           derive_stream(seed, 1)));
  results.push_back(pathwise_perturbation_check(entry.problem, x0, 0.5, 2,
                                                samples, derive_stream(seed, 2)));
  results.push_back(strong_perturbation_check(entry.problem, x0, 0.25, 2,
                                              samples, derive_stream(seed, 3)));
  results.push_back(
      weak_perturbation_check(entry.problem, 0.5, 2, samples,
                              derive_stream(seed, 4)));
  results.push_back(
      weak_perturbation_check(entry.problem, 0.25, 2, samples,
                              derive_stream(seed, 5)));
  return results;
}

}  // namespace kolmo
