#include "kolmonet/sde.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <vector>

namespace kolmo {

Eigen::VectorXd MeasureSpec::sample(int d, SplitMix64& g) const {
  switch (kind) {
    case Kind::UniformCube: {
      Eigen::VectorXd x(d);
      for (int i = 0; i < d; ++i) x(i) = g.next_double();
      return x;
    }
    case Kind::GaussianIso: {
      Eigen::VectorXd x(d);
      for (int i = 0; i < d; ++i) x(i) = g.next_gaussian();
      return x;
    }
    case Kind::PointMass:
      if (point.size() != d) throw ShapeError("measure: point mass dim mismatch");
      return point;
  }
  throw ShapeError("measure: unknown kind");
}

Eigen::MatrixXd MeasureSpec::sample_batch(int d, long n, std::uint64_t seed) const {
  Eigen::MatrixXd X(d, n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t j) {
    SplitMix64 g(derive_stream(seed, j));
    X.col(static_cast<Eigen::Index>(j)) = sample(d, g);
  });
  return X;
}

std::string MeasureSpec::str() const {
  switch (kind) {
    case Kind::UniformCube: return "uniform-cube";
    case Kind::GaussianIso: return "gaussian-iso";
    case Kind::PointMass: return "point-mass";
  }
  return "?";
}

void validate_problem(const KolmogorovProblem& problem, std::uint64_t seed) {
  if (problem.d < 1) throw ShapeError("problem: d must be >= 1");
  if (!(problem.T > 0)) throw ShapeError("problem: T must be > 0");
  if (!problem.drift || !problem.initial_value)
    throw ShapeError("problem: drift/initial_value missing");
  if (problem.A.rows() != problem.d || problem.A.cols() != problem.d)
    throw ShapeError("problem: A must be d x d");
  diffusion_factor(problem.A);  // symmetry + PSD-after-clamp
  SplitMix64 g(derive_stream(seed, 0x11f));
  for (int trial = 0; trial < 64; ++trial) {
    Eigen::VectorXd x(problem.d), y(problem.d);
    for (int i = 0; i < problem.d; ++i) {
      x(i) = 6.0 * g.next_double() - 3.0;
      y(i) = 6.0 * g.next_double() - 3.0;
    }
    const double lhs = (problem.drift(x) - problem.drift(y)).norm();
    const double rhs = problem.drift_lipschitz * (x - y).norm() * (1.0 + 1e-6);
    if (lhs > rhs)
      throw ShapeError("problem: declared drift Lipschitz constant violated");
  }
}

EulerConfig EulerConfig::from_delta(double delta, double T) {
  if (!(delta > 0.0 && delta <= 1.0))
    throw ShapeError("euler config: delta must lie in (0,1]");
  if (!(T > 0)) throw ShapeError("euler config: T must be > 0");
  EulerConfig cfg;
  cfg.delta = delta;
  cfg.steps = static_cast<long>(std::ceil(T / (delta * delta) - 1e-9));
  cfg.steps = std::max<long>(cfg.steps, 1);
  cfg.h = T / static_cast<double>(cfg.steps);
  return cfg;
}

EulerConfig EulerConfig::from_steps(long steps, double T) {
  if (steps < 1) throw ShapeError("euler config: steps must be >= 1");
  if (!(T > 0)) throw ShapeError("euler config: T must be > 0");
  EulerConfig cfg;
  cfg.steps = steps;
  cfg.h = T / static_cast<double>(steps);
  cfg.delta = std::min(1.0, std::sqrt(cfg.h));
  return cfg;
}

double grid_projection(double t, double h) {
  if (!(h > 0) || t < 0) throw ShapeError("grid_projection: need h > 0, t >= 0");
  return std::floor(t / h + 1e-12) * h;
}

Eigen::MatrixXd diffusion_factor(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols()) throw ShapeError("diffusion_factor: A not square");
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw ShapeError("diffusion_factor: A not symmetric within tolerance");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (A + A.transpose()));
  if (es.info() != Eigen::Success)
    throw NumericError("diffusion_factor: eigendecomposition failed");
  Eigen::VectorXd lam = es.eigenvalues();
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam(i) < -1e-10)
      throw ShapeError("diffusion_factor: A has eigenvalue " +
                       format_double(lam(i)) + " below the PSD clamp");
    if (lam(i) < 0) lam(i) = 0;
  }
  Eigen::MatrixXd diff = es.eigenvectors() *
                         (2.0 * lam.array()).sqrt().matrix().asDiagonal() *
                         es.eigenvectors().transpose();
  const double resid = (diff * diff - 2.0 * A).norm();
  if (resid > 1e-10 * std::max(1.0, A.norm()))
    throw NumericError("diffusion_factor: residual " + format_double(resid));
  return diff;
}

NoiseRealization NoiseRealization::generate(std::uint64_t seed, long steps,
                                            int d, double h) {
  if (steps < 1 || d < 1 || !(h > 0))
    throw ShapeError("noise: need steps >= 1, d >= 1, h > 0");
  NoiseRealization n;
  n.seed = seed;
  n.h = h;
  n.increments.resize(steps, d);
  SplitMix64 g(seed);
  const double sd = std::sqrt(h);
  for (long k = 0; k < steps; ++k)
    for (int i = 0; i < d; ++i) n.increments(k, i) = sd * g.next_gaussian();
  return n;
}

EulerResult euler_path(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& drift,
                       const Eigen::VectorXd& x0, const Eigen::MatrixXd& diff,
                       const EulerConfig& cfg, const NoiseRealization& noise,
                       bool record_path) {
  const Eigen::Index d = x0.size();
  if (diff.rows() != d || diff.cols() != d)
    throw ShapeError("euler_path: diffusion matrix dim mismatch");
  if (noise.increments.rows() != cfg.steps || noise.increments.cols() != d)
    throw ShapeError("euler_path: noise grid mismatch");
  if (std::fabs(noise.h - cfg.h) > 1e-12)
    throw ShapeError("euler_path: noise step length != config step length");
  EulerResult res;
  Eigen::VectorXd y = x0;
  if (record_path) {
    res.path.emplace();
    res.path->reserve(static_cast<std::size_t>(cfg.steps) + 1);
    res.path->push_back(y);
  }
  for (long k = 0; k < cfg.steps; ++k) {
    y += cfg.h * drift(y) + diff * noise.increments.row(k).transpose();
    if (!y.allFinite())
      throw NumericError("euler_path: non-finite state at step " + std::to_string(k + 1));
    if (record_path) res.path->push_back(y);
  }
  res.endpoint = std::move(y);
  return res;
}

Eigen::MatrixXd euler_endpoints_common_noise(
    const std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>& drift_batch,
    const Eigen::MatrixXd& X0, const Eigen::MatrixXd& diff,
    const EulerConfig& cfg, const NoiseRealization& noise) {
  const Eigen::Index d = X0.rows();
  if (noise.increments.rows() != cfg.steps || noise.increments.cols() != d)
    throw ShapeError("euler batch: noise grid mismatch");
  if (std::fabs(noise.h - cfg.h) > 1e-12)
    throw ShapeError("euler batch: noise step length != config step length");
  Eigen::MatrixXd Y = X0;
  for (long k = 0; k < cfg.steps; ++k) {
    const Eigen::VectorXd shift = diff * noise.increments.row(k).transpose();
    Y = (Y + cfg.h * drift_batch(Y)).colwise() + shift;
    if (!Y.allFinite())
      throw NumericError("euler batch: non-finite state at step " + std::to_string(k + 1));
  }
  return Y;
}

McEstimate brownian_moment(const Eigen::MatrixXd& diff, double t, double p,
                           long samples, std::uint64_t seed) {
  if (!(p > 0) || t < 0) throw ShapeError("brownian_moment: need p > 0, t >= 0");
  if (samples < 2) throw ShapeError("brownian_moment: need >= 2 samples");
  const Eigen::Index d = diff.cols();
  std::vector<double> vals(static_cast<std::size_t>(samples));
  const double sd = std::sqrt(t);
  parallel_for(static_cast<std::size_t>(samples), [&](std::size_t j) {
    SplitMix64 g(derive_stream(seed, j));
    Eigen::VectorXd z(d);
    for (Eigen::Index i = 0; i < d; ++i) z(i) = sd * g.next_gaussian();
    vals[j] = std::pow((diff * z).norm(), p);
  });
  double sum = 0;
  for (double v : vals) sum += v;
  const double mean = sum / static_cast<double>(samples);
  double ss = 0;
  for (double v : vals) ss += (v - mean) * (v - mean);
  const double se_mean = std::sqrt(ss / static_cast<double>(samples - 1) /
                                   static_cast<double>(samples));
  McEstimate est;
  est.samples = samples;
  est.value = std::pow(mean, 1.0 / p);
  // delta method: d/dm m^{1/p} = m^{1/p-1}/p
  est.stderr_ = mean > 0 ? std::pow(mean, 1.0 / p - 1.0) / p * se_mean : se_mean;
  return est;
}

void coupled_paths(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& mu_fine,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& mu_coarse,
    const Eigen::VectorXd& x0, const Eigen::MatrixXd& diff,
    const EulerConfig& cfg, int refine, double p, long samples,
    std::uint64_t seed,
    const std::function<void(long, const Eigen::VectorXd&,
                             const Eigen::VectorXd&, double)>& cb) {
  if (refine < 1) throw ShapeError("coupled_paths: refine must be >= 1");
  if (samples < 1) throw ShapeError("coupled_paths: need >= 1 sample");
  const Eigen::Index d = x0.size();
  const double hf = cfg.h / refine;
  const double sd = std::sqrt(hf);
  parallel_for(static_cast<std::size_t>(samples), [&](std::size_t j) {
    SplitMix64 g(derive_stream(seed, j));
    Eigen::VectorXd X = x0, Y = x0, dW(d);
    double integ = 0;
    for (long k = 0; k < cfg.steps; ++k) {
      const Eigen::VectorXd a = mu_coarse(Y);  // frozen at the coarse node
      for (int r = 0; r < refine; ++r) {
        for (Eigen::Index i = 0; i < d; ++i) dW(i) = sd * g.next_gaussian();
        integ += hf * std::pow((a - mu_fine(Y)).norm(), p);
        X += hf * mu_fine(X) + diff * dW;
        Y += hf * a + diff * dW;
      }
      if (!X.allFinite() || !Y.allFinite())
        throw NumericError("coupled_paths: non-finite state at coarse step " +
                           std::to_string(k + 1));
    }
    cb(static_cast<long>(j), X, Y, integ);
  });
}

McEstimate coupled_strong_error(const KolmogorovProblem& problem,
                                const Eigen::VectorXd& x0, double delta,
                                double p, long samples, std::uint64_t seed) {
  if (!(p >= 2)) throw ShapeError("coupled_strong_error: p must be >= 2");
  if (samples < 2) throw ShapeError("coupled_strong_error: need >= 2 samples");
  const EulerConfig cfg = EulerConfig::from_delta(delta, problem.T);
  const Eigen::MatrixXd diff = diffusion_factor(problem.A);
  std::vector<double> vals(static_cast<std::size_t>(samples));
  coupled_paths(problem.drift, problem.drift, x0, diff, cfg, 64, p, samples, seed,
                [&](long j, const Eigen::VectorXd& X, const Eigen::VectorXd& Y,
                    double) { vals[static_cast<std::size_t>(j)] = std::pow((X - Y).norm(), p); });
  double sum = 0;
  for (double v : vals) sum += v;
  const double mean = sum / static_cast<double>(samples);
  double ss = 0;
  for (double v : vals) ss += (v - mean) * (v - mean);
  const double se_mean = std::sqrt(ss / static_cast<double>(samples - 1) /
                                   static_cast<double>(samples));
  McEstimate est;
  est.samples = samples;
  est.value = std::pow(mean, 1.0 / p);
  est.stderr_ = mean > 0 ? std::pow(mean, 1.0 / p - 1.0) / p * se_mean : se_mean;
  return est;
}

}  // namespace kolmo
