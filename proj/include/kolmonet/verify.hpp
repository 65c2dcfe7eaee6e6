#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kolmonet/oracle.hpp"
#include "kolmonet/sde.hpp"

namespace kolmo {

// One verified inequality: pass iff lhs <= rhs + 3 sigma (one-sided).
struct CheckResult {
  std::string name;
  bool pass = false;
  double lhs = 0;
  double rhs = 0;
  double sigma = 0;  // standard error entering the slack
  long samples = 0;
  std::string detail;

  std::string str() const;
};

// Scalar sampler driven by a caller-owned generator.
using Sampler = std::function<double(SplitMix64&)>;

// Named samplers for the catalog distributions: uniform01, absnormal,
// const-half, exp1.
Sampler named_sampler(const std::string& name);
std::vector<std::string> sampler_names();

// [P(|X| >= eps)]^{1/q} vs (E|X|^q)^{1/q} / eps  (Markov's inequality).
CheckResult markov_check(const Sampler& dist, double epsilon, double q,
                         long samples, std::uint64_t seed);

// (E||BW_t||^p)^{1/p} vs sqrt(max{1,p-1} Trace(B*B) t): the Gaussian moment
// bound for a linearly transformed Brownian motion.
CheckResult brownian_moment_check(const Eigen::MatrixXd& diff, double t, double p,
                                  long samples, std::uint64_t seed);

// A-priori Euler moment bound:
// sup_k (E||Y_{t_k}||^p)^{1/p} vs (||xi|| + CT + w_p) e^{cT}.
CheckResult apriori_moment_check(const KolmogorovProblem& problem,
                                 const Eigen::VectorXd& x0, double delta,
                                 double p, long samples, std::uint64_t seed);

// Deterministic pathwise perturbation bound at t = T with Young parameter 1:
// ||X_T - Y_T||^p <= e^{[L + (1-1/p)] p T} Int ||a_s - mu(Y_s)||^p ds per
// path; reports the worst sampled ratio LHS/RHS (pass iff <= 1 + tolerance,
// the tolerance covering the fine-Euler proxy for X).
CheckResult pathwise_perturbation_check(const KolmogorovProblem& problem,
                                        const Eigen::VectorXd& x0, double delta,
                                        double p, long samples,
                                        std::uint64_t seed);

// Strong perturbation bound with a_s = drift(Y_{chi(s)}):
// (E||X_T - Y_T||^p)^{1/p} vs
// e^{[L + (1-1/p)/delta] T} delta^{1-1/p} [Int E||a_s - mu(Y_s)||^p ds]^{1/p}.
CheckResult strong_perturbation_check(const KolmogorovProblem& problem,
                                      const Eigen::VectorXd& x0, double delta,
                                      double p, long samples,
                                      std::uint64_t seed);

// Weak error bound |E f0(X_T) - E phi0(Y_T)| vs the closed-form right-hand
// side built from the approximation/Lipschitz/growth constants, with the
// constants estimated over 10^4 probes on ||x|| <= 5, inflated 1.1x.
CheckResult weak_perturbation_check(const KolmogorovProblem& problem,
                                    double delta, double p, long samples,
                                    std::uint64_t seed);

enum class SweepKind { EulerWeak, MonteCarlo, ParamGrowthInD, ParamGrowthInEps };

struct SweepResult {
  SweepKind kind = SweepKind::EulerWeak;
  std::vector<double> axis;
  std::vector<double> values;
  std::vector<double> stderrs;
  std::vector<std::string> extras;  // per-row trailing CSV fields
  LineFit fit;                      // log-log
  std::string csv_path;
};

struct SweepParams {
  double epsilon = 0.2;
  double p = 2;
  long samples = 0;  // 0 = kind default
  std::string out_path;
};

// axis: EulerWeak = h values; MonteCarlo = M values; ParamGrowthInD = d
// values; ParamGrowthInEps = epsilon values.
SweepResult rate_sweep(SweepKind kind, const std::string& problem_name, int d,
                       double T, const std::vector<double>& axis,
                       const SweepParams& params, std::uint64_t seed);

std::string sweep_kind_name(SweepKind kind);
void write_sweep_csv(const std::string& path, const SweepResult& result);

// Randomized realization-equivalence / architecture / parameter-bound suite
// over the four calculus operations.
std::vector<CheckResult> calculus_suite(int instances, std::uint64_t seed);

std::vector<CheckResult> markov_suite(long samples, std::uint64_t seed);
std::vector<CheckResult> moments_suite(long samples, std::uint64_t seed);
std::vector<CheckResult> perturbation_suite(const std::string& problem_name,
                                            int d, double T, long samples,
                                            std::uint64_t seed);

}  // namespace kolmo
