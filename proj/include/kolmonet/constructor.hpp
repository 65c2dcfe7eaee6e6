#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kolmonet/calculus.hpp"
#include "kolmonet/network.hpp"
#include "kolmonet/oracle.hpp"
#include "kolmonet/sde.hpp"

namespace kolmo {

enum class ConstantsMode { PaperFormula, Calibrated };

struct RateConstants {
  ConstantsMode mode = ConstantsMode::Calibrated;
  std::uint64_t M = 1;   // Monte-Carlo count
  double delta = 1.0;    // delta in (0,1]
  // PaperFormula extras, kept in log space: the closed forms overflow doubles
  // long before d or 1/eps get interesting.
  double log_M = 0;          // ln of the real-valued expression M is ceiled from
  double log_delta = 0;      // ln D_{d,eps} before the (0,1] clamp
  bool m_overflows = false;  // integer M not representable in 64 bits
};

struct PaperConstantsInput {
  double d = 1;
  double epsilon = 1;
  double kappa = 1;
  double eta = 1;
  double p = 2;
  double T = 1;
  double drift_zero_norm = 0;  // ||f_{1,d}(0)||
};

// Verbatim log-space evaluation of the proof's closed-form Monte-Carlo count
// M_{d,eps} and step-size control D_{d,eps}; iota = max{kappa,1} is internal.
RateConstants paper_constants(const PaperConstantsInput& in);

// ln of the proof's explicit parameter bound
// 2 (...)^2 iota^2 kappa^2 (T+2) d^{2(p kappa iota + eta + 4 kappa) + ...} eps^{-3 kappa - 6}.
double log_paper_param_bound(const PaperConstantsInput& in);

struct CalibrationStep {
  std::uint64_t M = 0;
  double delta = 1;
  double error = 0;
  double stderr_ = 0;
  std::string action;  // "raise-M" | "lower-delta" | "accept"
};

struct CalibrationTrace {
  std::vector<CalibrationStep> steps;
};

// Doubling search over M in {4,8,16,...} and halving over delta until a
// candidate build's lp_error and its predicted build-to-build Monte-Carlo
// noise are both <= epsilon/2. budget caps the number of
// candidate evaluations; exhaustion throws CalibrationError carrying the
// best constants found.
RateConstants calibrate(const CatalogEntry& entry, double epsilon, double p,
                        std::uint64_t seed, long budget,
                        CalibrationTrace* trace = nullptr);

struct McErrorEstimate {
  ErrorReport report;
  double mc_noise = 0;  // sqrt(mean_x Var[M-sample mean at x])
};

// L^p(nu) error of the (M, delta) construction, evaluated through the Euler
// realization identity instead of materializing the weighted sum. Sample m
// rides noise stream derive_stream(build_seed, m), matching build_mc_network.
McErrorEstimate estimate_mc_error(const CatalogEntry& entry, std::uint64_t M,
                                  double delta, double p, long probes,
                                  std::uint64_t build_seed,
                                  std::uint64_t eval_seed);

// The single-sample random DNN for one omega: accum starts at relu_identity(d);
// per Euler step k, residual_step(accum, scale_shift_output(drift_net, h,
// A dW_k), id_net); finally compose(f0_net, accum, id_net).
NeuralNetwork build_sample_network(const KolmogorovProblem& problem, double delta,
                                   const NoiseRealization& noise,
                                   const NeuralNetwork& id_net);

struct CandidateRecord {
  std::uint64_t seed = 0;
  double error = 0;
  double stderr_ = 0;
};

struct ConstructionReport {
  NeuralNetwork network;
  std::uint64_t param_count = 0;
  int depth = 0;
  std::uint64_t M = 1;
  double delta = 1;
  std::uint64_t seed = 0;
  double p = 2;
  std::vector<CandidateRecord> candidates;  // selection trace
  int selected_index = 0;
  double selected_error = 0;  // lp_error of the returned network, fresh seed
  double selected_stderr = 0;
};

// 1/M weighted_sum of M sample networks (sample m rides stream
// derive_stream(seed, m)). No selection.
ConstructionReport build_mc_network(const KolmogorovProblem& problem,
                                    const RateConstants& constants,
                                    std::uint64_t seed,
                                    const NeuralNetwork& id_net);

// K candidate MC networks on derived seeds; per-candidate lp_error estimated
// through the Euler realization identity (the builds are validated to match
// it to 1e-8); the argmin is materialized and re-measured on a fresh
// evaluation seed.
ConstructionReport select_realization(const CatalogEntry& entry,
                                      const RateConstants& constants, int K,
                                      std::uint64_t seed, double epsilon,
                                      double p);

struct CertificateResult {
  bool pass = false;
  double log_margin = 0;  // ln(c d^c / eps^c) - ln P
  bool explicit_bound_checked = false;  // PaperFormula mode only
  bool explicit_bound_pass = false;
  double explicit_log_margin = 0;
};

// P <= c d^c eps^{-c} in log space; when paper_in is given (PaperFormula
// constants) also the proof's explicit exponent bound.
CertificateResult param_certificate(std::uint64_t params, double c, double d,
                                    double epsilon,
                                    const PaperConstantsInput* paper_in = nullptr);
CertificateResult param_certificate(const ConstructionReport& report, double c,
                                    double d, double epsilon,
                                    const PaperConstantsInput* paper_in = nullptr);

/// Architecture-only image of the full construction: exact parameter counts
// without materializing weights (the sweep sizes would not fit in memory).
struct BuildPlan {
  Architecture sample_arch;
  std::uint64_t sample_params = 0;
  std::uint64_t mc_params = 0;
  long steps = 0;
  int depth = 0;  // of the sample network
};

BuildPlan plan_construction(const KolmogorovProblem& problem, std::uint64_t M,
                            double delta);

// Versioned JSON record (schema version 1); the network itself goes to its
// own file via save_network.
void write_construction_report(const std::string& path,
                               const ConstructionReport& report,
                               const std::string& problem_name, double epsilon,
                               const std::string& network_file);

}  // namespace kolmo
