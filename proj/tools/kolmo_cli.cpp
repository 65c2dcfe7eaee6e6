// kolmo: construct / verify / sweep front end.
//
// Exit codes: 0 ok, 1 failed property, 2 config error, 3 calibration
// exhausted, 4 numeric failure. Results go to stdout, diagnostics to stderr.

#include <cmath>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kolmonet/calculus.hpp"
#include "kolmonet/constructor.hpp"
#include "kolmonet/network.hpp"
#include "kolmonet/oracle.hpp"
#include "kolmonet/verify.hpp"

namespace {

struct RunConfig {
  std::string problem;  // empty -> per-command default
  int dim = 0;
  double eps = 0.2;
  double p = 2.0;
  double T = 1.0;
  std::uint64_t seed = 0;
  std::string mode = "calibrated";
  int candidates = 8;
  long budget = 40;
  long samples = 0;
  std::uint64_t max_params = 200000000;
  std::string out;
  bool dry_run = false;
  std::uint64_t M_override = 0;
  double delta_override = 0;
  double cert_c = 10.0;
  std::string suite;
  std::string kind;
};

double drift_zero_norm(const kolmo::KolmogorovProblem& problem) {
  return problem.drift(Eigen::VectorXd::Zero(problem.d)).norm();
}

kolmo::PaperConstantsInput paper_input(const kolmo::KolmogorovProblem& problem,
                                       double eps, double p) {
  kolmo::PaperConstantsInput in;
  in.d = problem.d;
  in.epsilon = eps;
  in.kappa = problem.kappa_hint;
  in.eta = problem.eta_hint;
  in.p = std::max(2.0, p);
  in.T = problem.T;
  in.drift_zero_norm = drift_zero_norm(problem);
  return in;
}

// Network-budget hypothesis P(phi0) + P(phi1) + P(id) <= kappa d^kappa
// eps^-kappa, in log space.
bool budget_hypothesis_holds(const kolmo::KolmogorovProblem& problem,
                             double eps, std::uint64_t* total_out,
                             double* log_rhs_out) {
  std::uint64_t total = kolmo::param_count(kolmo::relu_identity(problem.d));
  if (problem.f0_net) total += kolmo::param_count(*problem.f0_net);
  if (problem.drift_net) total += kolmo::param_count(*problem.drift_net);
  const double kappa = problem.kappa_hint;
  const double log_rhs = std::log(kappa) + kappa * std::log(problem.d) -
                         kappa * std::log(eps);
  if (total_out) *total_out = total;
  if (log_rhs_out) *log_rhs_out = log_rhs;
  return std::log(static_cast<double>(total)) <= log_rhs;
}

int cmd_construct(const RunConfig& cfg) {
  const std::string name = cfg.problem.empty() ? "heat-max" : cfg.problem;
  const kolmo::CatalogEntry entry = kolmo::make_problem(name, cfg.dim, cfg.T);
  kolmo::validate_problem(entry.problem, cfg.seed);
  std::cout << "problem=" << name << " d=" << cfg.dim
            << " eps=" << kolmo::format_double(cfg.eps)
            << " p=" << kolmo::format_double(cfg.p)
            << " T=" << kolmo::format_double(cfg.T) << " seed=" << cfg.seed
            << " mode=" << cfg.mode << "\n";

  kolmo::RateConstants constants;
  const kolmo::PaperConstantsInput in = paper_input(entry.problem, cfg.eps, cfg.p);
  if (cfg.mode == "paper") {
    std::uint64_t budget_total = 0;
    double budget_log_rhs = 0;
    if (!budget_hypothesis_holds(entry.problem, cfg.eps, &budget_total,
                                 &budget_log_rhs)) {
      std::cerr << "construct: network budget hypothesis fails: P(phi0)+P(phi1)"
                   "+P(id)="
                << budget_total << " > kappa d^kappa eps^-kappa (log "
                << kolmo::format_double(budget_log_rhs)
                << "); lower eps or pick another problem\n";
      return 2;
    }
    constants = kolmo::paper_constants(in);
    std::cout << "kappa=" << kolmo::format_double(in.kappa)
              << " eta=" << kolmo::format_double(in.eta) << "\n";
    std::cout << "log_M=" << kolmo::format_double(constants.log_M)
              << " overflow=" << (constants.m_overflows ? "true" : "false");
    if (!constants.m_overflows) std::cout << " M=" << constants.M;
    std::cout << "\n";
    std::cout << "log_delta=" << kolmo::format_double(constants.log_delta)
              << " delta=" << kolmo::format_double(constants.delta) << "\n";
    std::cout << "log_param_bound="
              << kolmo::format_double(kolmo::log_paper_param_bound(in)) << "\n";
    if (cfg.dry_run) return 0;
    if (constants.m_overflows || constants.M > 1000000) {
      std::cerr << "construct: paper-mode M is existence-grade; refusing to "
                   "materialize (use --dry-run or --mode calibrated)\n";
      return 2;
    }
  } else if (cfg.mode == "calibrated") {
    if (cfg.delta_override > 0 && cfg.M_override == 0) {
      std::cerr << "construct: --delta override requires --M\n";
      return 2;
    }
    if (cfg.M_override > 0) {
      constants.mode = kolmo::ConstantsMode::Calibrated;
      constants.M = cfg.M_override;
      constants.delta = cfg.delta_override > 0 ? cfg.delta_override : 1.0;
      constants.log_M = std::log(static_cast<double>(constants.M));
      constants.log_delta = std::log(constants.delta);
    } else {
      kolmo::CalibrationTrace trace;
      constants = kolmo::calibrate(entry, cfg.eps, cfg.p, cfg.seed, cfg.budget, &trace);
      std::cout << "calibration_steps=" << trace.steps.size() << "\n";
    }
  } else {
    std::cerr << "construct: unknown mode '" << cfg.mode
              << "' (paper|calibrated)\n";
    return 2;
  }

  const kolmo::BuildPlan plan =
      kolmo::plan_construction(entry.problem, constants.M, constants.delta);
  if (cfg.dry_run) {
    std::cout << "M=" << constants.M
              << " delta=" << kolmo::format_double(constants.delta) << "\n";
    std::cout << "planned_params=" << plan.mc_params
              << " depth=" << plan.depth << " steps=" << plan.steps << "\n";
    return 0;
  }
  if (plan.mc_params > cfg.max_params) {
    std::cerr << "construct: planned network has " << plan.mc_params
              << " parameters, above the --max-params bound " << cfg.max_params
              << "; raise --eps, lower --M/--candidates, or raise --max-params"
                 " (use --dry-run to inspect the plan)\n";
    return 2;
  }

  const kolmo::ConstructionReport report = kolmo::select_realization(
      entry, constants, cfg.candidates, cfg.seed, cfg.eps, cfg.p);
  std::cout << "M=" << report.M
            << " delta=" << kolmo::format_double(report.delta) << "\n";
  std::cout << "params=" << report.param_count << " depth=" << report.depth
            << "\n";
  std::cout << "selected=" << report.selected_index << " of "
            << report.candidates.size() << "\n";
  std::cout << "lp_error=" << kolmo::format_double(report.selected_error)
            << " stderr=" << kolmo::format_double(report.selected_stderr)
            << "\n";

  const kolmo::CertificateResult cert = kolmo::param_certificate(
      report, cfg.cert_c, cfg.dim, cfg.eps,
      cfg.mode == "paper" ? &in : nullptr);
  std::cout << "certificate=" << (cert.pass ? "pass" : "fail")
            << " c=" << kolmo::format_double(cfg.cert_c)
            << " log_margin=" << kolmo::format_double(cert.log_margin) << "\n";
  if (cert.explicit_bound_checked)
    std::cout << "explicit_bound="
              << (cert.explicit_bound_pass ? "pass" : "fail") << " log_margin="
              << kolmo::format_double(cert.explicit_log_margin) << "\n";

  const std::string base = cfg.out.empty() ? "construct" : cfg.out;
  const std::string net_file = base + ".network.json";
  const std::string report_file = base + ".report.json";
  kolmo::save_network(report.network, net_file);
  kolmo::write_construction_report(report_file, report, name, cfg.eps,
                                   net_file);
  std::cout << "network=" << net_file << "\n";
  std::cout << "report=" << report_file << "\n";
  return cert.pass ? 0 : 1;
}

int cmd_verify(const RunConfig& cfg) {
  std::vector<kolmo::CheckResult> results;
  if (cfg.suite == "calculus") {
    const int instances = cfg.samples > 0 ? static_cast<int>(cfg.samples) : 200;
    results = kolmo::calculus_suite(instances, cfg.seed);
  } else if (cfg.suite == "markov") {
    results = kolmo::markov_suite(cfg.samples > 0 ? cfg.samples : 10000,
                                  cfg.seed);
  } else if (cfg.suite == "moments") {
    results = kolmo::moments_suite(cfg.samples > 0 ? cfg.samples : 10000,
                                   cfg.seed);
  } else if (cfg.suite == "perturbation") {
    const int d = cfg.dim > 0 ? cfg.dim : 2;
    results = kolmo::perturbation_suite(cfg.problem, d, cfg.T,
                                        cfg.samples > 0 ? cfg.samples : 10000,
                                        cfg.seed);
  } else {
    std::cerr << "verify: unknown suite '" << cfg.suite
              << "' (calculus|markov|perturbation|moments)\n";
    return 2;
  }
  long failures = 0;
  for (const kolmo::CheckResult& r : results) {
    std::cout << r.str() << "\n";
    if (!r.pass) ++failures;
  }
  std::cout << "suite=" << cfg.suite << " checks=" << results.size()
            << " failures=" << failures << "\n";
  return failures == 0 ? 0 : 1;
}

int cmd_sweep(const RunConfig& cfg) {
  kolmo::SweepKind kind;
  if (cfg.kind == "euler") kind = kolmo::SweepKind::EulerWeak;
  else if (cfg.kind == "mc") kind = kolmo::SweepKind::MonteCarlo;
  else if (cfg.kind == "params-d") kind = kolmo::SweepKind::ParamGrowthInD;
  else if (cfg.kind == "params-eps") kind = kolmo::SweepKind::ParamGrowthInEps;
  else {
    std::cerr << "sweep: unknown kind '" << cfg.kind
              << "' (euler|mc|params-d|params-eps)\n";
    return 2;
  }
  kolmo::SweepParams params;
  params.epsilon = cfg.eps;
  params.p = cfg.p;
  params.samples = cfg.samples;
  params.out_path = cfg.out.empty() ? "sweep-" + cfg.kind + ".csv" : cfg.out;
  const kolmo::SweepResult result =
      kolmo::rate_sweep(kind, cfg.problem, cfg.dim, cfg.T, {}, params, cfg.seed);
  std::cout << "kind=" << cfg.kind << " points=" << result.axis.size() << "\n";
  std::cout << "slope=" << kolmo::format_double(result.fit.slope)
            << " slope_se=" << kolmo::format_double(result.fit.slope_se)
            << " r2=" << kolmo::format_double(result.fit.r2) << "\n";
  std::cout << "csv=" << result.csv_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  CLI::App app{"Explicit deep ReLU network construction for Kolmogorov PDEs"};
  app.require_subcommand(1);

  CLI::App* con = app.add_subcommand(
      "construct", "Build a network approximating u(T, .) to target accuracy");
  con->add_option("--problem", cfg.problem, "catalog problem name");
  con->add_option("--dim", cfg.dim, "spatial dimension d")->required();
  con->add_option("--eps", cfg.eps, "target L^p(nu) accuracy")->required();
  con->add_option("--p", cfg.p, "error norm exponent");
  con->add_option("--T", cfg.T, "time horizon");
  con->add_option("--seed", cfg.seed, "master seed");
  con->add_option("--mode", cfg.mode, "paper|calibrated");
  con->add_option("--candidates", cfg.candidates, "realizations tried");
  con->add_option("--budget", cfg.budget, "max calibration steps");
  con->add_option("--samples", cfg.samples, "reserved sample override");
  con->add_option("--M", cfg.M_override, "Monte-Carlo count override");
  con->add_option("--delta", cfg.delta_override, "step control override");
  con->add_option("--out", cfg.out, "output path prefix");
  con->add_option("--cert-c", cfg.cert_c,
                  "exponent c certified in P <= c d^c eps^-c");
  con->add_option("--max-params", cfg.max_params,
                  "refuse builds planned above this parameter count");
  con->add_flag("--dry-run", cfg.dry_run, "print constants, skip the build");

  CLI::App* ver = app.add_subcommand("verify", "Run a property suite");
  ver->add_option("suite", cfg.suite, "calculus|markov|perturbation|moments")
      ->required();
  ver->add_option("--problem", cfg.problem, "catalog problem name");
  ver->add_option("--dim", cfg.dim, "spatial dimension d");
  ver->add_option("--T", cfg.T, "time horizon");
  ver->add_option("--samples", cfg.samples, "samples (or instances)");
  ver->add_option("--seed", cfg.seed, "master seed");

  CLI::App* swp = app.add_subcommand("sweep", "Measure a convergence rate");
  swp->add_option("kind", cfg.kind, "euler|mc|params-d|params-eps")->required();
  swp->add_option("--problem", cfg.problem, "catalog problem name");
  swp->add_option("--dim", cfg.dim, "spatial dimension d");
  swp->add_option("--eps", cfg.eps, "accuracy for parameter sweeps");
  swp->add_option("--p", cfg.p, "error norm exponent");
  swp->add_option("--T", cfg.T, "time horizon");
  swp->add_option("--samples", cfg.samples, "per-point sample override");
  swp->add_option("--seed", cfg.seed, "master seed");
  swp->add_option("--out", cfg.out, "CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (con->parsed()) return cmd_construct(cfg);
    if (ver->parsed()) return cmd_verify(cfg);
    if (swp->parsed()) return cmd_sweep(cfg);
    std::cerr << "no subcommand\n";
    return 2;
  } catch (const kolmo::CalibrationError& e) {
    std::cerr << "calibration failed: " << e.what() << " (best M=" << e.best_M
              << " delta=" << kolmo::format_double(e.best_delta)
              << " error=" << kolmo::format_double(e.best_error) << ")\n";
    return 3;
  } catch (const kolmo::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 4;
  } catch (const kolmo::ShapeError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
