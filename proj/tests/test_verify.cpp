#include <doctest.h>

#include <Eigen/Dense>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "kolmonet/common.hpp"
#include "kolmonet/rng.hpp"
#include "kolmonet/verify.hpp"

using namespace kolmo;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct EnvGuard {
  std::string name;
  std::string old_value;
  bool had = false;
  EnvGuard(const char* n, const char* v) : name(n) {
    if (const char* cur = std::getenv(n)) {
      had = true;
      old_value = cur;
    }
    setenv(n, v, 1);
  }
  ~EnvGuard() {
    if (had) {
      setenv(name.c_str(), old_value.c_str(), 1);
    } else {
      unsetenv(name.c_str());
    }
  }
};

}  // namespace

TEST_CASE("fit_line recovers an exact line and guards its preconditions") {
  const std::vector<double> x = {0.0, 1.0, 2.0, 3.0};
  const std::vector<double> y = {1.0, 3.0, 5.0, 7.0};
  const LineFit fit = fit_line(x, y);
  CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(fit.intercept == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(fit.slope_se < 1e-12);
  CHECK_THROWS_AS(fit_line({1.0}, {1.0}), ShapeError);
  CHECK_THROWS_AS(fit_line({1.0, 2.0}, {1.0}), ShapeError);
  CHECK_THROWS_AS(fit_line({2.0, 2.0, 2.0}, {1.0, 2.0, 3.0}), ShapeError);
}

TEST_CASE("named samplers have the advertised ranges") {
  CHECK(sampler_names().size() == 4);
  SplitMix64 g(3);
  const Sampler uniform = named_sampler("uniform01");
  const Sampler absn = named_sampler("absnormal");
  const Sampler half = named_sampler("const-half");
  const Sampler exp1 = named_sampler("exp1");
  for (int i = 0; i < 200; ++i) {
    const double u = uniform(g);
    CHECK(u > 0.0);
    CHECK(u < 1.0);
    CHECK(absn(g) >= 0.0);
    CHECK(half(g) == 0.5);
    CHECK(exp1(g) > 0.0);
  }
  CHECK_THROWS_AS(named_sampler("cauchy"), ShapeError);
}

TEST_CASE("markov_check accepts a true tail bound") {
  const CheckResult r = markov_check(named_sampler("uniform01"), 0.5, 2.0, 4000, 7);
  CHECK(r.pass);
  CHECK(r.samples == 4000);
  CHECK(r.str().find("[PASS]") == 0);
  CHECK(r.str().find("lhs=") != std::string::npos);
}

TEST_CASE("the stock suites pass at reduced sample counts") {
  for (const CheckResult& r : markov_suite(4000, 17)) {
    CAPTURE(r.str());
    CHECK(r.pass);
  }
  for (const CheckResult& r : moments_suite(2000, 18)) {
    CAPTURE(r.str());
    CHECK(r.pass);
  }
  for (const CheckResult& r : perturbation_suite("ou-linear", 2, 1.0, 2000, 11)) {
    CAPTURE(r.str());
    CHECK(r.pass);
  }
}

TEST_CASE("calculus_suite passes on randomized instances") {
  const std::vector<CheckResult> results = calculus_suite(20, 5);
  CHECK(results.size() >= 10);
  for (const CheckResult& r : results) {
    CAPTURE(r.str());
    CHECK(r.pass);
    CHECK_FALSE(r.name.empty());
  }
}

TEST_CASE("rate_sweep insists on at least three axis points") {
  SweepParams params;
  CHECK_THROWS_AS(rate_sweep(SweepKind::MonteCarlo, "heat-max", 1, 1.0, {4.0},
                             params, 1),
                  ShapeError);
  CHECK_THROWS_AS(rate_sweep(SweepKind::EulerWeak, "ou-linear", 1, 1.0,
                             {0.1, 0.05}, params, 1),
                  ShapeError);
}

TEST_CASE("sweep kinds map to stable names") {
  CHECK(sweep_kind_name(SweepKind::EulerWeak) == "euler");
  CHECK(sweep_kind_name(SweepKind::MonteCarlo) == "mc");
  CHECK(sweep_kind_name(SweepKind::ParamGrowthInD) == "params-d");
  CHECK(sweep_kind_name(SweepKind::ParamGrowthInEps) == "params-eps");
}

TEST_CASE("write_sweep_csv emits the documented schema") {
  SweepResult r;
  r.kind = SweepKind::MonteCarlo;
  r.axis = {4.0, 16.0};
  r.values = {0.5, 0.25};
  r.stderrs = {0.01, 0.005};
  r.extras = {"", "hello"};
  const std::string path = "test_sweep.csv";
  write_sweep_csv(path, r);
  CHECK(slurp(path) == "axis,value,stderr,extra\n4,0.5,0.01,\n16,0.25,0.005,hello\n");
  std::remove(path.c_str());
}

TEST_CASE("Monte-Carlo sweeps are deterministic and thread-count invariant") {
  SweepParams params;
  params.samples = 64;   // probes per error estimate; keeps the test fast
  params.out_path = "test_mc_sweep_a.csv";
  const std::vector<double> axis = {4.0, 8.0, 16.0};
  SweepResult a;
  {
    EnvGuard env("KOLMO_THREADS", "1");
    a = rate_sweep(SweepKind::MonteCarlo, "heat-max", 1, 1.0, axis, params, 5);
  }
  params.out_path = "test_mc_sweep_b.csv";
  SweepResult b;
  {
    EnvGuard env("KOLMO_THREADS", "3");
    b = rate_sweep(SweepKind::MonteCarlo, "heat-max", 1, 1.0, axis, params, 5);
  }
  REQUIRE(a.values.size() == 3);
  REQUIRE(b.values.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a.values[i] == b.values[i]);
    CHECK(a.stderrs[i] == b.stderrs[i]);
    CHECK(a.values[i] > 0.0);
  }
  CHECK(a.fit.slope == b.fit.slope);
  CHECK(slurp("test_mc_sweep_a.csv") == slurp("test_mc_sweep_b.csv"));
  // More Monte-Carlo samples make the construction better, not worse.
  CHECK(a.values.back() < a.values.front());
  std::remove("test_mc_sweep_a.csv");
  std::remove("test_mc_sweep_b.csv");
}

TEST_CASE("parameter-growth sweeps report the sizes they certify") {
  SweepParams params;
  params.epsilon = 0.2;
  params.out_path = "test_params_sweep.csv";
  const SweepResult r = rate_sweep(SweepKind::ParamGrowthInD, "heat-linear", 0,
                                   1.0, {1.0, 2.0, 4.0}, params, 31);
  REQUIRE(r.values.size() == 3);
  CHECK(r.values[0] < r.values[1]);
  CHECK(r.values[1] < r.values[2]);
  CHECK(r.fit.slope > 0.0);
  for (const std::string& extra : r.extras) {
    CHECK(extra.find("M=") != std::string::npos);
    CHECK(extra.find("depth=") != std::string::npos);
  }
  std::remove("test_params_sweep.csv");
}
