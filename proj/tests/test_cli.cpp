#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "kolmonet/network.hpp"

using kolmo::load_network;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool file_exists(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return in.good();
}

// Runs the binary through the shell, capturing exit code and both streams.
// `env` is a prefix like "KOLMO_THREADS=2".
RunResult run(const std::string& args, const std::string& env = "") {
  static int counter = 0;
  const std::string tag = std::to_string(counter++);
  const std::string out_path = "cli_out_" + tag + ".txt";
  const std::string err_path = "cli_err_" + tag + ".txt";
  std::string cmd;
  if (!env.empty()) cmd += env + " ";
  cmd += std::string(KOLMO_BIN) + " " + args + " >" + out_path + " 2>" + err_path;
  const int status = std::system(cmd.c_str());
  RunResult r;
  if (WIFEXITED(status)) r.code = WEXITSTATUS(status);
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  std::remove(out_path.c_str());
  std::remove(err_path.c_str());
  return r;
}

}  // namespace

TEST_CASE("help exits cleanly") {
  CHECK(run("--help").code == 0);
  CHECK(run("construct --help").code == 0);
}

TEST_CASE("configuration mistakes exit with code 2") {
  CHECK(run("construct --eps 0.1").code == 2);  // missing --dim
  CHECK(run("construct --problem banana --dim 2 --eps 0.2").code == 2);
  CHECK(run("verify banana").code == 2);
  CHECK(run("sweep banana").code == 2);
  CHECK(run("").code == 2);  // a subcommand is required
  // A delta override makes no sense without fixing M as well.
  CHECK(run("construct --problem heat-linear --dim 1 --eps 0.2 --M 0 --delta 0.5")
            .code == 2);
  CHECK(run("construct --problem heat-linear --dim 1 --eps 0.2 --delta 0.5").code ==
        2);
}

TEST_CASE("closed-form mode prints log-space constants and refuses huge builds") {
  const RunResult dry = run(
      "construct --problem heat-linear --dim 1 --eps 0.4 --mode paper --dry-run");
  CHECK(dry.code == 0);
  CHECK(dry.out.find("mode=paper") != std::string::npos);
  CHECK(dry.out.find("log_M=") != std::string::npos);
  CHECK(dry.out.find("log_delta=") != std::string::npos);

  // Without --dry-run the astronomically large M must be refused, not built.
  const RunResult wet =
      run("construct --problem heat-linear --dim 1 --eps 0.4 --mode paper");
  CHECK(wet.code == 2);
  CHECK(wet.err.find("refus") != std::string::npos);
}

TEST_CASE("closed-form mode rejects problems outside its size hypothesis") {
  const RunResult r = run(
      "construct --problem ou-quadratic --dim 1 --eps 1 --mode paper --dry-run");
  CHECK(r.code == 2);
  CHECK_FALSE(r.err.empty());
}

TEST_CASE("calibrated dry runs print the constants and plan they would use") {
  const RunResult r = run(
      "construct --problem heat-linear --dim 1 --eps 0.2 --seed 3 --dry-run");
  CHECK(r.code == 0);
  CHECK(r.out.find("calibration_steps=") != std::string::npos);
  CHECK(r.out.find("M=") != std::string::npos);
  CHECK(r.out.find("delta=") != std::string::npos);
  CHECK(r.out.find("planned_params=") != std::string::npos);
}

TEST_CASE("builds planned above the parameter bound are refused, not attempted") {
  // This plan sits in the tens of billions of parameters; materializing it
  // would exhaust memory, so the command must stop at the plan.
  const std::string flags =
      "construct --problem ou-quadratic --dim 2 --eps 0.3 --M 2048 "
      "--delta 0.25 --seed 11";
  const RunResult r = run(flags);
  CHECK(r.code == 2);
  CHECK(r.err.find("max-params") != std::string::npos);

  // The same plan is visible (and allowed) under --dry-run.
  const RunResult dry = run(flags + " --dry-run");
  CHECK(dry.code == 0);
  CHECK(dry.out.find("planned_params=") != std::string::npos);

  // An explicit higher bound is honored on a small build.
  const RunResult ok = run(
      "construct --problem heat-linear --dim 1 --eps 0.4 --M 4 --delta 1 "
      "--candidates 1 --seed 2 --max-params 1000000 --out cli_guard");
  CHECK(ok.code == 0);
  std::remove("cli_guard.network.json");
  std::remove("cli_guard.report.json");
}

TEST_CASE("an exhausted calibration budget exits with code 3") {
  const RunResult r = run(
      "construct --problem heat-linear --dim 1 --eps 0.2 --seed 3 --budget 2 "
      "--dry-run");
  CHECK(r.code == 3);
  CHECK(r.err.find("calibration failed") != std::string::npos);
  CHECK(r.err.find("best M=8") != std::string::npos);
}

TEST_CASE("construct writes loadable artifacts and reruns byte-identically") {
  const std::string flags =
      "construct --problem heat-linear --dim 2 --eps 0.4 --M 8 --delta 1 "
      "--candidates 2 --seed 5 --out ";
  const RunResult a = run(flags + "cli_art", "KOLMO_THREADS=1");
  REQUIRE(a.code == 0);
  CHECK(a.out.find("M=8") != std::string::npos);
  CHECK(a.out.find("certificate=pass") != std::string::npos);
  REQUIRE(file_exists("cli_art.network.json"));
  REQUIRE(file_exists("cli_art.report.json"));
  const std::string net_bytes = slurp("cli_art.network.json");
  const std::string report_bytes = slurp("cli_art.report.json");

  // The artifact is a valid network file.
  const kolmo::NeuralNetwork net = load_network("cli_art.network.json");
  CHECK(net.input_dim() == 2);
  CHECK(net.output_dim() == 1);

  // Identical flags, different thread count: identical bytes.
  const RunResult b = run(flags + "cli_art", "KOLMO_THREADS=3");
  REQUIRE(b.code == 0);
  CHECK(slurp("cli_art.network.json") == net_bytes);
  CHECK(slurp("cli_art.report.json") == report_bytes);
  CHECK(b.out == a.out);
  std::remove("cli_art.network.json");
  std::remove("cli_art.report.json");
}

TEST_CASE("verify subcommand reports suite totals and pass/fail lines") {
  const RunResult calc = run("verify calculus --samples 5");
  CHECK(calc.code == 0);
  CHECK(calc.out.find("[PASS]") != std::string::npos);
  CHECK(calc.out.find("suite=calculus") != std::string::npos);
  CHECK(calc.out.find("failures=0") != std::string::npos);

  const RunResult markov = run("verify markov --samples 2000");
  CHECK(markov.code == 0);
  CHECK(markov.out.find("suite=markov") != std::string::npos);

  const RunResult pert =
      run("verify perturbation --problem ou-linear --samples 1500 --seed 11");
  CHECK(pert.code == 0);
  CHECK(pert.out.find("suite=perturbation") != std::string::npos);
}

TEST_CASE("sweep subcommand writes a CSV and prints the fitted slope") {
  const RunResult r = run(
      "sweep mc --dim 1 --samples 64 --seed 5 --out cli_sweep_a.csv",
      "KOLMO_THREADS=1");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("slope=") != std::string::npos);
  CHECK(r.out.find("csv=cli_sweep_a.csv") != std::string::npos);
  REQUIRE(file_exists("cli_sweep_a.csv"));
  const std::string content = slurp("cli_sweep_a.csv");
  CHECK(content.rfind("axis,value,stderr,extra\n", 0) == 0);

  const RunResult r2 = run(
      "sweep mc --dim 1 --samples 64 --seed 5 --out cli_sweep_b.csv",
      "KOLMO_THREADS=3");
  REQUIRE(r2.code == 0);
  CHECK(slurp("cli_sweep_b.csv") == content);
  std::remove("cli_sweep_a.csv");
  std::remove("cli_sweep_b.csv");
}
