#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "kolmonet/calculus.hpp"
#include "kolmonet/common.hpp"
#include "kolmonet/rng.hpp"

using namespace kolmo;

namespace {

Eigen::VectorXd random_vec(int d, SplitMix64& g, double scale = 3.0) {
  Eigen::VectorXd x(d);
  for (int i = 0; i < d; ++i) x(i) = scale * (2.0 * g.next_double() - 1.0);
  return x;
}

NeuralNetwork scaled_identity(double s) {
  return scale_shift_output(relu_identity(1), s, Eigen::VectorXd::Zero(1));
}

}  // namespace

TEST_CASE("relu_identity realizes the exact identity with the stated size") {
  for (int d : {1, 3, 8}) {
    const NeuralNetwork id = relu_identity(d);
    const Architecture arch = architecture(id);
    REQUIRE(arch.dims.size() == 3);
    CHECK(arch.dims[0] == d);
    CHECK(arch.dims[1] == 2 * d);
    CHECK(arch.dims[2] == d);
    CHECK(param_count(id) == std::uint64_t(4 * d * d + 3 * d));
    SplitMix64 g(5 + d);
    for (int rep = 0; rep < 20; ++rep) {
      const Eigen::VectorXd x = random_vec(d, g);
      CHECK((realize(id, x) - x).cwiseAbs().maxCoeff() == 0.0);
    }
  }
  CHECK_THROWS_AS(relu_identity(0), ShapeError);
}

TEST_CASE("weighted_sum realizes the linear combination") {
  const std::vector<NeuralNetwork> nets = {relu_identity(1), relu_identity(1)};
  const NeuralNetwork combo = weighted_sum(nets, {2.0, -0.5});
  CHECK(architecture(combo).dims == std::vector<Eigen::Index>({1, 4, 1}));
  Eigen::VectorXd x(1);
  x << 3.0;
  CHECK(realize(combo, x)(0) == doctest::Approx(4.5).epsilon(1e-15));
  // Parameter bound: P(combo) <= M^2 P(component).
  CHECK(param_count(combo) <= 4 * param_count(nets[0]));
}

TEST_CASE("weighted_sum architecture stacks the hidden widths") {
  const std::vector<NeuralNetwork> nets(3, relu_identity(2));
  const NeuralNetwork combo = weighted_sum(nets, {1.0, 1.0, 1.0});
  CHECK(architecture(combo).dims == std::vector<Eigen::Index>({2, 12, 2}));
  CHECK(architecture(combo) == arch_weighted_sum(architecture(nets[0]), 3));
  CHECK(param_count(combo) <= 9 * param_count(nets[0]));
  SplitMix64 g(31);
  const Eigen::VectorXd x = random_vec(2, g);
  CHECK((realize(combo, x) - 3.0 * x).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("weighted_sum rejects empty input and mismatched shapes") {
  CHECK_THROWS_AS(weighted_sum({}, {}), ShapeError);
  const std::vector<NeuralNetwork> nets = {relu_identity(1), relu_identity(2)};
  CHECK_THROWS_AS(weighted_sum(nets, {1.0, 1.0}), ShapeError);
  const std::vector<NeuralNetwork> ok = {relu_identity(1), relu_identity(1)};
  CHECK_THROWS_AS(weighted_sum(ok, {1.0}), ShapeError);
}

TEST_CASE("compose realizes the composition through an identity block") {
  const NeuralNetwork outer = scaled_identity(2.0);
  const NeuralNetwork inner = scaled_identity(3.0);
  const NeuralNetwork composed = compose(outer, inner, relu_identity(1));
  CHECK(architecture(composed).dims == std::vector<Eigen::Index>({1, 2, 2, 2, 1}));
  CHECK(param_count(composed) == 19);
  Eigen::VectorXd x(1);
  x << -1.75;
  CHECK(realize(composed, x)(0) == doctest::Approx(-10.5).epsilon(1e-15));
}

TEST_CASE("compose matches its architecture-level image on mixed shapes") {
  SplitMix64 g(77);
  // inner: R^2 -> R^3, outer: R^3 -> R^2, glued through relu_identity(3).
  Eigen::MatrixXd S1(3, 2), S2(2, 3);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 2; ++c) S1(r, c) = 2.0 * g.next_double() - 1.0;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 3; ++c) S2(r, c) = 2.0 * g.next_double() - 1.0;
  const NeuralNetwork inner = linear_net(S1);
  const NeuralNetwork outer = linear_net(S2);
  const NeuralNetwork composed = compose(outer, inner, relu_identity(3));
  CHECK(architecture(composed) ==
        arch_compose(architecture(outer), architecture(inner), 6));
  CHECK(param_count(composed) == param_count(arch_compose(
                                     architecture(outer), architecture(inner), 6)));
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::VectorXd x = random_vec(2, g);
    const Eigen::VectorXd want = S2 * (S1 * x);
    CHECK((realize(composed, x) - want).cwiseAbs().maxCoeff() < 1e-12);
  }
  // The identity block must have the shared interface dimension.
  CHECK_THROWS_AS(compose(outer, inner, relu_identity(2)), ShapeError);
}

TEST_CASE("residual_step realizes accum plus increment-of-accum") {
  const NeuralNetwork accum = relu_identity(1);
  const NeuralNetwork increment = scaled_identity(-0.5);
  const NeuralNetwork stepped = residual_step(accum, increment, relu_identity(1));
  CHECK(architecture(stepped) ==
        arch_residual_step(architecture(accum), architecture(increment), 2));
  Eigen::VectorXd x(1);
  x << 4.0;
  CHECK(realize(stepped, x)(0) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("residual_step handles general increments and enforces its width bound") {
  SplitMix64 g(13);
  Eigen::MatrixXd S(2, 2);
  S << 0.25, -0.5, 0.75, 0.1;
  const NeuralNetwork accum = relu_identity(2);
  const NeuralNetwork increment = linear_net(S);
  const NeuralNetwork stepped = residual_step(accum, increment, relu_identity(2));
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::VectorXd x = random_vec(2, g);
    const Eigen::VectorXd want = x + S * x;
    CHECK((realize(stepped, x) - want).cwiseAbs().maxCoeff() < 1e-12);
  }
  // Last hidden width of accum (6) exceeds increment hidden + identity width.
  const std::vector<NeuralNetwork> three(3, relu_identity(1));
  const NeuralNetwork wide = weighted_sum(three, {1.0, 1.0, 1.0});
  CHECK_THROWS_AS(residual_step(wide, relu_identity(1), relu_identity(1)), ShapeError);
}

TEST_CASE("catalog building blocks realize their advertised maps") {
  SplitMix64 g(2);
  Eigen::MatrixXd S(2, 3);
  S << 1.0, -2.0, 0.5, 0.0, 3.0, -1.0;
  const NeuralNetwork lin = linear_net(S);
  const NeuralNetwork zero = zero_net(3);
  const NeuralNetwork sum = sum_coords_net(4);
  const NeuralNetwork mx = max_coords_net(4);
  CHECK(param_count(zero) == 10);  // architecture (3, 1, 3)
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::VectorXd x3 = random_vec(3, g);
    const Eigen::VectorXd x4 = random_vec(4, g);
    CHECK((realize(lin, x3) - S * x3).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(realize(zero, x3).cwiseAbs().maxCoeff() == 0.0);
    CHECK(realize(sum, x4)(0) == doctest::Approx(x4.sum()).epsilon(1e-14));
    CHECK(realize(mx, x4)(0) == doctest::Approx(x4.maxCoeff()).epsilon(1e-14));
  }
  Eigen::VectorXd ties(4);
  ties << 1.0, 1.0, 0.0, -2.0;
  CHECK(realize(mx, ties)(0) == 1.0);
  Eigen::VectorXd neg(4);
  neg << -3.0, -1.0, -2.0, -5.0;
  CHECK(realize(mx, neg)(0) == -1.0);
}

TEST_CASE("piecewise-linear interpolants hit knots and extrapolate linearly") {
  const auto square = [](double t) { return t * t; };
  const NeuralNetwork sum2 = pwl_coordwise_net(2, square, -2.0, 2.0, 4);
  Eigen::VectorXd x(2);
  // Knots are at integers: exact values there.
  x << -2.0, 1.0;
  CHECK(realize(sum2, x)(0) == doctest::Approx(5.0).epsilon(1e-14));
  // Between knots: chord value, here the chord of t^2 on [0, 1] at 0.5.
  x << 0.5, 0.0;
  CHECK(realize(sum2, x)(0) == doctest::Approx(0.5).epsilon(1e-14));
  // Outside [lo, hi]: last-segment slope continues.
  x << 3.0, 0.0;
  CHECK(realize(sum2, x)(0) == doctest::Approx(7.0).epsilon(1e-13));

  const NeuralNetwork map3 = pwl_coordmap_net(3, square, -2.0, 2.0, 4);
  Eigen::VectorXd y(3);
  y << -1.0, 0.0, 2.0;
  const Eigen::VectorXd out = realize(map3, y);
  REQUIRE(out.size() == 3);
  CHECK(out(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(out(1) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(out(2) == doctest::Approx(4.0).epsilon(1e-14));
}
