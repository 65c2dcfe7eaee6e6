#include <doctest.h>

#include <Eigen/Dense>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "kolmonet/common.hpp"
#include "kolmonet/network.hpp"
#include "kolmonet/rng.hpp"

using namespace kolmo;
using Layer = NeuralNetwork::Layer;

namespace {

// (1, 2, 1) network realizing x -> -x via -max{x,0} + max{-x,0}.
NeuralNetwork negation_net() {
  std::vector<Layer> layers(2);
  layers[0].W = Eigen::MatrixXd(2, 1);
  layers[0].W << 1.0, -1.0;
  layers[0].b = Eigen::VectorXd::Zero(2);
  layers[1].W = Eigen::MatrixXd(1, 2);
  layers[1].W << -1.0, 1.0;
  layers[1].b = Eigen::VectorXd::Zero(1);
  return NeuralNetwork(std::move(layers), Activation::relu());
}

NeuralNetwork random_net(const std::vector<Eigen::Index>& dims, std::uint64_t seed) {
  SplitMix64 g(seed);
  std::vector<Layer> layers;
  for (std::size_t i = 1; i < dims.size(); ++i) {
    Layer l;
    l.W = Eigen::MatrixXd(dims[i], dims[i - 1]);
    l.b = Eigen::VectorXd(dims[i]);
    for (Eigen::Index r = 0; r < l.W.rows(); ++r)
      for (Eigen::Index c = 0; c < l.W.cols(); ++c)
        l.W(r, c) = 2.0 * g.next_double() - 1.0;
    for (Eigen::Index r = 0; r < l.b.size(); ++r) l.b(r) = 2.0 * g.next_double() - 1.0;
    layers.push_back(std::move(l));
  }
  return NeuralNetwork(std::move(layers), Activation::relu());
}

}  // namespace

TEST_CASE("a hand-built two-layer network realizes negation") {
  const NeuralNetwork net = negation_net();
  CHECK(net.depth() == 2);
  CHECK(net.input_dim() == 1);
  CHECK(net.output_dim() == 1);
  Eigen::VectorXd x(1);
  x << 5.0;
  CHECK(realize(net, x)(0) == -5.0);
  x << -3.25;
  CHECK(realize(net, x)(0) == 3.25);
  x << 0.0;
  CHECK(realize(net, x)(0) == 0.0);
}

TEST_CASE("architecture and param_count follow the affine-layer shapes") {
  const NeuralNetwork net = negation_net();
  const Architecture arch = architecture(net);
  CHECK(arch.dims == std::vector<Eigen::Index>({1, 2, 1}));
  CHECK(param_count(net) == 7);  // 2*(1+1) + 1*(2+1)
  CHECK(param_count(arch) == 7);
  CHECK(arch.str() == "(1,2,1)");

  const NeuralNetwork big = random_net({3, 5, 4, 2}, 11);
  // 5*(3+1) + 4*(5+1) + 2*(4+1) = 20 + 24 + 10
  CHECK(param_count(big) == 54);
}

TEST_CASE("scale_shift_output folds an affine map into the final layer") {
  const NeuralNetwork net = negation_net();
  Eigen::VectorXd shift(1);
  shift << 4.0;
  const NeuralNetwork scaled = scale_shift_output(net, 2.0, shift);
  CHECK(architecture(scaled) == architecture(net));
  Eigen::VectorXd x(1);
  x << 5.0;
  CHECK(realize(scaled, x)(0) == -6.0);  // 2*(-5) + 4
}

TEST_CASE("constructor rejects inconsistent shapes and non-finite weights") {
  std::vector<Layer> bad(2);
  bad[0].W = Eigen::MatrixXd::Ones(2, 1);
  bad[0].b = Eigen::VectorXd::Zero(2);
  bad[1].W = Eigen::MatrixXd::Ones(1, 3);  // expects width 2
  bad[1].b = Eigen::VectorXd::Zero(1);
  CHECK_THROWS_AS(NeuralNetwork(std::move(bad), Activation::relu()), ShapeError);

  std::vector<Layer> one(1);
  one[0].W = Eigen::MatrixXd::Ones(1, 1);
  one[0].b = Eigen::VectorXd::Zero(1);
  CHECK_THROWS_AS(NeuralNetwork(std::move(one), Activation::relu()), ShapeError);

  std::vector<Layer> short_bias(2);
  short_bias[0].W = Eigen::MatrixXd::Ones(2, 1);
  short_bias[0].b = Eigen::VectorXd::Zero(1);  // needs 2 entries
  short_bias[1].W = Eigen::MatrixXd::Ones(1, 2);
  short_bias[1].b = Eigen::VectorXd::Zero(1);
  CHECK_THROWS_AS(NeuralNetwork(std::move(short_bias), Activation::relu()), ShapeError);

  std::vector<Layer> nan_w(2);
  nan_w[0].W = Eigen::MatrixXd::Ones(2, 1);
  nan_w[0].W(0, 0) = std::numeric_limits<double>::quiet_NaN();
  nan_w[0].b = Eigen::VectorXd::Zero(2);
  nan_w[1].W = Eigen::MatrixXd::Ones(1, 2);
  nan_w[1].b = Eigen::VectorXd::Zero(1);
  CHECK_THROWS_AS(NeuralNetwork(std::move(nan_w), Activation::relu()), NumericError);
}

TEST_CASE("realize_batch equals per-column realize") {
  const NeuralNetwork net = random_net({4, 7, 3}, 3);
  SplitMix64 g(99);
  Eigen::MatrixXd X(4, 600);  // spans several parallel chunks
  for (Eigen::Index c = 0; c < X.cols(); ++c)
    for (Eigen::Index r = 0; r < X.rows(); ++r) X(r, c) = 6.0 * g.next_double() - 3.0;
  const Eigen::MatrixXd Y = realize_batch(net, X);
  REQUIRE(Y.rows() == 3);
  REQUIRE(Y.cols() == 600);
  for (Eigen::Index c = 0; c < X.cols(); c += 37) {
    const Eigen::VectorXd y = realize(net, X.col(c));
    CHECK((Y.col(c) - y).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("json serialization round-trips weights bit for bit") {
  const NeuralNetwork net = random_net({2, 3, 3, 1}, 17);
  const std::string text = to_json(net);
  const NeuralNetwork back = from_json(text);
  REQUIRE(architecture(back) == architecture(net));
  for (std::size_t i = 0; i < net.layers().size(); ++i) {
    CHECK((net.layers()[i].W - back.layers()[i].W).cwiseAbs().maxCoeff() == 0.0);
    CHECK((net.layers()[i].b - back.layers()[i].b).cwiseAbs().maxCoeff() == 0.0);
  }
  // Serializing the round-tripped network reproduces the exact text.
  CHECK(to_json(back) == text);
}

TEST_CASE("save_network/load_network round-trip through a file") {
  const NeuralNetwork net = random_net({3, 4, 2}, 23);
  const std::string path = "test_network_roundtrip.json";
  save_network(net, path);
  const NeuralNetwork back = load_network(path);
  CHECK(architecture(back) == architecture(net));
  Eigen::VectorXd x(3);
  x << 0.1, -2.0, 1.5;
  CHECK((realize(net, x) - realize(back, x)).cwiseAbs().maxCoeff() == 0.0);
  std::remove(path.c_str());
}

TEST_CASE("from_json rejects malformed documents") {
  const NeuralNetwork net = negation_net();
  const std::string good = to_json(net);
  CHECK_THROWS(from_json("{\"version\":2,\"activation\":\"relu\",\"layers\":[]}"));
  CHECK_THROWS(from_json("{\"version\":1,\"activation\":\"tanh\",\"layers\":[]}"));
  CHECK_THROWS(from_json("not json"));
  CHECK_NOTHROW(from_json(good));
}
