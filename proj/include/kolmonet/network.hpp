#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kolmonet/common.hpp"

namespace kolmo {

enum class ActivationKind { ReLU, Generic };

// Activation applied componentwise after every layer except the last.
// Generic carries a tag (for serialization/equality) and the callable.
struct Activation {
  ActivationKind kind = ActivationKind::ReLU;
  std::string tag = "relu";
  std::function<double(double)> fn;  // unused for ReLU

  static Activation relu() { return {}; }
  static Activation generic(std::string tag, std::function<double(double)> fn);

  bool same_as(const Activation& other) const { return tag == other.tag; }
};

// A network as an explicit tuple Phi = ((W_1,B_1),...,(W_L,B_L)), L >= 2,
// immutable.
class NeuralNetwork {
public:
  struct Layer {
    Eigen::MatrixXd W;
    Eigen::VectorXd b;
  };

  NeuralNetwork(std::vector<Layer> layers, Activation act);

  const std::vector<Layer>& layers() const { return layers_; }
  const Activation& activation() const { return act_; }
  Eigen::Index depth() const { return static_cast<Eigen::Index>(layers_.size()); }
  Eigen::Index input_dim() const { return layers_.front().W.cols(); }
  Eigen::Index output_dim() const { return layers_.back().W.rows(); }

private:
  std::vector<Layer> layers_;
  Activation act_;
};

// The shape chain (l_0, ..., l_L).
struct Architecture {
  std::vector<Eigen::Index> dims;

  bool operator==(const Architecture& o) const { return dims == o.dims; }
  std::string str() const;
};

Architecture architecture(const NeuralNetwork& net);

// P(Phi) = sum_n l_n (l_{n-1} + 1), exact integer arithmetic.
std::uint64_t param_count(const NeuralNetwork& net);
std::uint64_t param_count(const Architecture& arch);

Eigen::VectorXd realize(const NeuralNetwork& net, const Eigen::VectorXd& x);

// Column-batched realization; column j of the result is realize(net, X.col(j)).
// Deterministic regardless of thread count (fixed column chunking).
Eigen::MatrixXd realize_batch(const NeuralNetwork& net, const Eigen::MatrixXd& X);

// Same architecture; realization s*R(net)(x) + b (folds the Euler factor h and
// the Brownian increment into the final affine layer).
NeuralNetwork scale_shift_output(const NeuralNetwork& net, double s,
                                 const Eigen::VectorXd& b);

// {"version":1,"activation":"relu","layers":[{"rows":..,"cols":..,
//  "weights":[row-major],"bias":[..]},...]} with shortest round-trip doubles.
std::string to_json(const NeuralNetwork& net);
void save_network(const NeuralNetwork& net, const std::string& path);
NeuralNetwork from_json(const std::string& text);
NeuralNetwork load_network(const std::string& path);

}  // namespace kolmo
