#pragma once

#include "kolmonet/network.hpp"

namespace kolmo {

// Exact ReLU identity: architecture (d, 2d, d), zero biases, via
// max{x,0} - max{-x,0} = x.
NeuralNetwork relu_identity(int d);

// Parallel sum. All nets share one architecture and activation.
// Output architecture (L_0, M L_1, ..., M L_{L-1}, L_L);
// realization sum_m h_m R(phi_m); P <= M^2 P(phi_1).
NeuralNetwork weighted_sum(const std::vector<NeuralNetwork>& nets,
                           const std::vector<double>& weights);

// Composition glued through an identity block. id_net must have architecture
// (d2, i, d2) and realize the identity for the shared activation. Output
// realizes outer o inner with L(out) = (l_{2,0},...,l_{2,L2-1}, i, l_{1,1},...,l_{1,L1}).
NeuralNetwork compose(const NeuralNetwork& outer, const NeuralNetwork& inner,
                      const NeuralNetwork& id_net);

// Residual composition: realizes x -> R(accum)(x) + R(increment)(R(accum)(x)).
// Requires last hidden width of accum <= last hidden width of increment + i.
NeuralNetwork residual_step(const NeuralNetwork& accum,
                            const NeuralNetwork& increment,
                            const NeuralNetwork& id_net);

// Architecture-level images of the three operations (exact shape bookkeeping,
// used by parameter-growth sweeps where weights would not fit in memory).
Architecture arch_weighted_sum(const Architecture& a, std::uint64_t M);
Architecture arch_compose(const Architecture& outer, const Architecture& inner,
                          Eigen::Index id_width);
Architecture arch_residual_step(const Architecture& accum,
                                const Architecture& increment,
                                Eigen::Index id_width);

// ReLU-exact nets used by the problem catalog (all depth 2 built on the
// identity trick x = max{x,0} - max{-x,0}).
NeuralNetwork linear_net(const Eigen::MatrixXd& S);      // x -> S x
NeuralNetwork zero_net(int d);                           // x -> 0 in R^d
NeuralNetwork sum_coords_net(int d);                     // x -> sum_i x_i
NeuralNetwork max_coords_net(int d);                     // x -> max_i x_i

// One hidden layer realizing sum_i g(x_i) for the piecewise-linear interpolant
// of g on [lo, hi] with `segments` equal pieces (linear extrapolation outside).
NeuralNetwork pwl_coordwise_net(int d, const std::function<double(double)>& g,
                                double lo, double hi, int segments);

// Same interpolant applied per coordinate: x -> (f(x_1), ..., f(x_d)).
NeuralNetwork pwl_coordmap_net(int d, const std::function<double(double)>& g,
                               double lo, double hi, int segments);

}  // namespace kolmo
