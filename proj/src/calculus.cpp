#include "kolmonet/calculus.hpp"

#include <cmath>

namespace kolmo {

namespace {

using Layer = NeuralNetwork::Layer;

// (x_1^+, x_1^-, ..., x_d^+, x_d^-): the identity network's first layer.
Eigen::MatrixXd pair_expand(int d) {
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(2 * d, d);
  for (int i = 0; i < d; ++i) {
    W(2 * i, i) = 1.0;
    W(2 * i + 1, i) = -1.0;
  }
  return W;
}

// Collapses the pair expansion: row i = (..., 1, -1, ...) at columns 2i, 2i+1.
Eigen::MatrixXd pair_collapse(int d) {
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(d, 2 * d);
  for (int i = 0; i < d; ++i) {
    W(i, 2 * i) = 1.0;
    W(i, 2 * i + 1) = -1.0;
  }
  return W;
}

void require_identity_shape(const NeuralNetwork& id_net, Eigen::Index d,
                            const char* op) {
  if (id_net.depth() != 2)
    throw ShapeError(std::string(op) + ": id_net must have depth 2");
  if (id_net.input_dim() != d || id_net.output_dim() != d)
    throw ShapeError(std::string(op) + ": id_net must map dimension " +
                     std::to_string(d) + " to itself");
}

}  // namespace

NeuralNetwork relu_identity(int d) {
  if (d < 1) throw ShapeError("relu_identity: d must be >= 1");
  std::vector<Layer> layers(2);
  layers[0].W = pair_expand(d);
  layers[0].b = Eigen::VectorXd::Zero(2 * d);
  layers[1].W = pair_collapse(d);
  layers[1].b = Eigen::VectorXd::Zero(d);
  return NeuralNetwork(std::move(layers), Activation::relu());
}

NeuralNetwork weighted_sum(const std::vector<NeuralNetwork>& nets,
                           const std::vector<double>& weights) {
  if (nets.empty()) throw ShapeError("weighted_sum: empty network list");
  if (weights.size() != nets.size())
    throw ShapeError("weighted_sum: weight/network count mismatch");
  const Architecture arch = architecture(nets.front());
  for (const auto& n : nets) {
    if (!(architecture(n) == arch))
      throw ShapeError("weighted_sum: architecture mismatch, " +
                       architecture(n).str() + " vs " + arch.str());
    if (!n.activation().same_as(nets.front().activation()))
      throw ShapeError("weighted_sum: activation mismatch");
  }
  const std::size_t M = nets.size();
  const std::size_t L = nets.front().layers().size();
  std::vector<Layer> out;
  out.reserve(L);
  if (L == 1) {
    Layer l;
    l.W = weights[0] * nets[0].layers()[0].W;
    l.b = weights[0] * nets[0].layers()[0].b;
    for (std::size_t m = 1; m < M; ++m) {
      l.W += weights[m] * nets[m].layers()[0].W;
      l.b += weights[m] * nets[m].layers()[0].b;
    }
    out.push_back(std::move(l));
    return NeuralNetwork(std::move(out), nets.front().activation());
  }
  {  // stacked first layer
    const Eigen::Index l1 = arch.dims[1], l0 = arch.dims[0];
    Layer l;
    l.W.resize(static_cast<Eigen::Index>(M) * l1, l0);
    l.b.resize(static_cast<Eigen::Index>(M) * l1);
    for (std::size_t m = 0; m < M; ++m) {
      l.W.middleRows(static_cast<Eigen::Index>(m) * l1, l1) = nets[m].layers()[0].W;
      l.b.segment(static_cast<Eigen::Index>(m) * l1, l1) = nets[m].layers()[0].b;
    }
    out.push_back(std::move(l));
  }
  for (std::size_t i = 1; i + 1 < L; ++i) {  // block-diagonal middles
    const Eigen::Index li = arch.dims[i + 1], lp = arch.dims[i];
    Layer l;
    l.W = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(M) * li,
                                static_cast<Eigen::Index>(M) * lp);
    l.b.resize(static_cast<Eigen::Index>(M) * li);
    for (std::size_t m = 0; m < M; ++m) {
      l.W.block(static_cast<Eigen::Index>(m) * li,
                static_cast<Eigen::Index>(m) * lp, li, lp) =
          nets[m].layers()[i].W;
      l.b.segment(static_cast<Eigen::Index>(m) * li, li) = nets[m].layers()[i].b;
    }
    out.push_back(std::move(l));
  }
  {  // weighted concatenated last layer
    const Eigen::Index lL = arch.dims[L], lp = arch.dims[L - 1];
    Layer l;
    l.W.resize(lL, static_cast<Eigen::Index>(M) * lp);
    l.b = Eigen::VectorXd::Zero(lL);
    for (std::size_t m = 0; m < M; ++m) {
      l.W.middleCols(static_cast<Eigen::Index>(m) * lp, lp) =
          weights[m] * nets[m].layers().back().W;
      l.b += weights[m] * nets[m].layers().back().b;
    }
    out.push_back(std::move(l));
  }
  return NeuralNetwork(std::move(out), nets.front().activation());
}

NeuralNetwork compose(const NeuralNetwork& outer, const NeuralNetwork& inner,
                      const NeuralNetwork& id_net) {
  const Eigen::Index d2 = inner.output_dim();
  if (outer.input_dim() != d2)
    throw ShapeError("compose: inner output dim " + std::to_string(d2) +
                     " != outer input dim " + std::to_string(outer.input_dim()));
  require_identity_shape(id_net, d2, "compose");
  if (!outer.activation().same_as(inner.activation()) ||
      !outer.activation().same_as(id_net.activation()))
    throw ShapeError("compose: activation mismatch");
  const auto& W31 = id_net.layers()[0].W;
  const auto& b31 = id_net.layers()[0].b;
  const auto& W32 = id_net.layers()[1].W;
  const auto& b32 = id_net.layers()[1].b;
  const auto& in = inner.layers();
  const auto& outl = outer.layers();
  std::vector<Layer> out;
  out.reserve(in.size() + outl.size());
  for (std::size_t i = 0; i + 1 < in.size(); ++i) out.push_back(in[i]);
  out.push_back({W31 * in.back().W, W31 * in.back().b + b31});
  out.push_back({outl[0].W * W32, outl[0].W * b32 + outl[0].b});
  for (std::size_t j = 1; j < outl.size(); ++j) out.push_back(outl[j]);
  return NeuralNetwork(std::move(out), inner.activation());
}

NeuralNetwork residual_step(const NeuralNetwork& accum,
                            const NeuralNetwork& increment,
                            const NeuralNetwork& id_net) {
  const Eigen::Index d = accum.output_dim();
  if (increment.input_dim() != d || increment.output_dim() != d)
    throw ShapeError("residual_step: increment must map dimension " +
                     std::to_string(d) + " to itself");
  require_identity_shape(id_net, d, "residual_step");
  if (!accum.activation().same_as(increment.activation()) ||
      !accum.activation().same_as(id_net.activation()))
    throw ShapeError("residual_step: activation mismatch");
  if (increment.depth() < 2)
    throw ShapeError("residual_step: increment must have depth >= 2");
  const Eigen::Index iw = id_net.layers()[0].W.rows();
  const Architecture aa = architecture(accum);
  const Architecture ai = architecture(increment);
  const Eigen::Index last_hidden_accum = aa.dims[aa.dims.size() - 2];
  const Eigen::Index last_hidden_incr = ai.dims[ai.dims.size() - 2];
  if (last_hidden_accum > last_hidden_incr + iw)
    throw ShapeError("residual_step: accum last hidden width " +
                     std::to_string(last_hidden_accum) + " exceeds " +
                     std::to_string(last_hidden_incr) + " + " +
                     std::to_string(iw));
  const auto& W31 = id_net.layers()[0].W;
  const auto& b31 = id_net.layers()[0].b;
  const auto& W32 = id_net.layers()[1].W;
  const auto& b32 = id_net.layers()[1].b;
  const auto& al = accum.layers();
  const auto& il = increment.layers();
  const std::size_t L2 = il.size();
  std::vector<Layer> out;
  out.reserve(al.size() + L2 - 1);
  for (std::size_t i = 0; i + 1 < al.size(); ++i) out.push_back(al[i]);
  {  // splice layer: feed R(accum) into increment and into the identity
    const Eigen::Index r1 = il[0].W.rows();
    Layer l;
    l.W.resize(r1 + iw, al.back().W.cols());
    l.W.topRows(r1) = il[0].W * al.back().W;
    l.W.bottomRows(iw) = W31 * al.back().W;
    l.b.resize(r1 + iw);
    l.b.head(r1) = il[0].W * al.back().b + il[0].b;
    l.b.tail(iw) = W31 * al.back().b + b31;
    out.push_back(std::move(l));
  }
  const Eigen::MatrixXd carry_W = W31 * W32;  // identity carried one layer deeper
  const Eigen::VectorXd carry_b = W31 * b32 + b31;
  for (std::size_t j = 1; j + 1 < L2; ++j) {
    const Eigen::Index r = il[j].W.rows(), c = il[j].W.cols();
    Layer l;
    l.W = Eigen::MatrixXd::Zero(r + iw, c + iw);
    l.W.topLeftCorner(r, c) = il[j].W;
    l.W.bottomRightCorner(iw, iw) = carry_W;
    l.b.resize(r + iw);
    l.b.head(r) = il[j].b;
    l.b.tail(iw) = carry_b;
    out.push_back(std::move(l));
  }
  {  // merge layer: R(increment)(R(accum)) + R(accum)
    Layer l;
    l.W.resize(d, il.back().W.cols() + iw);
    l.W.leftCols(il.back().W.cols()) = il.back().W;
    l.W.rightCols(iw) = W32;
    l.b = il.back().b + b32;
    out.push_back(std::move(l));
  }
  return NeuralNetwork(std::move(out), accum.activation());
}

Architecture arch_weighted_sum(const Architecture& a, std::uint64_t M) {
  if (a.dims.size() < 2) throw ShapeError("arch_weighted_sum: too short");
  Architecture out;
  out.dims = a.dims;
  for (std::size_t i = 1; i + 1 < out.dims.size(); ++i)
    out.dims[i] = static_cast<Eigen::Index>(static_cast<std::uint64_t>(out.dims[i]) * M);
  return out;
}

Architecture arch_compose(const Architecture& outer, const Architecture& inner,
                          Eigen::Index id_width) {
  if (outer.dims.front() != inner.dims.back())
    throw ShapeError("arch_compose: dimension mismatch");
  Architecture out;
  out.dims.assign(inner.dims.begin(), inner.dims.end() - 1);
  out.dims.push_back(id_width);
  out.dims.insert(out.dims.end(), outer.dims.begin() + 1, outer.dims.end());
  return out;
}

Architecture arch_residual_step(const Architecture& accum,
                                const Architecture& increment,
                                Eigen::Index id_width) {
  const Eigen::Index d = accum.dims.back();
  if (increment.dims.front() != d || increment.dims.back() != d)
    throw ShapeError("arch_residual_step: dimension mismatch");
  if (accum.dims[accum.dims.size() - 2] >
      increment.dims[increment.dims.size() - 2] + id_width)
    throw ShapeError("arch_residual_step: width precondition violated");
  Architecture out;
  out.dims.assign(accum.dims.begin(), accum.dims.end() - 1);
  for (std::size_t j = 1; j + 1 < increment.dims.size(); ++j)
    out.dims.push_back(increment.dims[j] + id_width);
  out.dims.push_back(d);
  return out;
}

NeuralNetwork linear_net(const Eigen::MatrixXd& S) {
  const int d = static_cast<int>(S.cols());
  if (d < 1) throw ShapeError("linear_net: empty matrix");
  std::vector<Layer> layers(2);
  layers[0].W = pair_expand(d);
  layers[0].b = Eigen::VectorXd::Zero(2 * d);
  layers[1].W.resize(S.rows(), 2 * d);
  for (int i = 0; i < d; ++i) {
    layers[1].W.col(2 * i) = S.col(i);
    layers[1].W.col(2 * i + 1) = -S.col(i);
  }
  layers[1].b = Eigen::VectorXd::Zero(S.rows());
  return NeuralNetwork(std::move(layers), Activation::relu());
}

NeuralNetwork zero_net(int d) {
  if (d < 1) throw ShapeError("zero_net: d must be >= 1");
  std::vector<Layer> layers(2);
  layers[0].W = Eigen::MatrixXd::Zero(1, d);
  layers[0].b = Eigen::VectorXd::Zero(1);
  layers[1].W = Eigen::MatrixXd::Zero(d, 1);
  layers[1].b = Eigen::VectorXd::Zero(d);
  return NeuralNetwork(std::move(layers), Activation::relu());
}

NeuralNetwork sum_coords_net(int d) {
  Eigen::MatrixXd row = Eigen::MatrixXd::Ones(1, d);
  return linear_net(row);
}

NeuralNetwork max_coords_net(int d) {
  if (d < 1) throw ShapeError("max_coords_net: d must be >= 1");
  if (d == 1) return linear_net(Eigen::MatrixXd::Ones(1, 1));
  // Tournament of max(a,b) = relu(a-b) + relu(b) - relu(-b); an odd value is
  // carried as the pair (relu(v), relu(-v)).
  std::vector<Layer> layers;
  // rep.row(v) expresses current value v as a bias-free linear map of the
  // previous layer's units (the inputs at level 0).
  Eigen::MatrixXd rep = Eigen::MatrixXd::Identity(d, d);
  Eigen::Index k = d;
  while (k > 1) {
    const Eigen::Index pairs = k / 2;
    const bool carry = (k % 2) != 0;
    const Eigen::Index width = 3 * pairs + (carry ? 2 : 0);
    Layer l;
    l.W.resize(width, rep.cols());
    l.b = Eigen::VectorXd::Zero(width);
    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(pairs + (carry ? 1 : 0), width);
    for (Eigen::Index t = 0; t < pairs; ++t) {
      l.W.row(3 * t) = rep.row(2 * t) - rep.row(2 * t + 1);
      l.W.row(3 * t + 1) = rep.row(2 * t + 1);
      l.W.row(3 * t + 2) = -rep.row(2 * t + 1);
      next(t, 3 * t) = 1.0;
      next(t, 3 * t + 1) = 1.0;
      next(t, 3 * t + 2) = -1.0;
    }
    if (carry) {
      l.W.row(3 * pairs) = rep.row(k - 1);
      l.W.row(3 * pairs + 1) = -rep.row(k - 1);
      next(pairs, 3 * pairs) = 1.0;
      next(pairs, 3 * pairs + 1) = -1.0;
    }
    layers.push_back(std::move(l));
    rep = std::move(next);
    k = rep.rows();
  }
  Layer last;
  last.W = rep;
  last.b = Eigen::VectorXd::Zero(1);
  layers.push_back(std::move(last));
  return NeuralNetwork(std::move(layers), Activation::relu());
}

namespace {

// f(t) = g(lo) + s_0 (t - lo) + sum_j (s_j - s_{j-1}) relu(t - knot_j),
// with (t - lo) split into relu(t - lo) - relu(lo - t). `sum` collapses the
// per-coordinate values into one output, otherwise the map stays d -> d.
NeuralNetwork pwl_build(int d, const std::function<double(double)>& g, double lo,
                        double hi, int segments, bool sum) {
  if (d < 1 || segments < 1 || !(hi > lo)) throw ShapeError("pwl net: bad domain");
  const int S = segments;
  const double step = (hi - lo) / S;
  std::vector<double> knot(S + 1), val(S + 1);
  for (int j = 0; j <= S; ++j) {
    knot[j] = lo + step * j;
    val[j] = g(knot[j]);
  }
  std::vector<double> slope(S);
  for (int j = 0; j < S; ++j) slope[j] = (val[j + 1] - val[j]) / step;
  const Eigen::Index per = S + 1;  // units per coordinate
  const Eigen::Index out_dim = sum ? 1 : d;
  std::vector<Layer> layers(2);
  layers[0].W = Eigen::MatrixXd::Zero(d * per, d);
  layers[0].b.resize(d * per);
  layers[1].W = Eigen::MatrixXd::Zero(out_dim, d * per);
  layers[1].b = sum ? Eigen::VectorXd::Constant(1, d * val[0])
                    : Eigen::VectorXd::Constant(d, val[0]);
  for (int i = 0; i < d; ++i) {
    const Eigen::Index base = static_cast<Eigen::Index>(i) * per;
    const Eigen::Index row = sum ? 0 : i;
    layers[0].W(base, i) = 1.0;
    layers[0].b(base) = -lo;
    layers[1].W(row, base) = slope[0];
    layers[0].W(base + 1, i) = -1.0;
    layers[0].b(base + 1) = lo;
    layers[1].W(row, base + 1) = -slope[0];
    for (int j = 1; j < S; ++j) {
      layers[0].W(base + 1 + j, i) = 1.0;
      layers[0].b(base + 1 + j) = -knot[j];
      layers[1].W(row, base + 1 + j) = slope[j] - slope[j - 1];
    }
  }
  return NeuralNetwork(std::move(layers), Activation::relu());
}

}  // namespace

NeuralNetwork pwl_coordwise_net(int d, const std::function<double(double)>& g,
                                double lo, double hi, int segments) {
  return pwl_build(d, g, lo, hi, segments, true);
}

NeuralNetwork pwl_coordmap_net(int d, const std::function<double(double)>& g,
                               double lo, double hi, int segments) {
  return pwl_build(d, g, lo, hi, segments, false);
}

}  // namespace kolmo
