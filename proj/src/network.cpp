#include "kolmonet/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <utility>

namespace kolmo {

Activation Activation::generic(std::string tag, std::function<double(double)> fn) {
  Activation a;
  a.kind = ActivationKind::Generic;
  a.tag = std::move(tag);
  a.fn = std::move(fn);
  return a;
}

NeuralNetwork::NeuralNetwork(std::vector<Layer> layers, Activation act)
    : layers_(std::move(layers)), act_(std::move(act)) {
  if (layers_.size() < 2) throw ShapeError("network: needs at least two layers");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& l = layers_[i];
    if (l.W.rows() == 0 || l.W.cols() == 0)
      throw ShapeError("network: empty weight matrix at layer " + std::to_string(i + 1));
    if (l.b.size() != l.W.rows())
      throw ShapeError("network: bias length mismatch at layer " + std::to_string(i + 1));
    if (i > 0 && l.W.cols() != layers_[i - 1].W.rows())
      throw ShapeError("network: width mismatch between layers " +
                       std::to_string(i) + " and " + std::to_string(i + 1));
    if (!l.W.allFinite() || !l.b.allFinite())
      throw NumericError("network: non-finite entry at layer " + std::to_string(i + 1));
  }
}

Architecture architecture(const NeuralNetwork& net) {
  Architecture a;
  a.dims.reserve(net.layers().size() + 1);
  a.dims.push_back(net.input_dim());
  for (const auto& l : net.layers()) a.dims.push_back(l.W.rows());
  return a;
}

std::string Architecture::str() const {
  std::string s = "(";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(dims[i]);
  }
  s += ")";
  return s;
}

std::uint64_t param_count(const Architecture& arch) {
  if (arch.dims.size() < 2) throw ShapeError("param_count: architecture too short");
  std::uint64_t total = 0;
  for (std::size_t i = 1; i < arch.dims.size(); ++i) {
    total += static_cast<std::uint64_t>(arch.dims[i]) *
             (static_cast<std::uint64_t>(arch.dims[i - 1]) + 1);
  }
  return total;
}

std::uint64_t param_count(const NeuralNetwork& net) {
  return param_count(architecture(net));
}

namespace {

void apply_activation(const Activation& act, Eigen::MatrixXd& z) {
  if (act.kind == ActivationKind::ReLU) {
    z = z.cwiseMax(0.0);
  } else {
    z = z.unaryExpr([&](double v) { return act.fn(v); });
  }
}

void forward_block(const NeuralNetwork& net, Eigen::MatrixXd& z) {
  const auto& layers = net.layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    z = (layers[i].W * z).colwise() + layers[i].b;
    if (i + 1 < layers.size()) apply_activation(net.activation(), z);
  }
}

}  // namespace

Eigen::VectorXd realize(const NeuralNetwork& net, const Eigen::VectorXd& x) {
  if (x.size() != net.input_dim())
    throw ShapeError("realize: input dim " + std::to_string(x.size()) +
                     " != " + std::to_string(net.input_dim()));
  Eigen::MatrixXd z = x;
  forward_block(net, z);
  return z.col(0);
}

Eigen::MatrixXd realize_batch(const NeuralNetwork& net, const Eigen::MatrixXd& X) {
  if (X.rows() != net.input_dim())
    throw ShapeError("realize_batch: input dim mismatch");
  const Eigen::Index n = X.cols();
  Eigen::MatrixXd out(net.output_dim(), n);
  const Eigen::Index chunk = 512;  // fixed: results never depend on threads
  const std::size_t n_chunks = static_cast<std::size_t>((n + chunk - 1) / chunk);
  parallel_for(n_chunks, [&](std::size_t c) {
    const Eigen::Index lo = static_cast<Eigen::Index>(c) * chunk;
    const Eigen::Index w = std::min(chunk, n - lo);
    Eigen::MatrixXd z = X.middleCols(lo, w);
    forward_block(net, z);
    out.middleCols(lo, w) = z;
  });
  return out;
}

NeuralNetwork scale_shift_output(const NeuralNetwork& net, double s,
                                 const Eigen::VectorXd& b) {
  if (b.size() != net.output_dim())
    throw ShapeError("scale_shift_output: shift length mismatch");
  std::vector<NeuralNetwork::Layer> layers = net.layers();
  layers.back().W *= s;
  layers.back().b = s * layers.back().b + b;
  return NeuralNetwork(std::move(layers), net.activation());
}

namespace {

using Sink = std::function<void(const char*, std::size_t)>;

void stream_json(const NeuralNetwork& net, const Sink& sink) {
  if (net.activation().kind != ActivationKind::ReLU)
    throw ShapeError("serialize: only relu networks have a file format");
  std::string buf;
  buf.reserve(1 << 20);
  auto flush = [&] {
    sink(buf.data(), buf.size());
    buf.clear();
  };
  buf += "{\"version\":1,\"activation\":\"relu\",\"layers\":[";
  const auto& layers = net.layers();
  for (std::size_t li = 0; li < layers.size(); ++li) {
    const auto& l = layers[li];
    if (li) buf += ',';
    buf += "{\"rows\":";
    buf += std::to_string(l.W.rows());
    buf += ",\"cols\":";
    buf += std::to_string(l.W.cols());
    buf += ",\"weights\":[";
    for (Eigen::Index r = 0; r < l.W.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.W.cols(); ++c) {
        if (r || c) buf += ',';
        append_double(buf, l.W(r, c));
      }
      if (buf.size() > (1 << 20) - 4096) flush();
    }
    buf += "],\"bias\":[";
    for (Eigen::Index r = 0; r < l.b.size(); ++r) {
      if (r) buf += ',';
      append_double(buf, l.b(r));
    }
    buf += "]}";
    flush();
  }
  buf += "]}";
  flush();
}

}  // namespace

std::string to_json(const NeuralNetwork& net) {
  std::string out;
  stream_json(net, [&](const char* p, std::size_t n) { out.append(p, n); });
  return out;
}

void save_network(const NeuralNetwork& net, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ShapeError("save_network: cannot open " + path);
  stream_json(net, [&](const char* p, std::size_t n) {
    f.write(p, static_cast<std::streamsize>(n));
  });
  f.close();
  if (!f) throw ShapeError("save_network: write failed for " + path);
}

NeuralNetwork from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (!j.is_object() || j.value("version", 0) != 1)
    throw ShapeError("from_json: unsupported record version");
  if (j.value("activation", "") != std::string("relu"))
    throw ShapeError("from_json: unsupported activation");
  if (!j.contains("layers") || !j["layers"].is_array() || j["layers"].empty())
    throw ShapeError("from_json: missing layers");
  std::vector<NeuralNetwork::Layer> layers;
  layers.reserve(j["layers"].size());
  for (const auto& jl : j["layers"]) {
    const Eigen::Index rows = jl.at("rows").get<Eigen::Index>();
    const Eigen::Index cols = jl.at("cols").get<Eigen::Index>();
    const auto& w = jl.at("weights");
    const auto& b = jl.at("bias");
    if (static_cast<Eigen::Index>(w.size()) != rows * cols)
      throw ShapeError("from_json: weights length != rows*cols");
    if (static_cast<Eigen::Index>(b.size()) != rows)
      throw ShapeError("from_json: bias length != rows");
    NeuralNetwork::Layer layer;
    layer.W.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c)
        layer.W(r, c) = w[static_cast<std::size_t>(r * cols + c)].get<double>();
    layer.b.resize(rows);
    for (Eigen::Index r = 0; r < rows; ++r)
      layer.b(r) = b[static_cast<std::size_t>(r)].get<double>();
    layers.push_back(std::move(layer));
  }
  return NeuralNetwork(std::move(layers), Activation::relu());
}

NeuralNetwork load_network(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ShapeError("load_network: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(f)),
                   std::istreambuf_iterator<char>());
  return from_json(text);
}

}  // namespace kolmo
