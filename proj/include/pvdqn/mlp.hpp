#pragma once

// Dense feed-forward network with analytic backpropagation and plain SGD.
//
// Samples travel as columns: a batch of B inputs is an (input_dim x B) matrix.
// Weights are stored row-major (out x in) so a layer's parameters flatten in the
// same order they are serialized.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pvdqn/error.hpp"
#include "pvdqn/random.hpp"

namespace pvdqn {

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using ColMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

enum class Activation { ReLU, Identity };

inline const char* to_string(Activation a) { return a == Activation::ReLU ? "relu" : "identity"; }

inline Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::ReLU;
  if (s == "identity") return Activation::Identity;
  throw InvalidArgument("unknown activation '" + s + "'");
}

template <typename Scalar>
struct DenseLayer {
  RowMatrix<Scalar> weights;  // out x in
  Vector<Scalar> bias;        // out
  Activation activation = Activation::Identity;

  Eigen::Index in_dim() const { return weights.cols(); }
  Eigen::Index out_dim() const { return weights.rows(); }
};

template <typename Scalar>
class BasicMlp {
 public:
  BasicMlp() = default;

  /// Builds a network from explicit layers; adjacent dimensions must chain.
  explicit BasicMlp(std::vector<DenseLayer<Scalar>> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) throw InvalidArgument("mlp needs at least one layer");
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      const auto& l = layers_[i];
      if (l.weights.rows() < 1 || l.weights.cols() < 1)
        throw InvalidArgument("layer " + std::to_string(i) + " has a zero dimension");
      if (l.bias.size() != l.weights.rows())
        throw InvalidArgument("layer " + std::to_string(i) + " bias length does not match rows");
      if (i > 0 && layers_[i - 1].out_dim() != l.in_dim())
        throw InvalidArgument("layer " + std::to_string(i) + " input does not chain with previous output");
    }
  }

  std::size_t input_dim() const { return layers_.empty() ? 0 : std::size_t(layers_.front().in_dim()); }
  std::size_t output_dim() const { return layers_.empty() ? 0 : std::size_t(layers_.back().out_dim()); }
  std::size_t depth() const { return layers_.size(); }

  std::span<const DenseLayer<Scalar>> layers() const { return layers_; }
  std::span<DenseLayer<Scalar>> layers() { return layers_; }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += std::size_t(l.weights.size() + l.bias.size());
    return n;
  }

  bool all_finite() const {
    for (const auto& l : layers_)
      if (!l.weights.allFinite() || !l.bias.allFinite()) return false;
    return true;
  }

 private:
  std::vector<DenseLayer<Scalar>> layers_;
};

using Mlp = BasicMlp<double>;

/// Intermediate values of one forward pass, one entry per layer.
template <typename Scalar>
struct ForwardCache {
  std::vector<ColMatrix<Scalar>> inputs;       // activation entering layer i
  std::vector<ColMatrix<Scalar>> pre_activations;
  std::vector<ColMatrix<Scalar>> activations;  // activations.back() is the network output

  std::size_t depth() const { return pre_activations.size(); }
  Eigen::Index batch_size() const { return inputs.empty() ? 0 : inputs.front().cols(); }
};

/// Per-layer parameter gradients, summed over the batch columns.
template <typename Scalar>
struct Gradients {
  std::vector<RowMatrix<Scalar>> weights;
  std::vector<Vector<Scalar>> bias;
};

/// He-style uniform init: W ~ U(-sqrt(6/fan_in), sqrt(6/fan_in)), b = 0. Hidden layers use
/// ReLU and the output layer is linear.
template <typename Scalar = double>
BasicMlp<Scalar> init_mlp(std::size_t input_dim, const std::vector<std::size_t>& hidden, std::size_t output_dim,
                          std::uint64_t seed) {
  if (input_dim == 0 || output_dim == 0) throw InvalidArgument("mlp input/output dimension must be >= 1");
  for (auto h : hidden)
    if (h == 0) throw InvalidArgument("mlp hidden width must be >= 1");

  Rng rng(seed);
  std::vector<std::size_t> dims;
  dims.push_back(input_dim);
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(output_dim);

  std::vector<DenseLayer<Scalar>> layers;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const auto in = Eigen::Index(dims[i]);
    const auto out = Eigen::Index(dims[i + 1]);
    const double bound = std::sqrt(6.0 / double(in));
    DenseLayer<Scalar> layer;
    layer.weights.resize(out, in);
    for (Eigen::Index r = 0; r < out; ++r)
      for (Eigen::Index c = 0; c < in; ++c) layer.weights(r, c) = Scalar(rng.uniform(-bound, bound));
    layer.bias = Vector<Scalar>::Zero(out);
    layer.activation = (i + 2 == dims.size()) ? Activation::Identity : Activation::ReLU;
    layers.push_back(std::move(layer));
  }
  return BasicMlp<Scalar>(std::move(layers));
}

/// Batched forward pass; `input` holds one sample per column.
template <typename Scalar, typename Derived>
std::pair<ColMatrix<Scalar>, ForwardCache<Scalar>> forward(const BasicMlp<Scalar>& mlp,
                                                          const Eigen::MatrixBase<Derived>& input) {
  if (std::size_t(input.rows()) != mlp.input_dim())
    throw InvalidArgument("forward: input has " + std::to_string(input.rows()) + " rows, network expects " +
                          std::to_string(mlp.input_dim()));
  ForwardCache<Scalar> cache;
  ColMatrix<Scalar> x = input;
  for (const auto& layer : mlp.layers()) {
    ColMatrix<Scalar> z = layer.weights * x;
    z.colwise() += layer.bias;
    ColMatrix<Scalar> a = layer.activation == Activation::ReLU ? ColMatrix<Scalar>(z.cwiseMax(Scalar(0))) : z;
    cache.inputs.push_back(std::move(x));
    cache.pre_activations.push_back(std::move(z));
    x = a;
    cache.activations.push_back(std::move(a));
  }
  return {std::move(x), std::move(cache)};
}

/// Single-sample inference without keeping a cache.
template <typename Scalar, typename Derived>
Vector<Scalar> predict(const BasicMlp<Scalar>& mlp, const Eigen::MatrixBase<Derived>& input) {
  if (input.cols() != 1 || std::size_t(input.rows()) != mlp.input_dim())
    throw InvalidArgument("predict: input length does not match network input dimension");
  Vector<Scalar> x = input;
  for (const auto& layer : mlp.layers()) {
    Vector<Scalar> z = layer.weights * x + layer.bias;
    x = layer.activation == Activation::ReLU ? Vector<Scalar>(z.cwiseMax(Scalar(0))) : z;
  }
  return x;
}

/// Backpropagates `output_grad` (dLoss/dOutput, one column per sample) through the cached
/// pass. ReLU derivative at exactly zero is taken as zero.
template <typename Scalar, typename Derived>
Gradients<Scalar> backward(const BasicMlp<Scalar>& mlp, const ForwardCache<Scalar>& cache,
                           const Eigen::MatrixBase<Derived>& output_grad) {
  if (cache.depth() != mlp.depth() || cache.inputs.size() != mlp.depth() || cache.activations.size() != mlp.depth())
    throw InvalidArgument("backward: cache depth does not match network");
  const auto layers = mlp.layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (cache.inputs[i].rows() != layers[i].in_dim() || cache.pre_activations[i].rows() != layers[i].out_dim() ||
        cache.inputs[i].cols() != cache.batch_size() || cache.pre_activations[i].cols() != cache.batch_size())
      throw InvalidArgument("backward: cache shapes do not match layer " + std::to_string(i));
  }
  if (std::size_t(output_grad.rows()) != mlp.output_dim() || output_grad.cols() != cache.batch_size())
    throw InvalidArgument("backward: output gradient shape does not match network output");

  Gradients<Scalar> grads;
  grads.weights.resize(layers.size());
  grads.bias.resize(layers.size());

  ColMatrix<Scalar> delta = output_grad;
  for (std::size_t k = layers.size(); k-- > 0;) {
    const auto& layer = layers[k];
    if (layer.activation == Activation::ReLU)
      delta = delta.cwiseProduct((cache.pre_activations[k].array() > Scalar(0)).template cast<Scalar>().matrix());
    grads.weights[k] = delta * cache.inputs[k].transpose();
    grads.bias[k] = delta.rowwise().sum();
    if (k > 0) delta = layer.weights.transpose() * delta;
  }
  return grads;
}

/// p <- p - lr * grad(p) for every parameter.
template <typename Scalar>
void sgd_step(BasicMlp<Scalar>& mlp, const Gradients<Scalar>& grads, Scalar learning_rate) {
  auto layers = mlp.layers();
  if (grads.weights.size() != layers.size() || grads.bias.size() != layers.size())
    throw InvalidArgument("sgd_step: gradient layer count does not match network");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (grads.weights[i].rows() != layers[i].weights.rows() || grads.weights[i].cols() != layers[i].weights.cols() ||
        grads.bias[i].size() != layers[i].bias.size())
      throw InvalidArgument("sgd_step: gradient shape mismatch at layer " + std::to_string(i));
  }
  if (!(learning_rate > Scalar(0))) throw InvalidArgument("sgd_step: learning rate must be positive");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    layers[i].weights -= learning_rate * grads.weights[i];
    layers[i].bias -= learning_rate * grads.bias[i];
  }
}

template <typename Scalar>
struct MaskedLoss {
  Scalar loss;
  ColMatrix<Scalar> output_grads;  // output_dim x batch
};

/// Mean squared Bellman error restricted to the taken actions.
///
/// `predicted_q` is (actions x batch). The gradient column for sample i is zero except at
/// actions[i], where it equals 2 (Q - target) / batch.
template <typename Scalar, typename Derived>
MaskedLoss<Scalar> masked_q_loss(const Eigen::MatrixBase<Derived>& predicted_q, std::span<const std::size_t> actions,
                                 std::span<const Scalar> targets) {
  const auto batch = predicted_q.cols();
  if (batch == 0) throw InvalidArgument("masked_q_loss: empty batch");
  if (std::size_t(batch) != actions.size() || actions.size() != targets.size())
    throw InvalidArgument("masked_q_loss: batch lengths differ");

  MaskedLoss<Scalar> out{Scalar(0), ColMatrix<Scalar>::Zero(predicted_q.rows(), batch)};
  const Scalar n = Scalar(batch);
  for (Eigen::Index i = 0; i < batch; ++i) {
    const auto a = actions[std::size_t(i)];
    if (a >= std::size_t(predicted_q.rows())) throw InvalidArgument("masked_q_loss: action index out of range");
    const Scalar err = predicted_q(Eigen::Index(a), i) - targets[std::size_t(i)];
    out.loss += err * err;
    out.output_grads(Eigen::Index(a), i) = Scalar(2) * err / n;
  }
  out.loss /= n;
  return out;
}

}  // namespace pvdqn
