// Minimal dense-network runtime: forward pass, exact reverse-mode gradients,
// categorical cross-entropy, Adam with optional exponential learning-rate
// decay, and a flat-text persistence format.
//
// Matrices are column-major with one sample per column. Computation and
// parameters default to double; the Scalar template parameter admits float
// for faster, lower-precision runs.

#pragma once

#include <Eigen/Dense>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wiretap/rng.hpp"

namespace wiretap {

template <class Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Divergence (non-finite loss/objective) during any training loop.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Activation { kRelu, kLinear, kSoftmax };

inline const char* activation_name(Activation a) {
  switch (a) {
    case Activation::kRelu: return "relu";
    case Activation::kLinear: return "linear";
    case Activation::kSoftmax: return "softmax";
  }
  throw std::logic_error("unknown activation");
}

inline Activation activation_from_name(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "linear") return Activation::kLinear;
  if (name == "softmax") return Activation::kSoftmax;
  throw std::invalid_argument("unknown activation tag: " + name);
}

template <class Scalar>
struct DenseLayerT {
  MatrixX<Scalar> weights;  // out x in
  VectorX<Scalar> bias;     // out
  Activation activation = Activation::kLinear;

  int in_dim() const { return static_cast<int>(weights.cols()); }
  int out_dim() const { return static_cast<int>(weights.rows()); }
};

template <class Scalar>
struct DenseNetworkT {
  std::vector<DenseLayerT<Scalar>> layers;

  int input_dim() const { return layers.front().in_dim(); }
  int output_dim() const { return layers.back().out_dim(); }

  void check_chain() const {
    if (layers.empty()) throw std::invalid_argument("network has no layers");
    for (std::size_t i = 1; i < layers.size(); ++i) {
      if (layers[i].in_dim() != layers[i - 1].out_dim()) {
        throw std::invalid_argument("layer dimensions do not chain");
      }
    }
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) {
      n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
    }
    return n;
  }
};

using DenseLayer = DenseLayerT<double>;
using DenseNetwork = DenseNetworkT<double>;

// He-uniform for ReLU layers, Glorot-uniform otherwise.
template <class Scalar = double>
DenseLayerT<Scalar> make_dense_layer(int in, int out, Activation act,
                                     RngStream& rng) {
  if (in < 1 || out < 1) throw std::invalid_argument("layer dims must be >= 1");
  const double limit = act == Activation::kRelu
                           ? std::sqrt(6.0 / in)
                           : std::sqrt(6.0 / (in + out));
  DenseLayerT<Scalar> layer;
  layer.weights.resize(out, in);
  for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) {
    for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) {
      layer.weights(i, j) = static_cast<Scalar>(rng.uniform(-limit, limit));
    }
  }
  layer.bias = VectorX<Scalar>::Zero(out);
  layer.activation = act;
  return layer;
}

template <class Scalar>
MatrixX<Scalar> softmax_columns(const MatrixX<Scalar>& z) {
  MatrixX<Scalar> p = z;
  for (Eigen::Index j = 0; j < p.cols(); ++j) {
    auto col = p.col(j);
    col.array() -= col.maxCoeff();  // stabilize before exponentiation
    col = col.array().exp();
    col /= col.sum();
  }
  return p;
}

template <class Scalar>
struct ForwardPassT {
  MatrixX<Scalar> input;
  std::vector<MatrixX<Scalar>> pre;   // pre-activation z per layer
  std::vector<MatrixX<Scalar>> post;  // activation output per layer

  const MatrixX<Scalar>& output() const { return post.back(); }
  const MatrixX<Scalar>& logits() const { return pre.back(); }
};

using ForwardPass = ForwardPassT<double>;

template <class Scalar>
ForwardPassT<Scalar> forward(const DenseNetworkT<Scalar>& net,
                             const MatrixX<Scalar>& batch) {
  net.check_chain();
  if (batch.rows() != net.input_dim()) {
    throw std::invalid_argument("forward: batch feature dimension mismatch");
  }
  ForwardPassT<Scalar> pass;
  pass.input = batch;
  pass.pre.reserve(net.layers.size());
  pass.post.reserve(net.layers.size());
  const MatrixX<Scalar>* current = &pass.input;
  for (const auto& layer : net.layers) {
    MatrixX<Scalar> z = (layer.weights * (*current)).colwise() + layer.bias;
    MatrixX<Scalar> a;
    switch (layer.activation) {
      case Activation::kRelu:
        a = z.cwiseMax(Scalar{0});
        break;
      case Activation::kLinear:
        a = z;
        break;
      case Activation::kSoftmax:
        a = softmax_columns(z);
        break;
    }
    pass.pre.push_back(std::move(z));
    pass.post.push_back(std::move(a));
    current = &pass.post.back();
  }
  return pass;
}

template <class Scalar>
struct LayerGradT {
  MatrixX<Scalar> weights;
  VectorX<Scalar> bias;
};

template <class Scalar>
struct GradientsT {
  std::vector<LayerGradT<Scalar>> layers;
  MatrixX<Scalar> input;  // dL/d(input batch), needed to chain through modules
};

using Gradients = GradientsT<double>;

// out_grad is dL/d(network output) for relu/linear heads. For a softmax head
// it is dL/d(logits), i.e. exactly what cross_entropy() returns; softmax is
// only supported as the final layer.
template <class Scalar>
GradientsT<Scalar> backward(const DenseNetworkT<Scalar>& net,
                            const ForwardPassT<Scalar>& pass,
                            const MatrixX<Scalar>& out_grad) {
  const std::size_t n_layers = net.layers.size();
  if (pass.post.size() != n_layers) {
    throw std::invalid_argument("backward: pass does not match network");
  }
  if (out_grad.rows() != net.output_dim() ||
      out_grad.cols() != pass.input.cols()) {
    throw std::invalid_argument("backward: gradient shape mismatch");
  }
  GradientsT<Scalar> grads;
  grads.layers.resize(n_layers);
  MatrixX<Scalar> delta;  // dL/d(pre-activation of current layer)
  for (std::size_t li = n_layers; li-- > 0;) {
    const auto& layer = net.layers[li];
    const MatrixX<Scalar>& upstream = (li == n_layers - 1) ? out_grad : delta;
    MatrixX<Scalar> dz;
    switch (layer.activation) {
      case Activation::kRelu:
        dz = (pass.pre[li].array() > Scalar{0})
                 .select(upstream, MatrixX<Scalar>::Zero(upstream.rows(),
                                                         upstream.cols()));
        break;
      case Activation::kLinear:
        dz = upstream;
        break;
      case Activation::kSoftmax:
        if (li != n_layers - 1) {
          throw std::invalid_argument("softmax only supported as final layer");
        }
        dz = upstream;  // caller supplied dL/d(logits)
        break;
    }
    const MatrixX<Scalar>& below = (li == 0) ? pass.input : pass.post[li - 1];
    grads.layers[li].weights.noalias() = dz * below.transpose();
    grads.layers[li].bias = dz.rowwise().sum();
    if (li == 0) {
      grads.input.noalias() = layer.weights.transpose() * dz;
    } else {
      delta.noalias() = layer.weights.transpose() * dz;
    }
  }
  return grads;
}

template <class Scalar>
struct CrossEntropyT {
  Scalar loss;                  // mean over the batch, nats
  MatrixX<Scalar> logit_grad;   // (softmax - onehot) / batch
};

template <class Scalar>
CrossEntropyT<Scalar> cross_entropy(const MatrixX<Scalar>& logits,
                                    const std::vector<int>& classes) {
  const Eigen::Index batch = logits.cols();
  const Eigen::Index n_classes = logits.rows();
  if (static_cast<Eigen::Index>(classes.size()) != batch) {
    throw std::invalid_argument("cross_entropy: class batch size mismatch");
  }
  CrossEntropyT<Scalar> result;
  result.logit_grad = softmax_columns(logits);
  Scalar loss{0};
  for (Eigen::Index j = 0; j < batch; ++j) {
    const int c = classes[static_cast<std::size_t>(j)];
    if (c < 0 || c >= n_classes) {
      throw std::invalid_argument("cross_entropy: class index out of range");
    }
    const auto col = logits.col(j);
    const Scalar zmax = col.maxCoeff();
    const Scalar lse = zmax + std::log((col.array() - zmax).exp().sum());
    loss += lse - col(c);
    result.logit_grad(c, j) -= Scalar{1};
  }
  result.loss = loss / static_cast<Scalar>(batch);
  result.logit_grad /= static_cast<Scalar>(batch);
  return result;
}

template <class Scalar>
struct AdamStateT {
  std::vector<LayerGradT<Scalar>> first_moment;
  std::vector<LayerGradT<Scalar>> second_moment;
  long step = 0;
  Scalar beta1 = Scalar{0.9};
  Scalar beta2 = Scalar{0.999};
  Scalar epsilon = Scalar{1e-8};
};

using AdamState = AdamStateT<double>;

template <class Scalar>
AdamStateT<Scalar> make_adam_state(const DenseNetworkT<Scalar>& net) {
  AdamStateT<Scalar> state;
  state.first_moment.resize(net.layers.size());
  state.second_moment.resize(net.layers.size());
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto& l = net.layers[i];
    state.first_moment[i].weights =
        MatrixX<Scalar>::Zero(l.weights.rows(), l.weights.cols());
    state.first_moment[i].bias = VectorX<Scalar>::Zero(l.bias.size());
    state.second_moment[i].weights =
        MatrixX<Scalar>::Zero(l.weights.rows(), l.weights.cols());
    state.second_moment[i].bias = VectorX<Scalar>::Zero(l.bias.size());
  }
  return state;
}

template <class Scalar>
void adam_step(DenseNetworkT<Scalar>& net, const GradientsT<Scalar>& grads,
               AdamStateT<Scalar>& state, Scalar lr) {
  if (grads.layers.size() != net.layers.size() ||
      state.first_moment.size() != net.layers.size()) {
    throw std::invalid_argument("adam_step: shape mismatch");
  }
  state.step += 1;
  const Scalar bc1 = Scalar{1} - std::pow(state.beta1, Scalar(state.step));
  const Scalar bc2 = Scalar{1} - std::pow(state.beta2, Scalar(state.step));
  auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
    m = state.beta1 * m + (Scalar{1} - state.beta1) * grad;
    v.array() = state.beta2 * v.array() +
                (Scalar{1} - state.beta2) * grad.array().square();
    param.array() -= lr * (m.array() / bc1) /
                     ((v.array() / bc2).sqrt() + state.epsilon);
  };
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    update(net.layers[i].weights, grads.layers[i].weights,
           state.first_moment[i].weights, state.second_moment[i].weights);
    update(net.layers[i].bias, grads.layers[i].bias,
           state.first_moment[i].bias, state.second_moment[i].bias);
  }
}

struct LrSchedule {
  double base_lr = 1e-3;
  double decay = 1.0;  // multiplicative factor per epoch, in (0, 1]

  double lr(int epoch) const { return base_lr * std::pow(decay, epoch); }
};

// --- persistence -----------------------------------------------------------
//
//   wiretap-nn <version> <layer-count>
//   <in> <out> <activation>
//   <out> lines of <in> row-major weights
//   one line of <out> bias values
//
// Floats are written with shortest round-trip precision, so a reloaded model
// reproduces saved forward outputs exactly.

inline constexpr int kNetworkFormatVersion = 1;

namespace detail {

// Shortest decimal form that parses back to the identical value.
template <class Scalar>
void write_value(std::ostream& os, Scalar v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  os.write(buf, res.ptr - buf);
}

}  // namespace detail

template <class Scalar>
void save_network(std::ostream& os, const DenseNetworkT<Scalar>& net) {
  os << "wiretap-nn " << kNetworkFormatVersion << ' ' << net.layers.size()
     << '\n';
  for (const auto& layer : net.layers) {
    os << layer.in_dim() << ' ' << layer.out_dim() << ' '
       << activation_name(layer.activation) << '\n';
    for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) {
      for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) {
        if (j > 0) os << ' ';
        detail::write_value(os, layer.weights(i, j));
      }
      os << '\n';
    }
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) {
      if (i > 0) os << ' ';
      detail::write_value(os, layer.bias(i));
    }
    os << '\n';
  }
}

template <class Scalar = double>
DenseNetworkT<Scalar> load_network(std::istream& is) {
  std::string magic;
  int version = 0;
  std::size_t n_layers = 0;
  is >> magic >> version >> n_layers;
  if (!is || magic != "wiretap-nn") {
    throw std::runtime_error("load_network: not a wiretap-nn model");
  }
  if (version != kNetworkFormatVersion) {
    throw std::runtime_error("load_network: unsupported format version " +
                             std::to_string(version));
  }
  DenseNetworkT<Scalar> net;
  net.layers.resize(n_layers);
  for (auto& layer : net.layers) {
    int in = 0, out = 0;
    std::string act;
    is >> in >> out >> act;
    if (!is || in < 1 || out < 1) {
      throw std::runtime_error("load_network: bad layer header");
    }
    layer.activation = activation_from_name(act);
    layer.weights.resize(out, in);
    for (Eigen::Index i = 0; i < out; ++i) {
      for (Eigen::Index j = 0; j < in; ++j) is >> layer.weights(i, j);
    }
    layer.bias.resize(out);
    for (Eigen::Index i = 0; i < out; ++i) is >> layer.bias(i);
    if (!is) throw std::runtime_error("load_network: truncated parameter data");
  }
  net.check_chain();
  return net;
}

}  // namespace wiretap
