#pragma once

// Fully connected network with optional LayerNorm, hand-written backprop.
// Hidden layer: Linear -> [LayerNorm] -> activation. The last layer is linear.
// Batches are column-major: one sample per column.

#include <cmath>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "clusterflex/error.hpp"

namespace clusterflex::nn {

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

enum class Activation { relu, gelu, elu, tanh, sigmoid, leaky_relu };
enum class InitScheme { kaiming_uniform, kaiming_normal, xavier_uniform, orthogonal };

inline Activation parse_activation(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "gelu") return Activation::gelu;
  if (s == "elu") return Activation::elu;
  if (s == "tanh") return Activation::tanh;
  if (s == "sigmoid") return Activation::sigmoid;
  if (s == "leaky_relu") return Activation::leaky_relu;
  throw Error("unknown activation '" + s + "'");
}

inline std::string to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::gelu: return "gelu";
    case Activation::elu: return "elu";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
    case Activation::leaky_relu: return "leaky_relu";
  }
  return "?";
}

inline InitScheme parse_init(const std::string& s) {
  if (s == "kaiming_uniform") return InitScheme::kaiming_uniform;
  if (s == "kaiming_normal") return InitScheme::kaiming_normal;
  if (s == "xavier_uniform") return InitScheme::xavier_uniform;
  if (s == "orthogonal") return InitScheme::orthogonal;
  throw Error("unknown weight init '" + s + "'");
}

inline std::string to_string(InitScheme i) {
  switch (i) {
    case InitScheme::kaiming_uniform: return "kaiming_uniform";
    case InitScheme::kaiming_normal: return "kaiming_normal";
    case InitScheme::xavier_uniform: return "xavier_uniform";
    case InitScheme::orthogonal: return "orthogonal";
  }
  return "?";
}

struct MlpShape {
  std::vector<int> sizes;  // input, hidden..., output
  Activation activation = Activation::leaky_relu;
  double leaky_slope = 0.2;
  bool layer_norm = true;

  std::size_t layers() const { return sizes.size() - 1; }
  int input() const { return sizes.front(); }
  int output() const { return sizes.back(); }
  bool operator==(const MlpShape&) const = default;

  void validate() const {
    if (sizes.size() < 2) throw ShapeError("network needs at least an input and an output size");
    for (int s : sizes)
      if (s <= 0) throw ShapeError("layer sizes must be positive");
  }
};

// Recommended gain for the activation (as used by Kaiming schemes).
inline double activation_gain(Activation a, double slope) {
  switch (a) {
    case Activation::relu: return std::sqrt(2.0);
    case Activation::leaky_relu: return std::sqrt(2.0 / (1.0 + slope * slope));
    case Activation::tanh: return 5.0 / 3.0;
    case Activation::elu: return 1.0;
    case Activation::gelu: return std::sqrt(2.0);
    case Activation::sigmoid: return 1.0;
  }
  return 1.0;
}

template <typename S>
S activate(Activation a, S x, S slope) {
  switch (a) {
    case Activation::relu: return x > S(0) ? x : S(0);
    case Activation::leaky_relu: return x > S(0) ? x : slope * x;
    case Activation::elu: return x > S(0) ? x : std::expm1(x);
    case Activation::tanh: return std::tanh(x);
    case Activation::sigmoid: return S(1) / (S(1) + std::exp(-x));
    case Activation::gelu: return S(0.5) * x * (S(1) + std::erf(x / std::numbers::sqrt2_v<S>));
  }
  return x;
}

// Derivative given the pre-activation x and the activation output y.
template <typename S>
S activate_grad(Activation a, S x, S y, S slope) {
  switch (a) {
    case Activation::relu: return x > S(0) ? S(1) : S(0);
    case Activation::leaky_relu: return x > S(0) ? S(1) : slope;
    case Activation::elu: return x > S(0) ? S(1) : y + S(1);
    case Activation::tanh: return S(1) - y * y;
    case Activation::sigmoid: return y * (S(1) - y);
    case Activation::gelu: {
      const S cdf = S(0.5) * (S(1) + std::erf(x / std::numbers::sqrt2_v<S>));
      const S pdf = std::exp(S(-0.5) * x * x) / std::sqrt(S(2) * std::numbers::pi_v<S>);
      return cdf + x * pdf;
    }
  }
  return S(1);
}

// Whole-matrix versions of the two functions above. The common
// activations get vectorized expressions, the rest fall back to the scalar form.
template <typename S>
void activate_inplace(Activation act, Mat<S>& z, S slope) {
  auto a = z.array();
  switch (act) {
    case Activation::relu: a = a.max(S(0)); return;
    case Activation::leaky_relu:
      // max/min forms vectorize, select() does not
      if (slope <= S(1)) a = a.max(slope * a);
      else a = a.min(slope * a);
      return;
    case Activation::tanh: a = a.tanh(); return;
    case Activation::sigmoid: a = a.logistic(); return;
    case Activation::elu: a = a.max(S(0)) + a.expm1().min(S(0)); return;
    case Activation::gelu: z = z.unaryExpr([&](S v) { return activate(act, v, slope); }); return;
  }
}

// g *= f'(x), with x the pre-activation and y the output.
template <typename S>
void scale_by_activation_grad(Activation act, Mat<S>& g, const Mat<S>& x, const Mat<S>& y, S slope) {
  auto ga = g.array();
  switch (act) {
    case Activation::relu: ga *= (x.array() > S(0)).template cast<S>(); return;
    case Activation::leaky_relu: ga *= (x.array() > S(0)).template cast<S>() * (S(1) - slope) + slope; return;
    case Activation::tanh: ga *= S(1) - y.array().square(); return;
    case Activation::sigmoid: ga *= y.array() * (S(1) - y.array()); return;
    case Activation::elu: ga *= (y.array() + S(1)).min(S(1)); return;
    case Activation::gelu:
      ga *= x.binaryExpr(y, [&](S xv, S yv) { return activate_grad(act, xv, yv, slope); }).array();
      return;
  }
}

template <typename S>
struct Layer {
  Mat<S> weight;  // out x in
  Vec<S> bias;
  Vec<S> ln_gain;  // empty when the layer has no LayerNorm
  Vec<S> ln_bias;
};

template <typename S>
struct MlpParams {
  std::vector<Layer<S>> layers;

  // Every parameter array as a flat span, in a fixed order.
  std::vector<std::span<S>> tensors() {
    std::vector<std::span<S>> out;
    for (auto& l : layers) {
      out.emplace_back(l.weight.data(), static_cast<std::size_t>(l.weight.size()));
      out.emplace_back(l.bias.data(), static_cast<std::size_t>(l.bias.size()));
      if (l.ln_gain.size() > 0) {
        out.emplace_back(l.ln_gain.data(), static_cast<std::size_t>(l.ln_gain.size()));
        out.emplace_back(l.ln_bias.data(), static_cast<std::size_t>(l.ln_bias.size()));
      }
    }
    return out;
  }

  std::vector<std::span<const S>> tensors() const {
    std::vector<std::span<const S>> out;
    for (auto t : const_cast<MlpParams*>(this)->tensors()) out.emplace_back(t.data(), t.size());
    return out;
  }

  std::size_t count() const {
    std::size_t n = 0;
    for (auto t : tensors()) n += t.size();
    return n;
  }

  void set_zero() {
    for (auto t : tensors()) std::fill(t.begin(), t.end(), S(0));
  }

  bool all_finite() const {
    for (auto t : tensors())
      for (S v : t)
        if (!std::isfinite(v)) return false;
    return true;
  }
};

template <typename S>
MlpParams<S> zeros_like(const MlpParams<S>& p) {
  MlpParams<S> z = p;
  z.set_zero();
  return z;
}

template <typename S>
void orthogonal_fill(Mat<S>& w, std::mt19937_64& rng, double gain) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto rows = w.rows(), cols = w.cols();
  const bool tall = rows >= cols;
  Eigen::MatrixXd a(tall ? rows : cols, tall ? cols : rows);
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i) a(i, j) = normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), a.cols());
  const Eigen::MatrixXd r = qr.matrixQR().topRows(a.cols()).template triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < q.cols(); ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;  // unique decomposition
  const Eigen::MatrixXd out = tall ? q : Eigen::MatrixXd(q.transpose());
  w = (gain * out).template cast<S>();
}

template <typename S>
MlpParams<S> init_mlp(const MlpShape& shape, InitScheme scheme, std::uint64_t seed) {
  shape.validate();
  std::mt19937_64 rng(seed);
  const double gain = activation_gain(shape.activation, shape.leaky_slope);
  MlpParams<S> p;
  for (std::size_t l = 0; l < shape.layers(); ++l) {
    const int in = shape.sizes[l], out = shape.sizes[l + 1];
    Layer<S> layer;
    layer.weight.resize(out, in);
    layer.bias = Vec<S>::Zero(out);
    const bool hidden = l + 1 < shape.layers();
    if (hidden && shape.layer_norm) {
      layer.ln_gain = Vec<S>::Ones(out);
      layer.ln_bias = Vec<S>::Zero(out);
    }
    switch (scheme) {
      case InitScheme::kaiming_uniform: {
        std::uniform_real_distribution<double> u(-gain * std::sqrt(3.0 / in), gain * std::sqrt(3.0 / in));
        for (Eigen::Index i = 0; i < layer.weight.size(); ++i) layer.weight.data()[i] = static_cast<S>(u(rng));
        break;
      }
      case InitScheme::kaiming_normal: {
        std::normal_distribution<double> n(0.0, gain / std::sqrt(static_cast<double>(in)));
        for (Eigen::Index i = 0; i < layer.weight.size(); ++i) layer.weight.data()[i] = static_cast<S>(n(rng));
        break;
      }
      case InitScheme::xavier_uniform: {
        const double b = std::sqrt(6.0 / (in + out));
        std::uniform_real_distribution<double> u(-b, b);
        for (Eigen::Index i = 0; i < layer.weight.size(); ++i) layer.weight.data()[i] = static_cast<S>(u(rng));
        break;
      }
      case InitScheme::orthogonal: orthogonal_fill(layer.weight, rng, 1.0); break;
    }
    p.layers.push_back(std::move(layer));
  }
  return p;
}

template <typename S>
struct LayerCache {
  Mat<S> input;   // in x B
  Mat<S> normed;  // (z - mean) / std, when LayerNorm is on
  Vec<S> inv_std;
  Mat<S> pre;     // pre-activation (after LayerNorm affine)
  Mat<S> out;     // activation output
};

template <typename S>
struct MlpCache {
  std::vector<LayerCache<S>> layers;
};

inline constexpr double kLayerNormEps = 1e-5;

template <typename S>
Mat<S> mlp_forward(const MlpShape& shape, const MlpParams<S>& p, const Mat<S>& x, MlpCache<S>* cache = nullptr) {
  if (x.rows() != shape.input())
    throw ShapeError("network input has " + std::to_string(x.rows()) + " rows, expected " +
                     std::to_string(shape.input()));
  if (cache) cache->layers.resize(p.layers.size());
  const S slope = static_cast<S>(shape.leaky_slope);
  Mat<S> h = x;
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const auto& layer = p.layers[l];
    const bool hidden = l + 1 < p.layers.size();
    Mat<S> z = layer.weight * h;
    z.colwise() += layer.bias;
    if (cache) cache->layers[l].input = h;
    if (!hidden) {
      h = std::move(z);
      break;
    }
    if (layer.ln_gain.size() > 0) {
      const auto n = static_cast<S>(z.rows());
      const Eigen::Matrix<S, 1, Eigen::Dynamic> mean = z.colwise().sum() / n;
      z.rowwise() -= mean;
      const Eigen::Matrix<S, 1, Eigen::Dynamic> var = z.array().square().colwise().sum() / n;
      const Eigen::Matrix<S, 1, Eigen::Dynamic> inv =
          (var.array() + static_cast<S>(kLayerNormEps)).rsqrt().matrix();
      z.array().rowwise() *= inv.array();
      if (cache) {
        cache->layers[l].normed = z;
        cache->layers[l].inv_std = inv.transpose();
      }
      z.array().colwise() *= layer.ln_gain.array();
      z.colwise() += layer.ln_bias;
    }
    if (cache) cache->layers[l].pre = z;
    activate_inplace(shape.activation, z, slope);
    if (cache) cache->layers[l].out = z;
    h = std::move(z);
  }
  return h;
}

// Backpropagates dY (output x B). Parameter gradients are added to `grads`
// when it is non-null. Returns the gradient with respect to the input.
template <typename S>
Mat<S> mlp_backward(const MlpShape& shape, const MlpParams<S>& p, const MlpCache<S>& cache, const Mat<S>& dy,
                    MlpParams<S>* grads) {
  const S slope = static_cast<S>(shape.leaky_slope);
  Mat<S> g = dy;
  for (std::size_t li = p.layers.size(); li-- > 0;) {
    const auto& layer = p.layers[li];
    const auto& c = cache.layers[li];
    const bool hidden = li + 1 < p.layers.size();
    if (hidden) {
      scale_by_activation_grad(shape.activation, g, c.pre, c.out, slope);
      if (layer.ln_gain.size() > 0) {
        if (grads) {
          grads->layers[li].ln_gain += (g.array() * c.normed.array()).rowwise().sum().matrix();
          grads->layers[li].ln_bias += g.rowwise().sum();
        }
        g.array().colwise() *= layer.ln_gain.array();  // now d(normed)
        const auto n = static_cast<S>(g.rows());
        const Eigen::Matrix<S, 1, Eigen::Dynamic> sum_g = g.colwise().sum();
        const Eigen::Matrix<S, 1, Eigen::Dynamic> sum_gx = (g.array() * c.normed.array()).colwise().sum().matrix();
        Mat<S> dz = g * n;
        dz.rowwise() -= sum_g;
        dz.array() -= c.normed.array().rowwise() * sum_gx.array();
        dz.array().rowwise() *= (c.inv_std.transpose().array() / n);
        g = std::move(dz);
      }
    }
    if (grads) {
      grads->layers[li].weight.noalias() += g * c.input.transpose();
      grads->layers[li].bias += g.rowwise().sum();
    }
    Mat<S> dx = layer.weight.transpose() * g;
    g = std::move(dx);
  }
  return g;
}

// Shape plus parameters.
template <typename S>
struct Mlp {
  MlpShape shape;
  MlpParams<S> params;

  Mlp() = default;
  Mlp(MlpShape s, InitScheme scheme, std::uint64_t seed)
      : shape(std::move(s)), params(init_mlp<S>(shape, scheme, seed)) {}

  Mat<S> forward(const Mat<S>& x, MlpCache<S>* cache = nullptr) const {
    return mlp_forward(shape, params, x, cache);
  }
  Mat<S> backward(const MlpCache<S>& cache, const Mat<S>& dy, MlpParams<S>* grads) const {
    return mlp_backward(shape, params, cache, dy, grads);
  }
};

// target <- tau * online + (1 - tau) * target, elementwise.
template <typename S>
void polyak_update(const MlpParams<S>& online, MlpParams<S>& target, S tau) {
  auto src = online.tensors();
  auto dst = target.tensors();
  if (src.size() != dst.size()) throw ShapeError("polyak: parameter lists differ");
  for (std::size_t t = 0; t < src.size(); ++t) {
    if (src[t].size() != dst[t].size()) throw ShapeError("polyak: tensor sizes differ");
    for (std::size_t i = 0; i < src[t].size(); ++i) dst[t][i] = tau * src[t][i] + (S(1) - tau) * dst[t][i];
  }
}

}  // namespace clusterflex::nn
