#pragma once

#include <cmath>

#include "clusterflex/nn/mlp.hpp"

namespace clusterflex::nn {

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam over a parameter set of fixed shape.
template <typename S>
struct Adam {
  AdamConfig config;
  MlpParams<S> m, v;
  long long t = 0;

  Adam() = default;
  Adam(const MlpParams<S>& like, AdamConfig c) : config(c), m(zeros_like(like)), v(zeros_like(like)) {}

  void step(MlpParams<S>& params, const MlpParams<S>& grads) {
    ++t;
    const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(t));
    const S b1 = static_cast<S>(config.beta1), b2 = static_cast<S>(config.beta2);
    const S lr = static_cast<S>(config.lr), eps = static_cast<S>(config.eps);
    const S inv_c1 = static_cast<S>(1.0 / c1), inv_c2 = static_cast<S>(1.0 / c2);
    auto p = params.tensors();
    auto g = grads.tensors();
    auto mt = m.tensors();
    auto vt = v.tensors();
    if (p.size() != g.size() || p.size() != mt.size()) throw ShapeError("adam: parameter lists differ");
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (p[k].size() != g[k].size()) throw ShapeError("adam: tensor sizes differ");
      for (std::size_t i = 0; i < p[k].size(); ++i) {
        mt[k][i] = b1 * mt[k][i] + (S(1) - b1) * g[k][i];
        vt[k][i] = b2 * vt[k][i] + (S(1) - b2) * g[k][i] * g[k][i];
        const S mhat = mt[k][i] * inv_c1;
        const S vhat = vt[k][i] * inv_c2;
        p[k][i] -= lr * mhat / (std::sqrt(vhat) + eps);
      }
    }
  }
};

// Adam for a single scalar (the log temperature).
struct ScalarAdam {
  AdamConfig config;
  double m = 0.0, v = 0.0;
  long long t = 0;

  double step(double param, double grad) {
    ++t;
    m = config.beta1 * m + (1.0 - config.beta1) * grad;
    v = config.beta2 * v + (1.0 - config.beta2) * grad * grad;
    const double mhat = m / (1.0 - std::pow(config.beta1, static_cast<double>(t)));
    const double vhat = v / (1.0 - std::pow(config.beta2, static_cast<double>(t)));
    return param - config.lr * mhat / (std::sqrt(vhat) + config.eps);
  }
};

}  // namespace clusterflex::nn
