#pragma once

// Policy heads. The actor network emits 2*A values per sample; the policy
// turns them and a noise draw into actions in [-1, 1] (or R^A for the
// unsquashed Gaussian) with their log-density, and backpropagates through
// the reparameterized sample.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/digamma.hpp>

#include "clusterflex/nn/mlp.hpp"

namespace clusterflex::sac {

using nn::Mat;
using nn::Vec;

enum class PolicyKind { gaussian_tanh, gaussian, beta };

inline PolicyKind parse_policy(const std::string& s) {
  if (s == "gaussian_tanh") return PolicyKind::gaussian_tanh;
  if (s == "gaussian") return PolicyKind::gaussian;
  if (s == "beta") return PolicyKind::beta;
  throw Error("unknown policy distribution '" + s + "'");
}

inline std::string to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::gaussian_tanh: return "gaussian_tanh";
    case PolicyKind::gaussian: return "gaussian";
    case PolicyKind::beta: return "beta";
  }
  return "?";
}

inline constexpr double kTanhJacobianEps = 1e-6;
inline constexpr double kBetaEdge = 1e-7;  // keeps Beta samples off the support boundary

struct PolicyBounds {
  double log_std_min = -20.0;
  double log_std_max = 3.0;
};

// Everything the backward pass needs.
template <typename S>
struct PolicySample {
  Mat<S> action;        // A x B
  Eigen::Matrix<S, 1, Eigen::Dynamic> log_prob;  // 1 x B
  Mat<S> noise;         // A x B, eps (Gaussian) or uniform draw (Beta)
  Mat<S> mean;          // mu, or Beta alpha
  Mat<S> spread;        // sigma, or Beta beta
  Mat<S> log_std;       // clamped log sigma (Gaussian kinds)
  Mat<S> clamp_mask;    // 1 where log sigma was inside the bounds
  Mat<S> pre_tanh;      // u
  Mat<S> raw_a, raw_b;  // Beta head pre-activations
  Mat<S> unit_sample;   // Beta sample on (0, 1)
  Mat<S> dx_da, dx_db;  // Beta implicit reparameterization
};

inline double softplus(double x) { return x > 20.0 ? x : std::log1p(std::exp(x)); }
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

template <typename S>
Mat<S> draw_noise(PolicyKind kind, Eigen::Index dims, Eigen::Index batch, std::mt19937_64& rng,
                  std::normal_distribution<double>& normal) {
  Mat<S> n(dims, batch);
  if (kind == PolicyKind::beta) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (Eigen::Index i = 0; i < n.size(); ++i) {
      double v = u(rng);
      while (v <= 0.0) v = u(rng);
      n.data()[i] = static_cast<S>(v);
    }
  } else {
    for (Eigen::Index i = 0; i < n.size(); ++i) n.data()[i] = static_cast<S>(normal(rng));
  }
  return n;
}

inline double beta_log_pdf(double x, double a, double b) {
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

template <typename S>
Mat<S> sech_squared(const Mat<S>& u) {
  return u.unaryExpr([](S v) {
    const S c = std::cosh(v);
    return S(1) / (c * c);
  });
}

template <typename S>
PolicySample<S> policy_sample(PolicyKind kind, const Mat<S>& head, const Mat<S>& noise, const PolicyBounds& bounds) {
  const Eigen::Index A = head.rows() / 2, B = head.cols();
  if (head.rows() != 2 * A || noise.rows() != A || noise.cols() != B)
    throw ShapeError("policy head and noise shapes disagree");
  PolicySample<S> s;
  s.noise = noise;
  s.log_prob = Eigen::Matrix<S, 1, Eigen::Dynamic>::Zero(B);
  const S half_log_2pi = static_cast<S>(0.5 * std::log(2.0 * std::numbers::pi));

  if (kind == PolicyKind::beta) {
    s.raw_a = head.topRows(A);
    s.raw_b = head.bottomRows(A);
    s.mean.resize(A, B);
    s.spread.resize(A, B);
    s.unit_sample.resize(A, B);
    s.dx_da.resize(A, B);
    s.dx_db.resize(A, B);
    s.action.resize(A, B);
    for (Eigen::Index j = 0; j < B; ++j) {
      double lp = 0.0;
      for (Eigen::Index i = 0; i < A; ++i) {
        const double a = softplus(static_cast<double>(s.raw_a(i, j))) + 1.0;
        const double b = softplus(static_cast<double>(s.raw_b(i, j))) + 1.0;
        const double u = static_cast<double>(noise(i, j));
        double x = boost::math::ibeta_inv(a, b, u);
        x = std::clamp(x, kBetaEdge, 1.0 - kBetaEdge);
        // dx/dtheta = -(dI/dtheta) / pdf(x), the CDF held at u.
        const double pdf = std::exp(beta_log_pdf(x, a, b));
        const double ha = 1e-5 * a, hb = 1e-5 * b;
        const double dIda = (boost::math::ibeta(a + ha, b, x) - boost::math::ibeta(a - ha, b, x)) / (2.0 * ha);
        const double dIdb = (boost::math::ibeta(a, b + hb, x) - boost::math::ibeta(a, b - hb, x)) / (2.0 * hb);
        s.mean(i, j) = static_cast<S>(a);
        s.spread(i, j) = static_cast<S>(b);
        s.unit_sample(i, j) = static_cast<S>(x);
        s.dx_da(i, j) = static_cast<S>(-dIda / pdf);
        s.dx_db(i, j) = static_cast<S>(-dIdb / pdf);
        s.action(i, j) = static_cast<S>(2.0 * x - 1.0);
        lp += beta_log_pdf(x, a, b) - std::numbers::ln2;
      }
      s.log_prob(j) = static_cast<S>(lp);
    }
    return s;
  }

  s.mean = head.topRows(A);
  const Mat<S> raw_log_std = head.bottomRows(A);
  const S lo = static_cast<S>(bounds.log_std_min), hi = static_cast<S>(bounds.log_std_max);
  s.log_std = raw_log_std.cwiseMax(lo).cwiseMin(hi);
  s.clamp_mask = raw_log_std.unaryExpr([&](S v) { return (v >= lo && v <= hi) ? S(1) : S(0); });
  s.spread = s.log_std.array().exp().matrix();
  s.pre_tanh = s.mean + s.spread.cwiseProduct(noise);
  // log N(u; mu, sigma) with (u - mu) / sigma = eps
  s.log_prob = (S(-0.5) * noise.array().square() - s.log_std.array() - half_log_2pi).colwise().sum().matrix();
  if (kind == PolicyKind::gaussian_tanh) {
    s.action = s.pre_tanh.array().tanh().matrix();
    const S eps = static_cast<S>(kTanhJacobianEps);
    // 1 - tanh^2 as sech^2 of the pre-tanh value; no cancellation for large |u|
    s.log_prob -= (sech_squared(s.pre_tanh).array() + eps).log().colwise().sum().matrix();
  } else {
    s.action = s.pre_tanh;
  }
  return s;
}

// Gradient of a loss with respect to the policy head, given dL/d(action)
// and dL/d(log_prob).
template <typename S>
Mat<S> policy_backward(PolicyKind kind, const PolicySample<S>& s, const Mat<S>& d_action,
                       const Eigen::Matrix<S, 1, Eigen::Dynamic>& d_log_prob) {
  const Eigen::Index A = s.action.rows(), B = s.action.cols();
  Mat<S> dh(2 * A, B);

  if (kind == PolicyKind::beta) {
    for (Eigen::Index j = 0; j < B; ++j) {
      for (Eigen::Index i = 0; i < A; ++i) {
        const double a = s.mean(i, j), b = s.spread(i, j), x = s.unit_sample(i, j);
        const double dlp = d_log_prob(j);
        const double dlogpdf_dx = (a - 1.0) / x - (b - 1.0) / (1.0 - x);
        const double psi_ab = boost::math::digamma(a + b);
        const double dlogpdf_da = std::log(x) - boost::math::digamma(a) + psi_ab;
        const double dlogpdf_db = std::log1p(-x) - boost::math::digamma(b) + psi_ab;
        const double dL_dx = 2.0 * d_action(i, j) + dlp * dlogpdf_dx;
        const double dL_da = dL_dx * s.dx_da(i, j) + dlp * dlogpdf_da;
        const double dL_db = dL_dx * s.dx_db(i, j) + dlp * dlogpdf_db;
        dh(i, j) = static_cast<S>(dL_da * sigmoid(s.raw_a(i, j)));
        dh(A + i, j) = static_cast<S>(dL_db * sigmoid(s.raw_b(i, j)));
      }
    }
    return dh;
  }

  Mat<S> du;
  if (kind == PolicyKind::gaussian_tanh) {
    const S eps = static_cast<S>(kTanhJacobianEps);
    const auto a = s.action.array();
    const Mat<S> sech2 = sech_squared(s.pre_tanh);
    const auto one_minus = sech2.array();
    du = (d_action.array() * one_minus +
          (S(2) * a * one_minus / (one_minus + eps)).rowwise() * d_log_prob.array())
             .matrix();
  } else {
    du = d_action;
  }
  dh.topRows(A) = du;
  Mat<S> dls = du.cwiseProduct(s.spread).cwiseProduct(s.noise);
  dls.array().rowwise() -= d_log_prob.array();
  dh.bottomRows(A) = dls.cwiseProduct(s.clamp_mask);
  return dh;
}

// Noise-free action used for evaluation.
template <typename S>
Mat<S> deterministic_action(PolicyKind kind, const Mat<S>& head) {
  const Eigen::Index A = head.rows() / 2;
  switch (kind) {
    case PolicyKind::gaussian_tanh: return head.topRows(A).array().tanh().matrix();
    case PolicyKind::gaussian: return head.topRows(A).cwiseMax(S(-1)).cwiseMin(S(1));
    case PolicyKind::beta: {
      Mat<S> out(A, head.cols());
      for (Eigen::Index j = 0; j < head.cols(); ++j)
        for (Eigen::Index i = 0; i < A; ++i) {
          const double a = softplus(head(i, j)) + 1.0, b = softplus(head(A + i, j)) + 1.0;
          out(i, j) = static_cast<S>(2.0 * a / (a + b) - 1.0);
        }
      return out;
    }
  }
  return head.topRows(A);
}

}  // namespace clusterflex::sac
