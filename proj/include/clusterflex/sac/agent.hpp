#pragma once

// Soft Actor-Critic with double critics, Polyak targets and automatic
// temperature. Losses:
//
//   critic:      mean((Q_i(s, a) - y)^2),
//                y = r + gamma (1 - d) (min_j Qbar_j(s', a') - alpha log pi(a'|s'))
//   actor:       mean(alpha log pi(a~|s) - min_j Q_j(s, a~)),  a~ reparameterized
//   temperature: -log alpha * (mean log pi + target_entropy)

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "clusterflex/nn/adam.hpp"
#include "clusterflex/nn/mlp.hpp"
#include "clusterflex/sac/policy.hpp"
#include "clusterflex/sac/replay_buffer.hpp"
#include "clusterflex/seed.hpp"

namespace clusterflex::sac {

using nn::Mlp;
using nn::MlpCache;
using nn::MlpParams;

struct SacHyperparameters {
  double gamma = 0.995;
  double tau = 0.005;
  double target_entropy = -24.0;
  double lr_actor = 3e-4;
  double lr_critic = 3e-4;
  double lr_alpha = 3e-4;
  std::size_t buffer_capacity = 1'000'000;
  std::size_t batch_size = 256;
  std::vector<int> hidden{256, 256};
  nn::Activation activation = nn::Activation::leaky_relu;
  double leaky_slope = 0.2;
  nn::InitScheme init = nn::InitScheme::kaiming_uniform;
  bool layer_norm = true;
  double log_std_min = -20.0;
  double log_std_max = 3.0;
  PolicyKind policy = PolicyKind::gaussian_tanh;
  double initial_alpha = 1.0;

  void validate() const {
    if (!(gamma > 0.0 && gamma < 1.0)) throw RangeError("gamma must lie in (0, 1)");
    if (!(tau > 0.0 && tau < 1.0)) throw RangeError("tau must lie in (0, 1)");
    if (!(lr_actor > 0.0 && lr_critic > 0.0 && lr_alpha > 0.0)) throw RangeError("learning rates must be positive");
    if (batch_size == 0 || batch_size > buffer_capacity) throw RangeError("batch size must lie in [1, capacity]");
    if (hidden.empty()) throw RangeError("at least one hidden layer is required");
    for (int h : hidden)
      if (h <= 0) throw RangeError("hidden widths must be positive");
    if (!(log_std_min < log_std_max)) throw RangeError("log_std_min must be below log_std_max");
    if (!(initial_alpha > 0.0)) throw RangeError("initial alpha must be positive");
  }

  nn::MlpShape shape(int in, int out) const {
    nn::MlpShape s;
    s.sizes.push_back(in);
    s.sizes.insert(s.sizes.end(), hidden.begin(), hidden.end());
    s.sizes.push_back(out);
    s.activation = activation;
    s.leaky_slope = leaky_slope;
    s.layer_norm = layer_norm;
    return s;
  }

  PolicyBounds bounds() const { return {log_std_min, log_std_max}; }
};

template <typename S>
nn::Mat<S> stack_rows(const nn::Mat<S>& top, const nn::Mat<S>& bottom) {
  nn::Mat<S> out(top.rows() + bottom.rows(), top.cols());
  out.topRows(top.rows()) = top;
  out.bottomRows(bottom.rows()) = bottom;
  return out;
}

template <typename S>
using RowS = Eigen::Matrix<S, 1, Eigen::Dynamic>;

template <typename S>
struct TargetResult {
  RowS<S> y;
  RowS<S> q1, q2;  // target critics at (s', a')
  RowS<S> next_log_prob;
};

// Bootstrapped soft target; `noise` drives the fresh a' ~ pi(.|s').
template <typename S>
TargetResult<S> critic_target(const Batch<S>& batch, const Mlp<S>& actor, const Mlp<S>& target1,
                              const Mlp<S>& target2, S alpha, S gamma, const nn::Mat<S>& noise, PolicyKind kind,
                              const PolicyBounds& bounds) {
  const auto head = actor.forward(batch.next_obs);
  const auto next = policy_sample(kind, head, noise, bounds);
  const auto sa = stack_rows(batch.next_obs, next.action);
  TargetResult<S> t;
  t.q1 = target1.forward(sa);
  t.q2 = target2.forward(sa);
  t.next_log_prob = next.log_prob;
  const RowS<S> soft = t.q1.cwiseMin(t.q2) - alpha * next.log_prob;
  t.y = batch.reward + (gamma * (S(1) - batch.done.array()) * soft.array()).matrix();
  return t;
}

// Mean squared error of one critic against fixed targets; gradients are
// added to `grads` when given.
template <typename S>
S critic_loss(const Mlp<S>& critic, const nn::Mat<S>& state_action, const RowS<S>& y,
              std::type_identity_t<MlpParams<S>*> grads) {
  MlpCache<S> cache;
  const RowS<S> q = critic.forward(state_action, grads ? &cache : nullptr);
  const RowS<S> diff = q - y;
  const auto B = static_cast<S>(y.size());
  if (grads) critic.backward(cache, nn::Mat<S>(S(2) / B * diff), grads);
  return diff.squaredNorm() / B;
}

template <typename S>
struct ActorResult {
  S loss = 0;
  S mean_log_prob = 0;
};

// Actor objective with fixed noise; critic parameters are read only.
template <typename S>
ActorResult<S> actor_loss(const Mlp<S>& actor, const Mlp<S>& q1, const Mlp<S>& q2, const nn::Mat<S>& obs,
                          const nn::Mat<S>& noise, std::type_identity_t<S> alpha, PolicyKind kind,
                          const PolicyBounds& bounds, std::type_identity_t<MlpParams<S>*> grads) {
  MlpCache<S> actor_cache, c1, c2;
  const auto head = actor.forward(obs, grads ? &actor_cache : nullptr);
  const auto sample = policy_sample(kind, head, noise, bounds);
  const auto sa = stack_rows(obs, sample.action);
  const RowS<S> v1 = q1.forward(sa, grads ? &c1 : nullptr);
  const RowS<S> v2 = q2.forward(sa, grads ? &c2 : nullptr);
  const auto B = obs.cols();
  const auto inv_b = S(1) / static_cast<S>(B);
  ActorResult<S> r;
  r.mean_log_prob = sample.log_prob.mean();
  r.loss = (alpha * sample.log_prob - v1.cwiseMin(v2)).mean();
  if (!grads) return r;

  // d(-min Q)/dQ_j routes each sample through whichever critic is smaller.
  nn::Mat<S> d1 = nn::Mat<S>::Zero(1, B), d2 = nn::Mat<S>::Zero(1, B);
  for (Eigen::Index j = 0; j < B; ++j) (v1(j) <= v2(j) ? d1 : d2)(0, j) = -inv_b;
  const Eigen::Index A = sample.action.rows();
  const nn::Mat<S> da = q1.backward(c1, d1, nullptr).bottomRows(A) + q2.backward(c2, d2, nullptr).bottomRows(A);
  const RowS<S> dlogp = RowS<S>::Constant(B, alpha * inv_b);
  actor.backward(actor_cache, policy_backward(kind, sample, da, dlogp), grads);
  return r;
}

struct TemperatureResult {
  double loss = 0.0;
  double grad = 0.0;  // dL/dlog_alpha
};

inline TemperatureResult temperature_loss(double log_alpha, double mean_log_prob, double target_entropy) {
  const double bracket = mean_log_prob + target_entropy;
  return {-log_alpha * bracket, -bracket};
}

struct UpdateStats {
  double critic1_loss = 0.0;
  double critic2_loss = 0.0;
  double actor_loss = 0.0;
  double alpha_loss = 0.0;
  double log_prob = 0.0;  // batch mean of log pi for fresh actions
  double alpha = 0.0;     // after the update
};

template <typename S>
void require_finite(const MlpParams<S>& g, const std::string& what) {
  if (!g.all_finite()) throw NumericError("non-finite gradient in " + what);
}

template <typename S>
class SacAgent {
 public:
  SacAgent() = default;
  SacAgent(std::size_t obs_dim, std::size_t act_dim, SacHyperparameters hp, std::uint64_t seed)
      : hp_(std::move(hp)), obs_dim_(obs_dim), act_dim_(act_dim), seed_(seed) {
    hp_.validate();
    const int o = static_cast<int>(obs_dim), a = static_cast<int>(act_dim);
    actor_ = Mlp<S>(hp_.shape(o, 2 * a), hp_.init, derive_seed(seed, seed_stream::actor_init));
    q1_ = Mlp<S>(hp_.shape(o + a, 1), hp_.init, derive_seed(seed, seed_stream::critic1_init));
    q2_ = Mlp<S>(hp_.shape(o + a, 1), hp_.init, derive_seed(seed, seed_stream::critic2_init));
    t1_ = q1_;
    t2_ = q2_;
    actor_opt_ = nn::Adam<S>(actor_.params, {hp_.lr_actor});
    q1_opt_ = nn::Adam<S>(q1_.params, {hp_.lr_critic});
    q2_opt_ = nn::Adam<S>(q2_.params, {hp_.lr_critic});
    alpha_opt_.config.lr = hp_.lr_alpha;
    log_alpha_ = std::log(hp_.initial_alpha);
    noise_rng_.seed(derive_seed(seed, seed_stream::policy_noise));
    replay_rng_.seed(derive_seed(seed, seed_stream::replay_sampling));
  }

  const SacHyperparameters& hyperparameters() const { return hp_; }
  std::size_t obs_dim() const { return obs_dim_; }
  std::size_t act_dim() const { return act_dim_; }
  std::uint64_t seed() const { return seed_; }
  double alpha() const { return std::exp(log_alpha_); }
  double log_alpha() const { return log_alpha_; }
  long long updates() const { return updates_; }

  // Action for one observation. Stochastic actions consume the noise stream.
  std::vector<double> act(std::span<const double> obs, bool deterministic, double* log_prob = nullptr) {
    if (obs.size() != obs_dim_)
      throw ShapeError("observation has " + std::to_string(obs.size()) + " dims, agent expects " +
                       std::to_string(obs_dim_));
    nn::Mat<S> x(static_cast<Eigen::Index>(obs_dim_), 1);
    for (std::size_t i = 0; i < obs_dim_; ++i) {
      if (!std::isfinite(obs[i])) throw NumericError("non-finite observation");
      x(static_cast<Eigen::Index>(i), 0) = static_cast<S>(obs[i]);
    }
    const auto head = actor_.forward(x);
    nn::Mat<S> a;
    if (deterministic) {
      a = deterministic_action(hp_.policy, head);
    } else {
      const auto noise = draw_noise<S>(hp_.policy, static_cast<Eigen::Index>(act_dim_), 1, noise_rng_, normal_);
      const auto s = policy_sample(hp_.policy, head, noise, hp_.bounds());
      a = s.action;
      if (log_prob) *log_prob = static_cast<double>(s.log_prob(0));
    }
    std::vector<double> out(act_dim_);
    for (std::size_t i = 0; i < act_dim_; ++i) out[i] = static_cast<double>(a(static_cast<Eigen::Index>(i), 0));
    return out;
  }

  Batch<S> sample(const ReplayBuffer<S>& buffer) { return buffer.sample(hp_.batch_size, replay_rng_); }

  // One gradient step on every loss: critics, actor, temperature, then
  // Polyak averaging of the targets.
  UpdateStats update(const Batch<S>& batch) {
    UpdateStats st;
    const auto A = static_cast<Eigen::Index>(act_dim_);
    const auto B = batch.size();
    const S alpha = static_cast<S>(std::exp(log_alpha_));

    const auto next_noise = draw_noise<S>(hp_.policy, A, B, noise_rng_, normal_);
    const auto target = critic_target(batch, actor_, t1_, t2_, alpha, static_cast<S>(hp_.gamma), next_noise,
                                      hp_.policy, hp_.bounds());
    const auto sa = stack_rows(batch.obs, batch.action);
    auto g1 = nn::zeros_like(q1_.params);
    auto g2 = nn::zeros_like(q2_.params);
    st.critic1_loss = static_cast<double>(critic_loss(q1_, sa, target.y, &g1));
    st.critic2_loss = static_cast<double>(critic_loss(q2_, sa, target.y, &g2));
    if (!std::isfinite(st.critic1_loss) || !std::isfinite(st.critic2_loss))
      throw NumericError("non-finite critic loss at update " + std::to_string(updates_));
    require_finite(g1, "critic 1");
    require_finite(g2, "critic 2");
    q1_opt_.step(q1_.params, g1);
    q2_opt_.step(q2_.params, g2);

    const auto noise = draw_noise<S>(hp_.policy, A, B, noise_rng_, normal_);
    auto ga = nn::zeros_like(actor_.params);
    const auto ar = actor_loss(actor_, q1_, q2_, batch.obs, noise, alpha, hp_.policy, hp_.bounds(), &ga);
    st.actor_loss = static_cast<double>(ar.loss);
    st.log_prob = static_cast<double>(ar.mean_log_prob);
    if (!std::isfinite(st.actor_loss)) throw NumericError("non-finite actor loss at update " + std::to_string(updates_));
    require_finite(ga, "actor");
    actor_opt_.step(actor_.params, ga);

    const auto tr = temperature_loss(log_alpha_, st.log_prob, hp_.target_entropy);
    st.alpha_loss = tr.loss;
    log_alpha_ = alpha_opt_.step(log_alpha_, tr.grad);

    nn::polyak_update(q1_.params, t1_.params, static_cast<S>(hp_.tau));
    nn::polyak_update(q2_.params, t2_.params, static_cast<S>(hp_.tau));
    st.alpha = std::exp(log_alpha_);
    ++updates_;
    return st;
  }

  // Direct access for checkpoints and tests.
  Mlp<S>& actor() { return actor_; }
  Mlp<S>& critic1() { return q1_; }
  Mlp<S>& critic2() { return q2_; }
  Mlp<S>& target1() { return t1_; }
  Mlp<S>& target2() { return t2_; }
  const Mlp<S>& actor() const { return actor_; }
  const Mlp<S>& critic1() const { return q1_; }
  const Mlp<S>& critic2() const { return q2_; }
  const Mlp<S>& target1() const { return t1_; }
  const Mlp<S>& target2() const { return t2_; }
  nn::Adam<S>& actor_optimizer() { return actor_opt_; }
  nn::Adam<S>& critic1_optimizer() { return q1_opt_; }
  nn::Adam<S>& critic2_optimizer() { return q2_opt_; }
  nn::ScalarAdam& alpha_optimizer() { return alpha_opt_; }
  std::mt19937_64& noise_rng() { return noise_rng_; }
  std::mt19937_64& replay_rng() { return replay_rng_; }
  std::normal_distribution<double>& normal() { return normal_; }
  void set_log_alpha(double v) { log_alpha_ = v; }
  void set_updates(long long n) { updates_ = n; }

 private:
  SacHyperparameters hp_;
  std::size_t obs_dim_ = 0, act_dim_ = 0;
  std::uint64_t seed_ = 0;
  Mlp<S> actor_, q1_, q2_, t1_, t2_;
  nn::Adam<S> actor_opt_, q1_opt_, q2_opt_;
  nn::ScalarAdam alpha_opt_;
  double log_alpha_ = 0.0;
  long long updates_ = 0;
  std::mt19937_64 noise_rng_, replay_rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace clusterflex::sac
