#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "clusterflex/sac/agent.hpp"
#include "clusterflex/sac/checkpoint.hpp"
#include "clusterflex/seed.hpp"
#include "test_support.hpp"

using namespace clusterflex;
using namespace clusterflex::sac;
using nn::Mat;

namespace {

using Row = Eigen::Matrix<double, 1, Eigen::Dynamic>;

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

Mat<double> gaussian(int rows, int cols, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  Mat<double> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

Mat<double> uniform01(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  Mat<double> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

SacHyperparameters tiny_hp(bool ln = false, PolicyKind kind = PolicyKind::gaussian_tanh) {
  SacHyperparameters hp;
  hp.hidden = {6};
  hp.layer_norm = ln;
  hp.activation = nn::Activation::tanh;  // smooth, so finite differences behave
  hp.batch_size = 8;
  hp.buffer_capacity = 1000;
  hp.policy = kind;
  return hp;
}

Batch<double> random_batch(int obs, int act, int b, std::uint64_t seed) {
  Batch<double> batch;
  batch.obs = gaussian(obs, b, seed);
  batch.action = gaussian(act, b, seed + 1, 0.5).array().tanh().matrix();
  batch.reward = gaussian(1, b, seed + 2);
  batch.next_obs = gaussian(obs, b, seed + 3);
  batch.done = Row::Zero(b);
  batch.done(0) = 1.0;
  return batch;
}

template <typename F>
void check_param_gradient(nn::MlpParams<double>& params, const nn::MlpParams<double>& grads, F loss,
                          const std::string& what, double tol = 1e-6) {
  const double h = 1e-5;
  auto p = params.tensors();
  auto g = grads.tensors();
  for (std::size_t t = 0; t < p.size(); ++t) {
    for (std::size_t i = 0; i < p[t].size(); ++i) {
      const double keep = p[t][i];
      p[t][i] = keep + h;
      const double up = loss();
      p[t][i] = keep - h;
      const double down = loss();
      p[t][i] = keep;
      const double fd = (up - down) / (2 * h);
      ASSERT_NEAR(g[t][i], fd, tol * std::max(1.0, std::abs(fd))) << what << " tensor " << t << " index " << i;
    }
  }
}

void fill_buffer(ReplayBuffer<double>& buf, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> s(buf.obs_dim()), a(buf.act_dim()), s2(buf.obs_dim());
  for (std::size_t k = 0; k < n; ++k) {
    for (auto& x : s) x = g(rng);
    for (auto& x : a) x = std::tanh(g(rng));
    for (auto& x : s2) x = g(rng);
    buf.add(s, a, g(rng), s2, k % 17 == 16);
  }
}

}  // namespace

// ---------------------------------------------------------------- policy

TEST(Policy, ZeroHeadZeroNoiseLogProb) {
  const int A = 24;
  const Mat<double> head = Mat<double>::Zero(2 * A, 1);
  const Mat<double> noise = Mat<double>::Zero(A, 1);
  const auto s = policy_sample(PolicyKind::gaussian_tanh, head, noise, PolicyBounds{});
  EXPECT_TRUE(s.action.isZero());
  const double expected = A * (-kHalfLog2Pi - std::log(1.0 + kTanhJacobianEps));
  EXPECT_NEAR(s.log_prob(0), expected, 1e-12);
  EXPECT_NEAR(s.log_prob(0), -22.054, 1e-3);
}

TEST(Policy, LogStdIsClamped) {
  Mat<double> head(4, 1);
  head << 0.0, 0.0, 5.0, -25.0;
  const Mat<double> noise = Mat<double>::Zero(2, 1);
  const auto s = policy_sample(PolicyKind::gaussian, head, noise, PolicyBounds{});
  EXPECT_DOUBLE_EQ(s.log_std(0, 0), 3.0);
  EXPECT_DOUBLE_EQ(s.log_std(1, 0), -20.0);
  EXPECT_EQ(s.clamp_mask(0, 0), 0.0);
  EXPECT_EQ(s.clamp_mask(1, 0), 0.0);
  // no gradient flows through a clamped log std
  const auto dh = policy_backward(PolicyKind::gaussian, s, Mat<double>(Mat<double>::Ones(2, 1)), Row(Row::Ones(1)));
  EXPECT_EQ(dh(2, 0), 0.0);
  EXPECT_EQ(dh(3, 0), 0.0);
}

TEST(Policy, LogProbRisesAsSigmaShrinks) {
  double prev = -1e300;
  for (double ls = 2.0; ls >= -6.0; ls -= 0.5) {
    Mat<double> head(2, 1);
    head << 0.2, ls;
    const auto s = policy_sample(PolicyKind::gaussian_tanh, head, Mat<double>(Mat<double>::Zero(1, 1)), PolicyBounds{});
    EXPECT_GT(s.log_prob(0), prev);
    prev = s.log_prob(0);
  }
}

TEST(Policy, TanhLogProbIdentity) {
  const int A = 5, B = 40;
  const auto head = gaussian(2 * A, B, 1);
  const auto noise = gaussian(A, B, 2);
  const auto s = policy_sample(PolicyKind::gaussian_tanh, head, noise, PolicyBounds{});
  for (int j = 0; j < B; ++j) {
    // long double reference: 1 - a*a cancels badly in double once |u| is large
    long double lp = 0.0L;
    for (int i = 0; i < A; ++i) {
      const long double mu = head(i, j), sigma = std::exp(static_cast<long double>(head(A + i, j)));
      const long double u = mu + sigma * noise(i, j);
      const long double z = (u - mu) / sigma;
      const long double a = std::tanh(u);
      lp += -0.5L * z * z - std::log(sigma) - kHalfLog2Pi - std::log(1.0L - a * a + kTanhJacobianEps);
      ASSERT_NEAR(s.action(i, j), static_cast<double>(a), 1e-15);
    }
    EXPECT_NEAR(s.log_prob(j), static_cast<double>(lp), 1e-10);
  }
}

TEST(Policy, TanhDensityMatchesMonteCarloHistogram) {
  const double mu = 0.4, log_sigma = std::log(0.8);
  const int N = 400000;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat<double> head(2, N);
  head.row(0).setConstant(mu);
  head.row(1).setConstant(log_sigma);
  const auto noise = draw_noise<double>(PolicyKind::gaussian_tanh, 1, N, rng, normal);
  const auto s = policy_sample(PolicyKind::gaussian_tanh, head, noise, PolicyBounds{});

  const int bins = 20;
  std::vector<double> freq(bins, 0.0);
  for (int j = 0; j < N; ++j) {
    const int b = std::min(bins - 1, static_cast<int>((s.action(0, j) + 1.0) / 2.0 * bins));
    freq[b] += 1.0 / N;
  }
  // density from the policy's own log-prob, integrated per bin
  auto density = [&](double a) {
    Mat<double> h1(2, 1);
    h1 << mu, log_sigma;
    Mat<double> e(1, 1);
    e << (std::atanh(a) - mu) / std::exp(log_sigma);
    return std::exp(policy_sample(PolicyKind::gaussian_tanh, h1, e, PolicyBounds{}).log_prob(0));
  };
  for (int b = 0; b < bins; ++b) {
    const double lo = -1.0 + 2.0 * b / bins, hi = lo + 2.0 / bins;
    double mass = 0.0;
    const int sub = 200;
    for (int k = 0; k < sub; ++k) mass += density(lo + (k + 0.5) * (hi - lo) / sub) * (hi - lo) / sub;
    EXPECT_NEAR(freq[b], mass, 0.004) << "bin " << b;
  }
}

TEST(Policy, DeterministicActionIsTanhMean) {
  Mat<double> head(4, 1);
  head << 0.3, -2.0, 1.0, 1.0;
  const auto a = deterministic_action(PolicyKind::gaussian_tanh, head);
  EXPECT_DOUBLE_EQ(a(0, 0), std::tanh(0.3));
  EXPECT_DOUBLE_EQ(a(1, 0), std::tanh(-2.0));
}

TEST(Policy, BetaSamplesStayInsideAndMatchMean) {
  const int N = 20000;
  Mat<double> head(2, N);
  head.row(0).setConstant(1.0);
  head.row(1).setConstant(0.0);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  const auto noise = draw_noise<double>(PolicyKind::beta, 1, N, rng, normal);
  const auto s = policy_sample(PolicyKind::beta, head, noise, PolicyBounds{});
  EXPECT_LT(s.action.cwiseAbs().maxCoeff(), 1.0);
  const double a = softplus(1.0) + 1.0, b = softplus(0.0) + 1.0;
  EXPECT_NEAR(s.action.mean(), 2.0 * a / (a + b) - 1.0, 0.01);
  EXPECT_NEAR(deterministic_action(PolicyKind::beta, Mat<double>(head.col(0)))(0, 0), 2.0 * a / (a + b) - 1.0, 1e-12);
}

TEST(Policy, ParseRoundTrips) {
  for (auto k : {PolicyKind::gaussian_tanh, PolicyKind::gaussian, PolicyKind::beta})
    EXPECT_EQ(parse_policy(to_string(k)), k);
  EXPECT_THROW(parse_policy("cauchy"), Error);
}

// ---------------------------------------------------------------- critic target

TEST(CriticTarget, TerminalTransitionsUseRewardOnly) {
  const auto hp = tiny_hp();
  SacAgent<double> agent(3, 2, hp, 1);
  auto batch = random_batch(3, 2, 6, 10);
  batch.done.setOnes();
  const auto t = critic_target(batch, agent.actor(), agent.target1(), agent.target2(), 0.7, 0.99,
                               gaussian(2, 6, 11), hp.policy, hp.bounds());
  for (int j = 0; j < 6; ++j) EXPECT_DOUBLE_EQ(t.y(j), batch.reward(j));
}

TEST(CriticTarget, MatchesHandComputation) {
  const auto hp = tiny_hp();
  SacAgent<double> agent(3, 2, hp, 2);
  const auto batch = random_batch(3, 2, 9, 20);
  const auto noise = gaussian(2, 9, 21);
  const double alpha = 0.3, gamma = 0.95;
  const auto t = critic_target(batch, agent.actor(), agent.target1(), agent.critic2(), alpha, gamma, noise, hp.policy,
                               hp.bounds());
  const auto s = policy_sample(hp.policy, agent.actor().forward(batch.next_obs), noise, hp.bounds());
  const auto sa = stack_rows(batch.next_obs, s.action);
  const Row q1 = agent.target1().forward(sa), q2 = agent.critic2().forward(sa);
  for (int j = 0; j < 9; ++j) {
    const double y = batch.reward(j) + gamma * (1.0 - batch.done(j)) * (std::min(q1(j), q2(j)) - alpha * s.log_prob(j));
    EXPECT_NEAR(t.y(j), y, 1e-12);
    EXPECT_LE(std::min(t.q1(j), t.q2(j)), std::max(t.q1(j), t.q2(j)));
  }
}

TEST(CriticTarget, MinNeverExceedsEitherCritic) {
  const auto hp = tiny_hp();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SacAgent<double> a(3, 2, hp, seed), b(3, 2, hp, seed + 100);
    const auto batch = random_batch(3, 2, 16, seed);
    const auto noise = gaussian(2, 16, seed + 7);
    const auto t = critic_target(batch, a.actor(), a.target1(), b.target1(), 0.0, 0.9, noise, hp.policy, hp.bounds());
    // with alpha = 0: y <= r + gamma (1 - d) Q_j for both critics
    for (int j = 0; j < 16; ++j) {
      const double cont = 0.9 * (1.0 - batch.done(j));
      EXPECT_LE(t.y(j), batch.reward(j) + cont * t.q1(j) + 1e-12);
      EXPECT_LE(t.y(j), batch.reward(j) + cont * t.q2(j) + 1e-12);
    }
  }
}

TEST(CriticTarget, DegenerateCriticsGiveDiscountedSum) {
  // Identical zero critics: y = r - gamma alpha log pi for non-terminal samples.
  const auto hp = tiny_hp();
  SacAgent<double> agent(3, 2, hp, 4);
  auto zero = agent.critic1();
  zero.params.set_zero();
  const auto batch = random_batch(3, 2, 5, 30);
  const auto noise = gaussian(2, 5, 31);
  const auto t = critic_target(batch, agent.actor(), zero, zero, 0.5, 0.9, noise, hp.policy, hp.bounds());
  for (int j = 0; j < 5; ++j)
    EXPECT_NEAR(t.y(j), batch.reward(j) - (1.0 - batch.done(j)) * 0.9 * 0.5 * t.next_log_prob(j), 1e-12);
}

// ---------------------------------------------------------------- losses

TEST(CriticLoss, ZeroWhenPredictionEqualsTarget) {
  const auto hp = tiny_hp();
  SacAgent<double> agent(3, 2, hp, 3);
  const auto batch = random_batch(3, 2, 7, 40);
  const auto sa = stack_rows(batch.obs, batch.action);
  const Row y = agent.critic1().forward(sa);
  auto g = nn::zeros_like(agent.critic1().params);
  EXPECT_EQ(critic_loss(agent.critic1(), sa, y, &g), 0.0);
  for (auto t : g.tensors())
    for (double v : t) EXPECT_EQ(v, 0.0);
}

TEST(Gradients, CriticActorTemperatureMatchFiniteDifferences) {
  int nets = 0;
  for (std::uint64_t seed = 0; seed < 24; ++seed) {
    const bool ln = seed % 2 == 1;
    const auto kind = seed % 3 == 2 ? PolicyKind::gaussian : PolicyKind::gaussian_tanh;
    auto hp = tiny_hp(ln, kind);
    SacAgent<double> agent(3, 2, hp, seed);
    const auto batch = random_batch(3, 2, 6, 1000 + seed);
    const auto sa = stack_rows(batch.obs, batch.action);
    const Row y = gaussian(1, 6, 2000 + seed);

    auto& q = agent.critic1();
    auto gq = nn::zeros_like(q.params);
    critic_loss(q, sa, y, &gq);
    check_param_gradient(q.params, gq, [&] { return critic_loss(q, sa, y, nullptr); }, "critic");

    const auto noise = gaussian(2, 6, 3000 + seed);
    const double alpha = 0.2 + 0.1 * static_cast<double>(seed % 5);
    auto& actor = agent.actor();
    auto ga = nn::zeros_like(actor.params);
    actor_loss(actor, agent.critic1(), agent.critic2(), batch.obs, noise, alpha, kind, hp.bounds(), &ga);
    check_param_gradient(
        actor.params, ga,
        [&] {
          return actor_loss(actor, agent.critic1(), agent.critic2(), batch.obs, noise, alpha, kind, hp.bounds(),
                            nullptr)
              .loss;
        },
        "actor");

    const double m = gaussian(1, 1, 4000 + seed)(0, 0), H = -2.0;
    const double la = 0.1 * static_cast<double>(seed) - 1.0;
    const double fd =
        (temperature_loss(la + 1e-5, m, H).loss - temperature_loss(la - 1e-5, m, H).loss) / 2e-5;
    EXPECT_NEAR(temperature_loss(la, m, H).grad, fd, 1e-8);
    ++nets;
  }
  EXPECT_GE(nets, 20);
}

TEST(Gradients, BetaActorMatchesFiniteDifferences) {
  auto hp = tiny_hp(false, PolicyKind::beta);
  SacAgent<double> agent(3, 2, hp, 5);
  const auto batch = random_batch(3, 2, 4, 77);
  const auto noise = uniform01(2, 4, 78);
  auto& actor = agent.actor();
  auto ga = nn::zeros_like(actor.params);
  actor_loss(actor, agent.critic1(), agent.critic2(), batch.obs, noise, 0.4, PolicyKind::beta, hp.bounds(), &ga);
  check_param_gradient(
      actor.params, ga,
      [&] {
        return actor_loss(actor, agent.critic1(), agent.critic2(), batch.obs, noise, 0.4, PolicyKind::beta,
                          hp.bounds(), nullptr)
            .loss;
      },
      "beta actor", 1e-4);
}

TEST(CriticLoss, OverfitsOneBatch) {
  auto hp = tiny_hp();
  hp.hidden = {32, 32};
  SacAgent<double> agent(3, 2, hp, 8);
  const auto batch = random_batch(3, 2, 16, 50);
  const auto sa = stack_rows(batch.obs, batch.action);
  auto& q = agent.critic1();
  nn::Adam<double> opt(q.params, {.lr = 1e-2});
  const double start = critic_loss(q, sa, batch.reward, nullptr);
  for (int k = 0; k < 1500; ++k) {
    auto g = nn::zeros_like(q.params);
    critic_loss(q, sa, batch.reward, &g);
    opt.step(q.params, g);
  }
  EXPECT_LT(critic_loss(q, sa, batch.reward, nullptr), 1e-3 * start);
}

TEST(ActorLoss, ConstantCriticsAndZeroAlphaGiveZeroGradient) {
  const auto hp = tiny_hp();
  SacAgent<double> agent(3, 2, hp, 9);
  auto flat = agent.critic1();
  flat.params.set_zero();
  flat.params.layers.back().bias(0) = 4.0;
  const auto batch = random_batch(3, 2, 8, 60);
  auto g = nn::zeros_like(agent.actor().params);
  const auto r = actor_loss(agent.actor(), flat, flat, batch.obs, gaussian(2, 8, 61), 0.0, hp.policy, hp.bounds(), &g);
  EXPECT_DOUBLE_EQ(r.loss, -4.0);
  for (auto t : g.tensors())
    for (double v : t) EXPECT_EQ(v, 0.0);
}

TEST(ActorLoss, LargeAlphaIncreasesEntropy) {
  auto hp = tiny_hp();
  SacAgent<double> agent(3, 2, hp, 10);
  // start from a concentrated policy
  agent.actor().params.layers.back().bias.tail(2).setConstant(-3.0);
  auto flat = agent.critic1();
  flat.params.set_zero();
  const auto obs = gaussian(3, 32, 70);
  nn::Adam<double> opt(agent.actor().params, {.lr = 1e-2});
  const auto noise0 = gaussian(2, 32, 71);
  const double before =
      actor_loss(agent.actor(), flat, flat, obs, noise0, 10.0, hp.policy, hp.bounds(), nullptr).mean_log_prob;
  for (int k = 0; k < 200; ++k) {
    auto g = nn::zeros_like(agent.actor().params);
    actor_loss(agent.actor(), flat, flat, obs, gaussian(2, 32, 100 + k), 10.0, hp.policy, hp.bounds(), &g);
    opt.step(agent.actor().params, g);
  }
  const double after =
      actor_loss(agent.actor(), flat, flat, obs, noise0, 10.0, hp.policy, hp.bounds(), nullptr).mean_log_prob;
  EXPECT_LT(after, before - 1.0);
}

TEST(TemperatureLoss, SignDrivesAlphaTowardTarget) {
  // entropy below target (log pi too high): alpha must grow
  const auto low = temperature_loss(0.0, 5.0, -2.0);
  EXPECT_LT(low.grad, 0.0);
  nn::ScalarAdam opt;
  EXPECT_GT(opt.step(0.0, low.grad), 0.0);
  // entropy above target: alpha must shrink
  const auto high = temperature_loss(0.0, -5.0, -2.0);
  EXPECT_GT(high.grad, 0.0);
  nn::ScalarAdam opt2;
  EXPECT_LT(opt2.step(0.0, high.grad), 0.0);
  EXPECT_DOUBLE_EQ(temperature_loss(std::log(2.0), 1.0, -3.0).loss, -std::log(2.0) * (1.0 - 3.0));
}

// ---------------------------------------------------------------- replay

TEST(Replay, EvictsOldestFirst) {
  ReplayBuffer<double> buf(3, 1, 1);
  for (int k = 0; k < 5; ++k) {
    const std::vector<double> s{double(k)}, a{0.0}, s2{double(k + 1)};
    buf.add(s, a, 10.0 * k, s2, false);
  }
  EXPECT_EQ(buf.size(), 3u);
  EXPECT_EQ(buf.cursor(), 2u);
  EXPECT_EQ(buf.total_added(), 5u);
  const std::vector<std::size_t> idx{0, 1, 2};
  const auto b = buf.gather(idx);
  EXPECT_EQ(b.reward(0), 30.0);
  EXPECT_EQ(b.reward(1), 40.0);
  EXPECT_EQ(b.reward(2), 20.0);
}

TEST(Replay, ShapeAndRangeChecks) {
  ReplayBuffer<double> buf(4, 2, 1);
  const std::vector<double> s{0, 0}, a{0}, bad{0};
  EXPECT_THROW(buf.add(bad, a, 0, s, false), ShapeError);
  std::mt19937_64 rng(0);
  EXPECT_THROW(buf.sample(1, rng), Error);
  buf.add(s, a, 0, s, true);
  const std::vector<std::size_t> idx{1};
  EXPECT_THROW(buf.gather(idx), RangeError);
  EXPECT_EQ(buf.sample(3, rng).done(2), 1.0);
  EXPECT_THROW(ReplayBuffer<double>(0, 1, 1), RangeError);
}

// ---------------------------------------------------------------- agent

TEST(Agent, SameSeedSameUpdates) {
  const auto hp = tiny_hp(true);
  ReplayBuffer<double> buf(1000, 3, 2);
  fill_buffer(buf, 200, 1);
  SacAgent<double> a(3, 2, hp, 42), b(3, 2, hp, 42);
  for (int k = 0; k < 10; ++k) {
    const auto sa = a.update(a.sample(buf));
    const auto sb = b.update(b.sample(buf));
    ASSERT_EQ(sa.critic1_loss, sb.critic1_loss);
    ASSERT_EQ(sa.alpha, sb.alpha);
  }
  EXPECT_EQ(a.actor().params.layers[0].weight, b.actor().params.layers[0].weight);
  const std::vector<double> obs{0.1, 0.2, 0.3};
  EXPECT_EQ(a.act(obs, false), b.act(obs, false));
  SacAgent<double> c(3, 2, hp, 43);
  EXPECT_NE(a.actor().params.layers[0].weight, c.actor().params.layers[0].weight);
}

TEST(Agent, ComponentSeedsAreDerived) {
  const auto hp = tiny_hp();
  SacAgent<double> agent(3, 2, hp, 7);
  const auto direct = nn::init_mlp<double>(hp.shape(3, 4), hp.init, derive_seed(7, seed_stream::actor_init));
  EXPECT_EQ(agent.actor().params.layers[0].weight, direct.layers[0].weight);
  EXPECT_EQ(agent.target1().params.layers[0].weight, agent.critic1().params.layers[0].weight);
  EXPECT_NE(agent.critic1().params.layers[0].weight, agent.critic2().params.layers[0].weight);
}

TEST(Agent, ActChecksObservation) {
  SacAgent<double> agent(3, 2, tiny_hp(), 1);
  EXPECT_THROW(agent.act(std::vector<double>{1.0, 2.0}, true), ShapeError);
  EXPECT_THROW(agent.act(std::vector<double>{1.0, std::nan(""), 2.0}, true), NumericError);
  for (double v : agent.act(std::vector<double>{1.0, 2.0, 3.0}, false)) {
    EXPECT_GT(v, -1.0);
    EXPECT_LT(v, 1.0);
  }
}

TEST(Agent, HyperparametersValidated) {
  auto hp = tiny_hp();
  hp.gamma = 1.0;
  EXPECT_THROW(SacAgent<double>(3, 2, hp, 0), RangeError);
  hp = tiny_hp();
  hp.batch_size = 2000;
  EXPECT_THROW(SacAgent<double>(3, 2, hp, 0), RangeError);
}

TEST(Checkpoint, RoundTripAndResumeIdentical) {
  const auto dir = testing_support::scratch_dir("sac_checkpoint");
  const auto hp = tiny_hp(true);
  ReplayBuffer<double> buf(1000, 3, 2);
  fill_buffer(buf, 150, 2);
  SacAgent<double> agent(3, 2, hp, 5);
  for (int k = 0; k < 6; ++k) agent.update(agent.sample(buf));
  TrainerState ts;
  ts.episode = 12;
  ts.best_return = 3.5;
  ts.best_episode = 9;
  save_checkpoint(dir / "a.bin", agent, ts, &buf);

  TrainerState ts2;
  ReplayBuffer<double> buf2;
  auto loaded = load_checkpoint<double>(dir / "a.bin", &ts2, &buf2);
  EXPECT_EQ(ts2.episode, 12);
  EXPECT_EQ(ts2.best_return, 3.5);
  EXPECT_EQ(ts2.best_episode, 9);
  EXPECT_EQ(buf2.size(), buf.size());
  EXPECT_EQ(buf2.cursor(), buf.cursor());
  EXPECT_EQ(buf2.rewards(), buf.rewards());
  EXPECT_EQ(loaded.log_alpha(), agent.log_alpha());
  EXPECT_EQ(loaded.updates(), agent.updates());
  for (int k = 0; k < 6; ++k) {
    const auto a = agent.update(agent.sample(buf));
    const auto b = loaded.update(loaded.sample(buf2));
    ASSERT_EQ(a.critic1_loss, b.critic1_loss) << k;
    ASSERT_EQ(a.actor_loss, b.actor_loss) << k;
    ASSERT_EQ(a.alpha, b.alpha) << k;
  }
  EXPECT_EQ(agent.target2().params.layers[1].weight, loaded.target2().params.layers[1].weight);
  const std::vector<double> obs{0.5, -0.5, 0.0};
  EXPECT_EQ(agent.act(obs, false), loaded.act(obs, false));
}

TEST(Checkpoint, DimensionMismatchIsShapeError) {
  const auto dir = testing_support::scratch_dir("sac_checkpoint_dims");
  SacAgent<double> agent(3, 2, tiny_hp(), 5);
  save_checkpoint<double>(dir / "a.bin", agent, TrainerState{}, nullptr);
  EXPECT_FALSE(checkpoint_has_buffer(dir / "a.bin"));
  EXPECT_THROW(load_checkpoint<double>(dir / "a.bin", nullptr, nullptr, 53, 24), ShapeError);
  EXPECT_THROW(load_checkpoint<float>(dir / "a.bin", nullptr, nullptr), Error);
  EXPECT_NO_THROW(load_checkpoint<double>(dir / "a.bin", nullptr, nullptr, 3, 2));
  testing_support::write_file(dir / "junk.bin", "not a checkpoint");
  EXPECT_THROW(load_checkpoint<double>(dir / "junk.bin", nullptr, nullptr), Error);
}

TEST(Agent, TemperaturePullsEntropyToTarget) {
  // One-step bandit with reward -(a - 0.3)^2. The temperature should settle
  // where the policy's mean log-prob equals minus the target entropy.
  auto hp = tiny_hp();
  hp.hidden = {32};
  hp.batch_size = 64;
  hp.gamma = 0.5;
  hp.lr_actor = 1e-3;
  hp.lr_critic = 1e-3;
  hp.lr_alpha = 3e-3;
  hp.target_entropy = -1.0;
  SacAgent<double> agent(1, 1, hp, 3);
  ReplayBuffer<double> buf(5000, 1, 1);
  const std::vector<double> s{0.0};
  std::vector<double> lp;
  for (int k = 0; k < 4000; ++k) {
    const auto a = agent.act(s, false);
    buf.add(s, a, -(a[0] - 0.3) * (a[0] - 0.3), s, true);
    if (buf.size() >= 64) lp.push_back(agent.update(agent.sample(buf)).log_prob);
  }
  double tail = 0.0;
  for (std::size_t i = lp.size() - 500; i < lp.size(); ++i) tail += lp[i] / 500.0;
  EXPECT_NEAR(tail, 1.0, 0.3);
}
