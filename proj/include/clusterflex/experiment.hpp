#pragma once

// Experiment harness behind the command-line tool: one JSON document holds
// the hub, reward, controller, agent and training settings.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "clusterflex/baseline.hpp"
#include "clusterflex/config_reader.hpp"
#include "clusterflex/env.hpp"
#include "clusterflex/format.hpp"
#include "clusterflex/hub.hpp"
#include "clusterflex/sac/checkpoint.hpp"
#include "clusterflex/seed.hpp"
#include "clusterflex/svg.hpp"

namespace clusterflex {

namespace fs = std::filesystem;

enum class Controller { rbc, sac };

inline Controller parse_controller(const std::string& s, const std::string& path) {
  if (s == "rbc") return Controller::rbc;
  if (s == "sac") return Controller::sac;
  throw ConfigError(path, "controller must be \"rbc\" or \"sac\", got '" + s + "'");
}

inline std::string to_string(Controller c) { return c == Controller::rbc ? "rbc" : "sac"; }

struct TrainSettings {
  long long episodes = 5000;
  long long checkpoint_every = 250;
  bool save_buffer = true;  // periodic and final checkpoints carry the replay buffer
};

struct ExperimentConfig {
  HubConfig hub;
  Controller controller = Controller::rbc;
  fs::path output_dir = "out";
  std::uint64_t seed = 0;
  EnvOptions env;
  std::optional<double> p_max_rbc_fraction;  // P_max as a fraction of the RBC test-day peak
  RbcConfig rbc;
  sac::SacHyperparameters sac;
  TrainSettings train;
};

inline RewardConfig parse_reward(JsonObject o, std::optional<double>& fraction) {
  RewardConfig r;
  r.w_power = o.get<double>("w_power", r.w_power);
  r.w_comfort = o.get<double>("w_comfort", r.w_comfort);
  r.w_peak = o.get<double>("w_peak", r.w_peak);
  if (o.has("p_max") && o.has("p_max_rbc_fraction"))
    throw ConfigError(o.path(), "give either p_max or p_max_rbc_fraction, not both");
  r.p_max = o.get<double>("p_max", r.p_max);
  if (o.has("p_max_rbc_fraction")) {
    fraction = o.require<double>("p_max_rbc_fraction");
    if (!(*fraction > 0.0)) throw ConfigError(o.path_of("p_max_rbc_fraction"), "must be positive");
  }
  r.comfort_low = o.get<double>("comfort_low", r.comfort_low);
  r.comfort_high = o.get<double>("comfort_high", r.comfort_high);
  r.occupied_start = o.get<double>("occupied_start", r.occupied_start);
  r.occupied_end = o.get<double>("occupied_end", r.occupied_end);
  o.finish();
  try {
    r.validate();
  } catch (const Error& e) {
    throw ConfigError(o.path(), e.what());
  }
  return r;
}

inline ExperimentConfig parse_experiment(const std::string& text, const fs::path& base_dir = {}) {
  const Json j = parse_json_text(text);
  JsonObject o(j, "");
  ExperimentConfig c;
  c.hub = parse_hub_config(o.object("hub"));
  c.hub.base_dir = base_dir;
  c.controller = parse_controller(o.get<std::string>("controller", "rbc"), o.path_of("controller"));
  c.output_dir = o.get<std::string>("output_dir", "out");
  c.seed = o.get<std::uint64_t>("seed", 0);

  if (o.has("env")) {
    auto e = o.object("env");
    if (e.has("action_mode"))
      c.env.mode = parse_action_mode(e.require<std::string>("action_mode"), e.path_of("action_mode"));
    if (e.has("action_mapping"))
      c.env.mapping = parse_action_mapping(e.require<std::string>("action_mapping"), e.path_of("action_mapping"));
    c.env.reset_sat = e.get<double>("reset_sat", c.env.reset_sat);
    c.env.reset_zone = e.get<double>("reset_zone", c.env.reset_zone);
    e.finish();
  }
  if (o.has("reward")) c.env.reward = parse_reward(o.object("reward"), c.p_max_rbc_fraction);
  if (o.has("rbc")) {
    auto r = o.object("rbc");
    c.rbc.zone_setpoint = r.get<double>("zone_setpoint", c.rbc.zone_setpoint);
    c.rbc.sat_setpoint = r.get<double>("sat_setpoint", c.rbc.sat_setpoint);
    r.finish();
  }
  if (o.has("sac")) c.sac = sac::parse_hyperparameters(o.object("sac"));
  if (o.has("train")) {
    auto t = o.object("train");
    c.train.episodes = t.get<long long>("episodes", c.train.episodes);
    c.train.checkpoint_every = t.get<long long>("checkpoint_every", c.train.checkpoint_every);
    c.train.save_buffer = t.get<bool>("save_buffer", c.train.save_buffer);
    t.finish();
    if (c.train.episodes < 1) throw ConfigError(t.path_of("episodes"), "at least one episode is required");
    if (c.train.checkpoint_every < 1) throw ConfigError(t.path_of("checkpoint_every"), "must be positive");
  }
  o.finish();
  return c;
}

inline ExperimentConfig load_experiment(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment(ss.str(), path.parent_path());
}

// ---------------------------------------------------------------- helpers

// The environment with P_max resolved. A fractional threshold is measured
// against the RBC peak on the test day, through the same environment path.
inline double resolve_p_max(const ExperimentConfig& c) {
  if (!c.p_max_rbc_fraction) return c.env.reward.p_max;
  HubConfig h = c.hub;
  h.record = false;
  ClusterEnv env(h, c.env);
  const auto s = run_rbc_episode(env, c.rbc, h.day_index(h.test_day));
  return *c.p_max_rbc_fraction * s.peak_power;
}

inline ClusterEnv make_env(const ExperimentConfig& c, double p_max, bool record) {
  HubConfig h = c.hub;
  h.record = record;
  ClusterEnv env(h, c.env);
  env.set_p_max(p_max);
  return env;
}

struct EpisodeTrace {
  EpisodeSummary summary;
  std::vector<double> hours;                    // interval start
  std::vector<RewardBreakdown> breakdown;       // per step
  std::vector<std::vector<double>> zone_temps;  // per zone, per step
  std::vector<std::string> zone_names;
};

inline std::vector<std::pair<std::size_t, std::string>> zone_outputs(const ClusterEnv& env) {
  std::vector<std::pair<std::size_t, std::string>> out;
  std::size_t offset = 0;
  for (const auto& slot : env.hub().units()) {
    const auto outs = slot.unit->metadata().outputs();
    for (std::size_t k = 0; k < outs.size(); ++k)
      if (outs[k]->role == VariableRole::zone_temperature) out.emplace_back(offset + k, slot.index + "." + outs[k]->name);
    offset += outs.size();
  }
  return out;
}

// Runs one day with `decide(observation) -> StepResult`, recording a trace.
inline EpisodeTrace run_episode(ClusterEnv& env, std::size_t day_index,
                                const std::function<StepResult(const std::vector<double>&)>& decide) {
  EpisodeTrace t;
  const auto zones = zone_outputs(env);
  for (const auto& z : zones) t.zone_names.push_back(z.second);
  t.zone_temps.resize(zones.size());
  auto obs = env.reset(0, day_index);
  while (!env.done()) {
    t.hours.push_back(env.hub().axis().hour_of_day(env.steps_done()));
    const auto r = decide(obs);
    accumulate(t.summary, r, env.reward_config().p_max);
    t.breakdown.push_back(r.info);
    for (std::size_t z = 0; z < zones.size(); ++z) t.zone_temps[z].push_back(r.raw[zones[z].first]);
    obs = r.observation;
  }
  return t;
}

inline EpisodeTrace run_rbc(ClusterEnv& env, const RbcConfig& rbc, std::size_t day_index) {
  const auto action = rbc_action(env.action_spec(), rbc);
  return run_episode(env, day_index, [&](const std::vector<double>&) { return env.step_physical(action); });
}

template <typename S>
EpisodeTrace run_agent(ClusterEnv& env, sac::SacAgent<S>& agent, std::size_t day_index) {
  return run_episode(env, day_index, [&](const std::vector<double>& obs) {
    const auto a = agent.act(obs, true);
    return env.step(a);
  });
}

inline Json summary_json(const EpisodeSummary& s, double p_max) {
  return Json{{"return", s.total_reward},
              {"peak_power_w", s.peak_power},
              {"p_max_w", p_max},
              {"comfort_penalty", s.comfort_penalty},
              {"steps", s.steps},
              {"violating_steps", s.violations},
              {"compliant_fraction", s.steps ? 1.0 - static_cast<double>(s.violations) / s.steps : 0.0}};
}

inline void write_text(const fs::path& path, const std::string& text) {
  if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

inline void write_day_charts(const fs::path& dir, const EpisodeTrace& t, const RewardConfig& rc, const std::string& who) {
  const double p_max = rc.p_max;
  const auto& pal = svg::palette();
  std::vector<double> kw;
  for (const auto& b : t.breakdown) kw.push_back(b.power / 1000.0);

  svg::Chart power{who + ": aggregate HVAC power", "hour of day", "power (kW)"};
  power.series.push_back({"cluster HVAC power", t.hours, kw, pal[0]});
  power.hlines.push_back({p_max / 1000.0, "P_max"});
  svg::write(dir / "power.svg", power);

  svg::Chart reward{who + ": reward components", "hour of day", "weighted value"};
  std::vector<double> wp, wc, wk, r;
  // Weighted components enter the reward with a minus sign; plot them as
  // contributions so they sum to the reward line.
  for (const auto& b : t.breakdown) {
    wp.push_back(-b.weighted_power(rc));
    wc.push_back(-b.weighted_comfort(rc));
    wk.push_back(-b.weighted_peak(rc));
    r.push_back(b.reward);
  }
  reward.series.push_back({"power term", t.hours, wp, pal[0]});
  reward.series.push_back({"comfort term", t.hours, wc, pal[1]});
  reward.series.push_back({"peak term", t.hours, wk, pal[2]});
  reward.series.push_back({"reward", t.hours, r, "black", true});
  svg::write(dir / "reward_breakdown.svg", reward);

  svg::Chart temps{who + ": zone temperatures", "hour of day", "temperature (degC)"};
  for (std::size_t z = 0; z < t.zone_temps.size(); ++z)
    temps.series.push_back({t.zone_names[z], t.hours, t.zone_temps[z], pal[z % pal.size()]});
  svg::write(dir / "zone_temperatures.svg", temps);
}

// ---------------------------------------------------------------- simulate

struct SimulateResult {
  EpisodeSummary summary;
  double p_max = 0.0;
  fs::path dir;
};

template <typename S = float>
sac::SacAgent<S> load_agent_for(const ClusterEnv& env, const fs::path& checkpoint) {
  return sac::load_checkpoint<S>(checkpoint, nullptr, nullptr, env.observation_size(), env.action_size());
}

inline fs::path default_checkpoint(const ExperimentConfig& c) { return c.output_dir / "train" / "checkpoint_final.bin"; }

// Runs the chosen controller over the configured simulation window and
// writes CSVs, plots and a summary under output_dir/simulate_<controller>.
inline SimulateResult cmd_simulate(const ExperimentConfig& c, Controller controller,
                                   std::optional<fs::path> checkpoint = std::nullopt) {
  SimulateResult res;
  res.p_max = resolve_p_max(c);
  auto env = make_env(c, res.p_max, true);
  const auto day = c.hub.day_index(c.hub.start);
  const auto days = static_cast<std::size_t>(c.hub.duration_days);
  res.dir = c.output_dir / ("simulate_" + to_string(controller));

  EpisodeTrace t;
  const auto zones = zone_outputs(env);
  t.zone_names.clear();
  for (const auto& z : zones) t.zone_names.push_back(z.second);
  t.zone_temps.resize(zones.size());
  std::function<StepResult(const std::vector<double>&)> decide;
  std::optional<sac::SacAgent<float>> agent;
  const auto rbc = rbc_action(env.action_spec(), c.rbc);
  if (controller == Controller::sac) {
    agent = load_agent_for(env, checkpoint.value_or(default_checkpoint(c)));
    decide = [&](const std::vector<double>& obs) { return env.step(agent->act(obs, true)); };
  } else {
    decide = [&](const std::vector<double>&) { return env.step_physical(rbc); };
  }
  auto obs = env.reset(c.seed, day, days);
  while (!env.done()) {
    t.hours.push_back(env.steps_done() * c.hub.step / 3600.0);
    const auto r = decide(obs);
    accumulate(t.summary, r, res.p_max);
    t.breakdown.push_back(r.info);
    for (std::size_t z = 0; z < zones.size(); ++z) t.zone_temps[z].push_back(r.raw[zones[z].first]);
    obs = r.observation;
  }
  env.hub().export_csv(res.dir);
  write_day_charts(res.dir, t, env.reward_config(), to_string(controller));
  write_text(res.dir / "summary.json", summary_json(t.summary, res.p_max).dump(2) + "\n");
  res.summary = t.summary;
  spdlog::info("{}: return {:.4f}, peak {:.1f} kW (P_max {:.1f} kW), {} of {} steps at or above P_max, comfort {:.4f}",
               to_string(controller), t.summary.total_reward, t.summary.peak_power / 1000.0, res.p_max / 1000.0,
               t.summary.violations, t.summary.steps, t.summary.comfort_penalty);
  return res;
}

// ---------------------------------------------------------------- train

struct EpisodeLog {
  long long episode = 0;  // 1-based
  double episode_return = 0.0;
  double alpha = 0.0;
  double logprob = 0.0;
  std::optional<double> actor_loss, critic1_loss, critic2_loss;
};

inline std::string log_header() { return "episode,return,alpha,logprob,actor_loss,critic1_loss,critic2_loss\n"; }

inline std::string log_row(const EpisodeLog& e) {
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  return std::to_string(e.episode) + ',' + format_number(e.episode_return) + ',' + format_number(e.alpha) + ',' +
         format_number(e.logprob) + ',' + opt(e.actor_loss) + ',' + opt(e.critic1_loss) + ',' + opt(e.critic2_loss) +
         '\n';
}

// Keeps the header and the rows of episodes <= `upto`.
inline std::string truncate_log(const fs::path& path, long long upto) {
  std::ifstream in(path);
  std::string out = log_header(), line;
  if (!in) return out;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const long long ep = std::stoll(line.substr(0, line.find(',')));
    if (ep <= upto) out += line + '\n';
  }
  return out;
}

struct TrainOptions {
  std::optional<fs::path> resume;
  long long episodes_override = 0;  // >0 replaces train.episodes
  std::function<void(const EpisodeLog&)> on_episode;
};

struct TrainResult {
  std::vector<EpisodeLog> log;  // episodes run in this call
  fs::path dir;
  fs::path final_checkpoint, best_checkpoint;
  double p_max = 0.0;
  bool aborted = false;
  std::string abort_reason;
};

inline void write_learning_curve(const fs::path& dir) {
  std::ifstream in(dir / "training_log.csv");
  std::string line;
  std::getline(in, line);
  std::vector<double> ep, ret, alpha, logp;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string f;
    std::vector<std::string> v;
    while (std::getline(ss, f, ',')) v.push_back(f);
    if (v.size() < 4) continue;
    ep.push_back(std::stod(v[0]));
    ret.push_back(std::stod(v[1]));
    alpha.push_back(std::stod(v[2]));
    logp.push_back(std::stod(v[3]));
  }
  // Moving average over 50 episodes.
  std::vector<double> avg(ret.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < ret.size(); ++i) {
    acc += ret[i];
    if (i >= 50) acc -= ret[i - 50];
    avg[i] = acc / static_cast<double>(std::min<std::size_t>(i + 1, 50));
  }
  const auto& pal = svg::palette();
  svg::Chart c{"Training return per episode", "episode", "daily return"};
  c.series.push_back({"episode return", ep, ret, "#9ecae1"});
  c.series.push_back({"50-episode mean", ep, avg, pal[0]});
  svg::write(dir / "learning_curve.svg", c);
  svg::Chart a{"Temperature and log-probability", "episode", "value"};
  a.series.push_back({"alpha", ep, alpha, pal[1]});
  svg::write(dir / "alpha.svg", a);
  svg::Chart l{"Mean policy log-probability", "episode", "E[log pi]"};
  l.series.push_back({"E[log pi]", ep, logp, pal[2]});
  svg::write(dir / "logprob.svg", l);
}

// SAC training on the training days, round-robin, one update per step once
// the buffer holds a full batch.
inline TrainResult cmd_train(const ExperimentConfig& c, const TrainOptions& opt = {}) {
  using Agent = sac::SacAgent<float>;
  TrainResult res;
  res.dir = c.output_dir / "train";
  fs::create_directories(res.dir);
  if (c.hub.training_days.empty()) throw ConfigError("hub.training_days", "training needs at least one day");
  res.p_max = resolve_p_max(c);
  auto env = make_env(c, res.p_max, false);
  const auto obs_dim = env.observation_size(), act_dim = env.action_size();
  if (c.env.mode != ActionMode::box) throw ConfigError("env.action_mode", "SAC needs the Box action space");

  std::vector<std::size_t> days;
  for (const auto& d : c.hub.training_days) days.push_back(c.hub.day_index(d));

  sac::TrainerState trainer;
  sac::ReplayBuffer<float> buffer(c.sac.buffer_capacity, obs_dim, act_dim);
  std::optional<Agent> agent_slot;
  std::string log_text = log_header();
  if (opt.resume) {
    agent_slot.emplace(sac::load_checkpoint<float>(*opt.resume, &trainer, &buffer, obs_dim, act_dim));
    if (!sac::checkpoint_has_buffer(*opt.resume))
      spdlog::warn("checkpoint has no replay buffer; training resumes with an empty one");
    log_text = truncate_log(res.dir / "training_log.csv", trainer.episode);
    spdlog::info("resuming after episode {}", trainer.episode);
  } else {
    agent_slot.emplace(obs_dim, act_dim, c.sac, c.seed);
  }
  Agent& agent = *agent_slot;
  trainer.extra["p_max"] = res.p_max;

  const long long episodes = opt.episodes_override > 0 ? opt.episodes_override : c.train.episodes;
  res.final_checkpoint = res.dir / "checkpoint_final.bin";
  res.best_checkpoint = res.dir / "checkpoint_best.bin";
  const auto log_path = res.dir / "training_log.csv";
  write_text(log_path, log_text);
  std::ofstream log(log_path, std::ios::binary | std::ios::app);

  const auto t0 = std::chrono::steady_clock::now();
  while (trainer.episode < episodes) {
    const Agent last_good = agent;
    const sac::TrainerState trainer_before = trainer;
    const std::size_t day = days[static_cast<std::size_t>(trainer.episode) % days.size()];
    EpisodeLog e;
    e.episode = trainer.episode + 1;
    double sum_a = 0, sum_c1 = 0, sum_c2 = 0, sum_lp = 0, act_lp = 0;
    long long n_upd = 0, n_steps = 0;
    try {
      auto obs = env.reset(c.seed, day);
      while (!env.done()) {
        double lp = 0.0;
        const auto a = agent.act(obs, false, &lp);
        act_lp += lp;
        const auto r = env.step(a);
        buffer.add(obs, a, r.reward, r.observation, r.done);
        e.episode_return += r.reward;
        obs = r.observation;
        ++n_steps;
        if (buffer.size() >= c.sac.batch_size) {
          const auto st = agent.update(agent.sample(buffer));
          sum_a += st.actor_loss;
          sum_c1 += st.critic1_loss;
          sum_c2 += st.critic2_loss;
          sum_lp += st.log_prob;
          ++n_upd;
        }
      }
    } catch (const NumericError& err) {
      res.aborted = true;
      res.abort_reason = err.what();
      const auto path = res.dir / "checkpoint_last_good.bin";
      Agent keep = last_good;
      sac::save_checkpoint(path, keep, trainer_before, nullptr);
      spdlog::error("episode {}: {}; last good state saved to {}", e.episode, err.what(), path.string());
      return res;
    }
    e.alpha = agent.alpha();
    if (n_upd > 0) {
      e.logprob = sum_lp / n_upd;
      e.actor_loss = sum_a / n_upd;
      e.critic1_loss = sum_c1 / n_upd;
      e.critic2_loss = sum_c2 / n_upd;
    } else {
      e.logprob = act_lp / static_cast<double>(std::max<long long>(n_steps, 1));
    }
    trainer.episode = e.episode;
    log << log_row(e) << std::flush;
    res.log.push_back(e);
    if (opt.on_episode) opt.on_episode(e);

    if (e.episode_return > trainer.best_return) {
      trainer.best_return = e.episode_return;
      trainer.best_episode = e.episode;
      sac::save_checkpoint(res.best_checkpoint, agent, trainer, nullptr);
    }
    if (e.episode % c.train.checkpoint_every == 0 && e.episode < episodes)
      sac::save_checkpoint(res.dir / "checkpoint_last.bin", agent, trainer, c.train.save_buffer ? &buffer : nullptr);
    if (e.episode % 10 == 0 || e.episode == episodes) {
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      spdlog::info("episode {}/{}: return {:.3f}, alpha {:.4f}, E[log pi] {:.2f} ({:.0f} s)", e.episode, episodes,
                   e.episode_return, e.alpha, e.logprob, secs);
    }
  }
  sac::save_checkpoint(res.final_checkpoint, agent, trainer, c.train.save_buffer ? &buffer : nullptr);
  log.close();
  write_learning_curve(res.dir);
  return res;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateResult {
  EpisodeSummary sac, rbc;
  double p_max = 0.0;
  fs::path dir;
};

// Deterministic test-day rollout of a checkpoint, next to the RBC baseline.
inline EvaluateResult cmd_evaluate(const ExperimentConfig& c, const fs::path& checkpoint) {
  EvaluateResult res;
  res.p_max = resolve_p_max(c);
  res.dir = c.output_dir / "evaluate";
  const auto day = c.hub.day_index(c.hub.test_day);

  auto env = make_env(c, res.p_max, true);
  auto agent = load_agent_for(env, checkpoint);
  const auto sac_trace = run_agent(env, agent, day);
  env.hub().export_csv(res.dir / "sac");
  write_day_charts(res.dir / "sac", sac_trace, env.reward_config(), "SAC");

  auto benv = make_env(c, res.p_max, true);
  const auto rbc_trace = run_rbc(benv, c.rbc, day);
  benv.hub().export_csv(res.dir / "rbc");
  write_day_charts(res.dir / "rbc", rbc_trace, benv.reward_config(), "RBC");

  std::vector<double> sk, rk;
  for (const auto& b : sac_trace.breakdown) sk.push_back(b.power / 1000.0);
  for (const auto& b : rbc_trace.breakdown) rk.push_back(b.power / 1000.0);
  const auto& pal = svg::palette();
  svg::Chart cmp{"Aggregate HVAC power: SAC vs RBC (test day)", "hour of day", "power (kW)"};
  cmp.series.push_back({"RBC", rbc_trace.hours, rk, pal[1]});
  cmp.series.push_back({"SAC", sac_trace.hours, sk, pal[0]});
  cmp.hlines.push_back({res.p_max / 1000.0, "P_max"});
  svg::write(res.dir / "comparison.svg", cmp);

  res.sac = sac_trace.summary;
  res.rbc = rbc_trace.summary;
  Json summary{{"checkpoint", checkpoint.string()},
               {"test_day", c.hub.test_day},
               {"sac", summary_json(res.sac, res.p_max)},
               {"rbc", summary_json(res.rbc, res.p_max)}};
  write_text(res.dir / "summary.json", summary.dump(2) + "\n");
  spdlog::info("SAC return {:.4f} vs RBC {:.4f}; SAC peak {:.1f} kW, {} of {} steps at or above P_max {:.1f} kW; "
               "comfort SAC {:.4f} vs RBC {:.4f}",
               res.sac.total_reward, res.rbc.total_reward, res.sac.peak_power / 1000.0, res.sac.violations,
               res.sac.steps, res.p_max / 1000.0, res.sac.comfort_penalty, res.rbc.comfort_penalty);
  return res;
}

}  // namespace clusterflex
