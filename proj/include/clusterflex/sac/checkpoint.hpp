#pragma once

// Checkpoint file layout:
//   8 bytes   magic "CFXCKPT\n"
//   8 bytes   header length n (little-endian uint64)
//   n bytes   JSON header: version, scalar type, hyperparameters, dims,
//             counters, log alpha, optimizer scalars, RNG states, and the
//             element count of every array that follows
//   arrays    raw scalars, in header order
//
// Everything that influences the next update is stored, so a resumed run
// continues the same trajectory as an uninterrupted one. The replay buffer
// is optional; without it a resumed run is valid but no longer identical.

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "clusterflex/config_reader.hpp"
#include "clusterflex/sac/agent.hpp"

namespace clusterflex::sac {

inline constexpr char kCheckpointMagic[8] = {'C', 'F', 'X', 'C', 'K', 'P', 'T', '\n'};
inline constexpr int kCheckpointVersion = 1;

template <typename S>
constexpr const char* scalar_name() {
  if constexpr (std::is_same_v<S, float>) return "float32";
  else return "float64";
}

// ---------------------------------------------------------------- hyperparameters

inline Json to_json(const SacHyperparameters& hp) {
  return Json{{"gamma", hp.gamma},
              {"tau", hp.tau},
              {"target_entropy", hp.target_entropy},
              {"lr_actor", hp.lr_actor},
              {"lr_critic", hp.lr_critic},
              {"lr_alpha", hp.lr_alpha},
              {"buffer_capacity", hp.buffer_capacity},
              {"batch_size", hp.batch_size},
              {"hidden", hp.hidden},
              {"activation", nn::to_string(hp.activation)},
              {"leaky_slope", hp.leaky_slope},
              {"init", nn::to_string(hp.init)},
              {"layer_norm", hp.layer_norm},
              {"log_std_min", hp.log_std_min},
              {"log_std_max", hp.log_std_max},
              {"policy", to_string(hp.policy)},
              {"initial_alpha", hp.initial_alpha}};
}

// Missing keys keep their defaults; unknown keys are errors.
inline SacHyperparameters parse_hyperparameters(JsonObject o) {
  SacHyperparameters hp;
  // enum-valued keys: re-raise parser errors with the key path attached
  auto choice = [&](const char* key, auto parse, auto& dst) {
    if (!o.has(key)) return;
    const auto text = o.require<std::string>(key);
    try {
      dst = parse(text);
    } catch (const Error& e) {
      throw ConfigError(o.path_of(key), e.what());
    }
  };
  hp.gamma = o.get<double>("gamma", hp.gamma);
  hp.tau = o.get<double>("tau", hp.tau);
  hp.target_entropy = o.get<double>("target_entropy", hp.target_entropy);
  hp.lr_actor = o.get<double>("lr_actor", hp.lr_actor);
  hp.lr_critic = o.get<double>("lr_critic", hp.lr_critic);
  hp.lr_alpha = o.get<double>("lr_alpha", hp.lr_alpha);
  hp.buffer_capacity = o.get<std::size_t>("buffer_capacity", hp.buffer_capacity);
  hp.batch_size = o.get<std::size_t>("batch_size", hp.batch_size);
  hp.hidden = o.get<std::vector<int>>("hidden", hp.hidden);
  choice("activation", nn::parse_activation, hp.activation);
  hp.leaky_slope = o.get<double>("leaky_slope", hp.leaky_slope);
  choice("init", nn::parse_init, hp.init);
  hp.layer_norm = o.get<bool>("layer_norm", hp.layer_norm);
  hp.log_std_min = o.get<double>("log_std_min", hp.log_std_min);
  hp.log_std_max = o.get<double>("log_std_max", hp.log_std_max);
  choice("policy", parse_policy, hp.policy);
  hp.initial_alpha = o.get<double>("initial_alpha", hp.initial_alpha);
  o.finish();
  try {
    hp.validate();
  } catch (const Error& e) {
    throw ConfigError(o.path(), e.what());
  }
  return hp;
}

// ---------------------------------------------------------------- state

// Bookkeeping owned by the training loop that must survive a resume.
struct TrainerState {
  long long episode = 0;  // completed episodes
  double best_return = -1e300;
  long long best_episode = -1;
  Json extra = Json::object();
};

template <typename T>
std::string stream_state(const T& x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

template <typename T>
void restore_state(T& x, const std::string& s, const std::string& what) {
  std::istringstream is(s);
  is >> x;
  if (!is) throw Error("checkpoint: corrupt " + what + " state");
}

namespace detail {

template <typename S>
void append_params(std::vector<std::span<const S>>& arrays, Json& names, const std::string& prefix,
                   const MlpParams<S>& p) {
  std::size_t k = 0;
  for (auto t : p.tensors()) {
    arrays.push_back(t);
    names.push_back({{"name", prefix + "." + std::to_string(k++)}, {"count", t.size()}});
  }
}

inline void write_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

inline std::uint64_t read_u64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw Error("checkpoint: truncated file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

template <typename S>
void read_into(std::istream& in, std::span<S> dst, const Json& entry, const std::string& expect_name) {
  if (entry.at("name").get<std::string>() != expect_name || entry.at("count").get<std::size_t>() != dst.size())
    throw Error("checkpoint: array '" + expect_name + "' has an unexpected layout");
  if (!in.read(reinterpret_cast<char*>(dst.data()), static_cast<std::streamsize>(dst.size() * sizeof(S))))
    throw Error("checkpoint: truncated array '" + expect_name + "'");
}

template <typename S>
std::vector<S> read_vector(std::istream& in, const Json& entry, const std::string& expect_name) {
  std::vector<S> v(entry.at("count").get<std::size_t>());
  read_into<S>(in, std::span<S>(v), entry, expect_name);
  return v;
}

}  // namespace detail

template <typename S>
void save_checkpoint(const std::filesystem::path& path, SacAgent<S>& agent, const TrainerState& trainer,
                     std::type_identity_t<const ReplayBuffer<S>*> buffer) {
  std::vector<std::span<const S>> arrays;
  Json layout = Json::array();
  detail::append_params<S>(arrays, layout, "actor", agent.actor().params);
  detail::append_params<S>(arrays, layout, "critic1", agent.critic1().params);
  detail::append_params<S>(arrays, layout, "critic2", agent.critic2().params);
  detail::append_params<S>(arrays, layout, "target1", agent.target1().params);
  detail::append_params<S>(arrays, layout, "target2", agent.target2().params);
  detail::append_params<S>(arrays, layout, "actor_adam_m", agent.actor_optimizer().m);
  detail::append_params<S>(arrays, layout, "actor_adam_v", agent.actor_optimizer().v);
  detail::append_params<S>(arrays, layout, "critic1_adam_m", agent.critic1_optimizer().m);
  detail::append_params<S>(arrays, layout, "critic1_adam_v", agent.critic1_optimizer().v);
  detail::append_params<S>(arrays, layout, "critic2_adam_m", agent.critic2_optimizer().m);
  detail::append_params<S>(arrays, layout, "critic2_adam_v", agent.critic2_optimizer().v);

  Json buf = nullptr;
  if (buffer) {
    auto add = [&](const std::vector<S>& v, const char* name) {
      arrays.emplace_back(v.data(), v.size());
      layout.push_back({{"name", std::string("buffer.") + name}, {"count", v.size()}});
    };
    add(buffer->observations(), "obs");
    add(buffer->actions(), "action");
    add(buffer->rewards(), "reward");
    add(buffer->next_observations(), "next_obs");
    add(buffer->dones(), "done");
    buf = {{"capacity", buffer->capacity()},
           {"size", buffer->size()},
           {"cursor", buffer->cursor()},
           {"total_added", buffer->total_added()}};
  }

  const auto& as = agent.alpha_optimizer();
  Json header{{"version", kCheckpointVersion},
              {"scalar", scalar_name<S>()},
              {"endian", "little"},
              {"obs_dim", agent.obs_dim()},
              {"act_dim", agent.act_dim()},
              {"seed", agent.seed()},
              {"hyperparameters", to_json(agent.hyperparameters())},
              {"updates", agent.updates()},
              {"log_alpha", agent.log_alpha()},
              {"adam_t",
               {{"actor", agent.actor_optimizer().t},
                {"critic1", agent.critic1_optimizer().t},
                {"critic2", agent.critic2_optimizer().t}}},
              {"alpha_adam", {{"m", as.m}, {"v", as.v}, {"t", as.t}}},
              {"rng",
               {{"noise", stream_state(agent.noise_rng())},
                {"replay", stream_state(agent.replay_rng())},
                {"normal", stream_state(agent.normal())}}},
              {"trainer",
               {{"episode", trainer.episode},
                {"best_return", trainer.best_return},
                {"best_episode", trainer.best_episode},
                {"extra", trainer.extra}}},
              {"buffer", buf},
              {"arrays", layout}};

  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  // Write to a sibling and rename, so a crash never leaves a torn checkpoint.
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write checkpoint " + tmp.string());
    const std::string text = header.dump();
    out.write(kCheckpointMagic, 8);
    detail::write_u64(out, text.size());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (auto a : arrays) out.write(reinterpret_cast<const char*>(a.data()), static_cast<std::streamsize>(a.size() * sizeof(S)));
    if (!out) throw Error("failed writing checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline Json read_checkpoint_header(std::istream& in, const std::string& where) {
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kCheckpointMagic, 8) != 0)
    throw Error(where + " is not a checkpoint file");
  const auto n = detail::read_u64(in);
  if (n > (1u << 30)) throw Error(where + ": implausible header length");
  std::string text(n, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(n))) throw Error(where + ": truncated header");
  Json h;
  try {
    h = Json::parse(text);
  } catch (const Json::exception& e) {
    throw Error(where + ": corrupt header: " + e.what());
  }
  if (h.value("version", 0) != kCheckpointVersion)
    throw Error(where + ": unsupported checkpoint version " + std::to_string(h.value("version", 0)));
  return h;
}

// Header only, for inspection and dimension checks.
inline Json peek_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  return read_checkpoint_header(in, path.string());
}

// Rebuilds an agent. When `expected_obs`/`expected_act` are non-zero, a
// dimension mismatch is reported against them before anything is read.
template <typename S>
SacAgent<S> load_checkpoint(const std::filesystem::path& path, TrainerState* trainer, ReplayBuffer<S>* buffer,
                            std::size_t expected_obs = 0, std::size_t expected_act = 0) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  const std::string where = path.string();
  const Json h = read_checkpoint_header(in, where);
  if (h.at("scalar").get<std::string>() != scalar_name<S>())
    throw Error(where + ": stored as " + h.at("scalar").get<std::string>() + ", requested " + scalar_name<S>());
  const auto obs = h.at("obs_dim").get<std::size_t>(), act = h.at("act_dim").get<std::size_t>();
  if ((expected_obs && obs != expected_obs) || (expected_act && act != expected_act))
    throw ShapeError("checkpoint " + where + " has " + std::to_string(obs) + " observation dims and " +
                     std::to_string(act) + " action dims; the configured environment has " +
                     std::to_string(expected_obs) + " and " + std::to_string(expected_act));

  const Json hpj = h.at("hyperparameters");
  const auto hp = parse_hyperparameters(JsonObject(hpj, "hyperparameters"));
  SacAgent<S> agent(obs, act, hp, h.at("seed").get<std::uint64_t>());

  const Json& layout = h.at("arrays");
  std::size_t k = 0;
  auto fill = [&](MlpParams<S>& p, const std::string& prefix) {
    std::size_t t = 0;
    for (auto span : p.tensors()) {
      if (k >= layout.size()) throw Error(where + ": array table is too short");
      detail::read_into<S>(in, span, layout[k++], prefix + "." + std::to_string(t++));
    }
  };
  fill(agent.actor().params, "actor");
  fill(agent.critic1().params, "critic1");
  fill(agent.critic2().params, "critic2");
  fill(agent.target1().params, "target1");
  fill(agent.target2().params, "target2");
  fill(agent.actor_optimizer().m, "actor_adam_m");
  fill(agent.actor_optimizer().v, "actor_adam_v");
  fill(agent.critic1_optimizer().m, "critic1_adam_m");
  fill(agent.critic1_optimizer().v, "critic1_adam_v");
  fill(agent.critic2_optimizer().m, "critic2_adam_m");
  fill(agent.critic2_optimizer().v, "critic2_adam_v");

  agent.actor_optimizer().t = h.at("adam_t").at("actor").get<long long>();
  agent.critic1_optimizer().t = h.at("adam_t").at("critic1").get<long long>();
  agent.critic2_optimizer().t = h.at("adam_t").at("critic2").get<long long>();
  auto& as = agent.alpha_optimizer();
  as.m = h.at("alpha_adam").at("m").get<double>();
  as.v = h.at("alpha_adam").at("v").get<double>();
  as.t = h.at("alpha_adam").at("t").get<long long>();
  agent.set_log_alpha(h.at("log_alpha").get<double>());
  agent.set_updates(h.at("updates").get<long long>());
  restore_state(agent.noise_rng(), h.at("rng").at("noise").get<std::string>(), "noise RNG");
  restore_state(agent.replay_rng(), h.at("rng").at("replay").get<std::string>(), "replay RNG");
  restore_state(agent.normal(), h.at("rng").at("normal").get<std::string>(), "normal distribution");

  if (trainer) {
    const auto& t = h.at("trainer");
    trainer->episode = t.at("episode").get<long long>();
    trainer->best_return = t.at("best_return").get<double>();
    trainer->best_episode = t.at("best_episode").get<long long>();
    trainer->extra = t.at("extra");
  }

  const Json& b = h.at("buffer");
  if (buffer && !b.is_null()) {
    ReplayBuffer<S> rb(b.at("capacity").get<std::size_t>(), obs, act);
    auto o = detail::read_vector<S>(in, layout.at(k++), "buffer.obs");
    auto a = detail::read_vector<S>(in, layout.at(k++), "buffer.action");
    auto r = detail::read_vector<S>(in, layout.at(k++), "buffer.reward");
    auto o2 = detail::read_vector<S>(in, layout.at(k++), "buffer.next_obs");
    auto d = detail::read_vector<S>(in, layout.at(k++), "buffer.done");
    rb.restore(std::move(o), std::move(a), std::move(r), std::move(o2), std::move(d), b.at("size").get<std::size_t>(),
               b.at("cursor").get<std::size_t>(), b.at("total_added").get<std::uint64_t>());
    *buffer = std::move(rb);
  }
  return agent;
}

inline bool checkpoint_has_buffer(const std::filesystem::path& path) { return !peek_checkpoint(path).at("buffer").is_null(); }

}  // namespace clusterflex::sac
