#pragma once

#include <cstdint>

namespace clusterflex {

// SplitMix64 step. Component seeds are derived from the master seed as
// derive_seed(master, k) for a fixed stream number k per component, so
// adding a component never shifts the others.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(master ^ splitmix64(stream + 1));
}

namespace seed_stream {
inline constexpr std::uint64_t actor_init = 1;
inline constexpr std::uint64_t critic1_init = 2;
inline constexpr std::uint64_t critic2_init = 3;
inline constexpr std::uint64_t policy_noise = 4;
inline constexpr std::uint64_t replay_sampling = 5;
}  // namespace seed_stream

}  // namespace clusterflex
