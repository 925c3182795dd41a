#pragma once

#include <cstdint>
#include <random>

namespace stagelearn {

using Rng = std::mt19937_64;

/// Named stream families. Every consumer of randomness draws from its own
/// stream so that adding agents or features never shifts another's draws.
enum class StreamKind : std::uint64_t {
  agent = 1,
  matching = 2,
  churn = 3,
  initial = 4,
  sampling = 5,
};

/// Derive an independent engine from (master seed, stream family, id, sub-id).
inline Rng make_stream(std::uint64_t master, StreamKind kind, std::uint64_t id = 0,
                       std::uint64_t sub = 0) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(master), hi(master),
                    static_cast<std::uint32_t>(kind),
                    lo(id), hi(id), lo(sub), hi(sub)};
  return Rng(seq);
}

/// Uniform double in [0, 1) from exactly one engine draw.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform index in [0, n). n must be positive.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng);
}

}  // namespace stagelearn
