#pragma once

#include <cstdint>
#include <random>

namespace cbsql {

using Rng = std::mt19937_64;

// Independent named streams inside one run. Each component of a run draws
// from its own stream so that, e.g., changing the agent does not shift the
// environment's reward noise.
enum class Stream : std::uint32_t { Environment = 1, Agent = 2, Replay = 3 };

// Deterministic generator for (base_seed, run, stream).
inline Rng make_rng(std::uint64_t base_seed, std::uint64_t run, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(base_seed), static_cast<std::uint32_t>(base_seed >> 32),
                    static_cast<std::uint32_t>(run), static_cast<std::uint32_t>(run >> 32),
                    static_cast<std::uint32_t>(stream)};
  return Rng(seq);
}

}  // namespace cbsql
