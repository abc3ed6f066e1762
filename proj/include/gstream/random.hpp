#pragma once

#include <cstdint>
#include <random>

namespace gstream {

using Rng = std::mt19937_64;

/// Named sub-streams of one trial. Each gets an independent generator so that,
/// e.g., switching the sampling operator does not change the drawn ground truth.
enum class StreamTag : std::uint32_t {
  Truth = 1,
  Init = 2,
  Data = 3,
  Operator = 4,
  Misc = 5,
};

/// Generator for stream `tag` of trial `trial` under `seed`. The result depends
/// only on the triple, never on the order in which trials are scheduled.
inline Rng make_rng(std::uint64_t seed, std::uint64_t trial, StreamTag tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32),
                    static_cast<std::uint32_t>(tag)};
  return Rng(seq);
}

}  // namespace gstream
