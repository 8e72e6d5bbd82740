#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace afe {

// SplitMix64 finaliser; used as a counter-based hash.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Seed of a named sub-stream of the master seed. Streams with different
/// names are independent, so enabling one feature never shifts another's draws.
std::uint64_t substream_seed(std::uint64_t master, std::string_view name);

/// Engine for element `counter` of a stream. Draws depend only on
/// (stream_seed, counter), never on evaluation order.
std::mt19937_64 counter_engine(std::uint64_t stream_seed, std::uint64_t counter);

}  // namespace afe
