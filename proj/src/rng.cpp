#include "afe/rng.hpp"

namespace afe {

std::uint64_t substream_seed(std::uint64_t master, std::string_view name) {
  std::uint64_t h = 0xCBF29CE484222325ull;  // FNV-1a
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return mix64(master ^ mix64(h));
}

std::mt19937_64 counter_engine(std::uint64_t stream_seed, std::uint64_t counter) {
  std::seed_seq seq{static_cast<std::uint32_t>(stream_seed), static_cast<std::uint32_t>(stream_seed >> 32),
                    static_cast<std::uint32_t>(counter), static_cast<std::uint32_t>(counter >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace afe
