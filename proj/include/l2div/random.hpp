#pragma once

#include <cstdint>
#include <random>

namespace l2div {

/// Independent engine for one (seed, stream) pair, so that replicate m draws the
/// same numbers whether replicates run serially or on a thread pool.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x6c326469u};
  return std::mt19937_64(seq);
}

}  // namespace l2div
