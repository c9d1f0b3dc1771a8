#pragma once

#include <cstdint>

namespace nsplan {

/// splitmix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent stream seed for (base, trial, setting). Streams never share
/// state, so trials can run in any order or in parallel.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t trial,
                                    std::uint64_t setting = 0) noexcept {
  return splitmix64(splitmix64(splitmix64(base) ^ trial) ^ (setting * 0x2545f4914f6cdd1dULL));
}

}  // namespace nsplan
