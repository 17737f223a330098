#pragma once

#include <cstdint>
#include <initializer_list>

namespace qdark {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Sub-seed as a pure function of a master seed and a coordinate tuple, so a
// realization's randomness does not depend on execution order.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> coords) noexcept {
  std::uint64_t s = mix64(master);
  for (std::uint64_t c : coords) s = mix64(s ^ mix64(c + 0x632be59bd9b4e019ULL));
  return s;
}

}  // namespace qdark
