#pragma once

#include <cstdint>

namespace rads {

// SplitMix64 finalizer. Used to derive independent child seeds from a run
// seed and a stream tag so that adding a consumer never perturbs the others.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return mix64(mix64(seed) ^ (tag * 0xd1b54a32d192ed03ULL));
}

}  // namespace rads
