#pragma once

// Seed derivation. Every stochastic component takes a 64-bit seed; child
// seeds are derived by hashing (parent, stream tag) with splitmix64 so that
// sub-streams are independent of how many siblings are drawn.

#include <cstdint>
#include <initializer_list>
#include <random>

namespace mfas {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Child seed for stream `tags...` of `parent`.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t s = splitmix64(parent);
  for (auto t : tags) s = splitmix64(s ^ splitmix64(t + 0x632be59bd9b4e019ULL));
  return s;
}

using Rng = std::mt19937_64;

}  // namespace mfas
