#include "mfas/sampling.hpp"

#include "mfas/random.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numeric>

namespace mfas {

namespace {

// Primitive polynomials and initial direction numbers for the first 32
// dimensions, from the Joe-Kuo "new-joe-kuo-6.21201" table. The polynomial is
// stored with its leading and trailing bits; dimension 0 is the identity.
struct DirectionEntry {
  std::uint32_t poly;
  std::array<std::uint32_t, 7> m;
};

constexpr std::array<DirectionEntry, kMaxSobolDim> kDirections = {{
    {1, {1}},
    {3, {1}},
    {7, {1, 3}},
    {11, {1, 3, 1}},
    {13, {1, 1, 1}},
    {19, {1, 1, 3, 3}},
    {25, {1, 3, 5, 13}},
    {37, {1, 1, 5, 5, 17}},
    {41, {1, 1, 5, 5, 5}},
    {47, {1, 1, 7, 11, 19}},
    {55, {1, 1, 5, 1, 1}},
    {59, {1, 1, 1, 3, 11}},
    {61, {1, 3, 5, 5, 31}},
    {67, {1, 3, 3, 9, 7, 49}},
    {91, {1, 1, 1, 15, 21, 21}},
    {97, {1, 3, 1, 13, 27, 49}},
    {103, {1, 1, 1, 15, 7, 5}},
    {109, {1, 3, 1, 15, 13, 25}},
    {115, {1, 1, 5, 5, 19, 61}},
    {131, {1, 3, 7, 11, 23, 15, 103}},
    {137, {1, 3, 7, 13, 13, 15, 69}},
    {143, {1, 1, 3, 13, 7, 35, 63}},
    {145, {1, 3, 5, 9, 1, 25, 53}},
    {157, {1, 3, 1, 13, 9, 35, 107}},
    {167, {1, 3, 1, 5, 27, 61, 31}},
    {171, {1, 1, 5, 11, 19, 41, 61}},
    {185, {1, 3, 5, 3, 3, 13, 69}},
    {191, {1, 1, 7, 13, 1, 19, 1}},
    {193, {1, 3, 7, 5, 13, 19, 59}},
    {203, {1, 1, 3, 9, 25, 29, 41}},
    {211, {1, 3, 5, 13, 23, 1, 55}},
    {213, {1, 3, 7, 3, 13, 59, 17}},
}};

constexpr int kBits = 32;

std::array<std::uint32_t, kBits> direction_numbers(Index dim) {
  std::array<std::uint32_t, kBits> v{};
  if (dim == 0) {
    for (int k = 0; k < kBits; ++k) v[k] = 1u << (kBits - 1 - k);
    return v;
  }
  const auto& entry = kDirections[static_cast<std::size_t>(dim)];
  const int s = std::bit_width(entry.poly) - 1;
  std::array<std::uint32_t, kBits> m{};
  for (int k = 0; k < s; ++k) m[k] = entry.m[k];
  for (int k = s; k < kBits; ++k) {
    std::uint32_t next = m[k - s] ^ (m[k - s] << s);
    for (int i = 1; i < s; ++i) {
      // coefficient a_i of the polynomial, most significant first
      if ((entry.poly >> (s - i)) & 1u) next ^= m[k - i] << i;
    }
    m[k] = next;
  }
  for (int k = 0; k < kBits; ++k) v[k] = m[k] << (kBits - 1 - k);
  return v;
}

void check_shape(Index n, Index m) {
  if (n < 1) throw InvalidArgument("sampler: n must be at least 1");
  if (m < 1) throw InvalidArgument("sampler: dimension must be at least 1");
}

}  // namespace

std::string to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::kLhs:
      return "lhs";
    case SamplerKind::kSobol:
      return "sobol";
    case SamplerKind::kUniform:
      return "uniform";
  }
  return "unknown";
}

SamplerKind parse_sampler_kind(const std::string& name) {
  if (name == "lhs") return SamplerKind::kLhs;
  if (name == "sobol") return SamplerKind::kSobol;
  if (name == "uniform") return SamplerKind::kUniform;
  throw InvalidArgument("unknown sampler '" + name + "' (expected lhs, sobol or uniform)");
}

Matrix latin_hypercube(Index n, Index m, std::uint64_t seed) {
  check_shape(n, m);
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Index> perm(static_cast<std::size_t>(n));
  Matrix x(n, m);
  for (Index j = 0; j < m; ++j) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (Index i = 0; i < n; ++i) {
      const double lo = static_cast<double>(perm[static_cast<std::size_t>(i)]);
      // keep the point strictly inside its half-open stratum
      x(i, j) = std::min((lo + u(rng)) / static_cast<double>(n), std::nextafter((lo + 1.0) / n, lo / n));
    }
  }
  return x;
}

Matrix sobol(Index n, Index m, Index skip) {
  check_shape(n, m);
  if (m > kMaxSobolDim) {
    throw InvalidArgument("sobol: dimension " + std::to_string(m) + " exceeds " + std::to_string(kMaxSobolDim));
  }
  if (skip < 0) throw InvalidArgument("sobol: skip must be nonnegative");
  const std::uint64_t total = static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(skip);
  if (total > (std::uint64_t{1} << kBits)) throw InvalidArgument("sobol: too many points requested");

  std::vector<std::array<std::uint32_t, kBits>> v(static_cast<std::size_t>(m));
  for (Index j = 0; j < m; ++j) v[static_cast<std::size_t>(j)] = direction_numbers(j);

  Matrix x(n, m);
  std::vector<std::uint32_t> state(static_cast<std::size_t>(m), 0);
  const double scale = 1.0 / 4294967296.0;
  for (std::uint64_t i = 0; i < total; ++i) {
    if (i > 0) {
      // Gray-code update: flip the direction of the lowest zero bit of i-1
      const int c = std::countr_one(i - 1);
      for (Index j = 0; j < m; ++j) state[static_cast<std::size_t>(j)] ^= v[static_cast<std::size_t>(j)][c];
    }
    if (i < static_cast<std::uint64_t>(skip)) continue;
    const Index row = static_cast<Index>(i) - skip;
    for (Index j = 0; j < m; ++j) x(row, j) = state[static_cast<std::size_t>(j)] * scale;
  }
  return x;
}

Matrix uniform(Index n, Index m, std::uint64_t seed) {
  check_shape(n, m);
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix x(n, m);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m; ++j) x(i, j) = u(rng);
  return x;
}

Matrix sample(const SamplerSpec& spec) {
  const Index m = spec.box.dim();
  Matrix unit;
  switch (spec.kind) {
    case SamplerKind::kLhs:
      unit = latin_hypercube(spec.n, m, spec.seed);
      break;
    case SamplerKind::kSobol:
      unit = sobol(spec.n, m, spec.sobol_skip);
      break;
    case SamplerKind::kUniform:
      unit = uniform(spec.n, m, spec.seed);
      break;
  }
  Matrix x = spec.box.from_unit(unit);
  // guard the closed box against rounding in the affine map
  for (Index j = 0; j < m; ++j) {
    x.col(j) = x.col(j).cwiseMax(spec.box.lower()[j]).cwiseMin(spec.box.upper()[j]);
  }
  return x;
}

}  // namespace mfas
