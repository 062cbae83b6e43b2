#pragma once

// Design-of-experiments generators over a Box.

#include "mfas/core.hpp"

#include <cstdint>
#include <string>

namespace mfas {

enum class SamplerKind { kLhs, kSobol, kUniform };

std::string to_string(SamplerKind kind);
/// Parses "lhs", "sobol" or "uniform". Throws InvalidArgument otherwise.
SamplerKind parse_sampler_kind(const std::string& name);

struct SamplerSpec {
  SamplerKind kind = SamplerKind::kLhs;
  Index n = 1;
  Box box = Box::unit(1);
  std::uint64_t seed = 0;
  /// Leading Sobol points to drop; 1 drops the origin.
  Index sobol_skip = 1;
};

/// Largest dimension supported by the embedded Sobol direction numbers.
inline constexpr Index kMaxSobolDim = 32;

/// n x box.dim() design inside the (closed) box.
Matrix sample(const SamplerSpec& spec);

/// Latin hypercube on [0,1)^m: one point per stratum [i/n, (i+1)/n) in every
/// coordinate, uniformly placed within its stratum.
Matrix latin_hypercube(Index n, Index m, std::uint64_t seed);

/// Unscrambled Sobol points on [0,1)^m with Joe-Kuo direction numbers,
/// starting after the first `skip` points.
Matrix sobol(Index n, Index m, Index skip = 1);

Matrix uniform(Index n, Index m, std::uint64_t seed);

}  // namespace mfas
