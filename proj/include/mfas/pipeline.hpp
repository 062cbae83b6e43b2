#pragma once

// Multi-fidelity response surface design: a low-fidelity level synthesized
// from a reduced-input surrogate of the high-fidelity data, then a NARGP.

#include "mfas/nargp.hpp"
#include "mfas/reduction.hpp"
#include "mfas/sampling.hpp"

#include <cstdint>
#include <optional>

namespace mfas {

struct PipelineConfig {
  ReducerKind reducer = ReducerKind::kActiveSubspace;
  /// Reduced dimension of the surrogate.
  Index active_dim = 1;
  /// Additional low-fidelity inputs beyond the high-fidelity design.
  Index n_lf_extra = 100;
  SamplerKind lf_sampler = SamplerKind::kUniform;
  /// Domain of the extra inputs; the bounding box of the HF inputs if unset.
  std::optional<Box> domain;

  NoisePolicy surrogate_noise = NoisePolicy::kFree;
  NoisePolicy hf_noise = NoisePolicy::kFixedZero;
  /// Noise of the two MF levels, low then high.
  NoisePolicy mf_low_noise = NoisePolicy::kFixedZero;
  NoisePolicy mf_high_noise = NoisePolicy::kFixedZero;

  /// Restarts of the surrogate and of the single-fidelity HF GP.
  int restarts_hf_lf = 10;
  /// Restarts of each MF level.
  int restarts_mf = 20;
  int mc_samples = 200;
  NllOptions nll;
  std::uint64_t seed = 0;
};

/// Samples of the surrogate at the HF inputs followed by `extra_inputs`.
/// The HF design is a subset of the result by construction. Extra inputs
/// outside `domain` only produce a warning on stderr; the reducer extrapolates.
Dataset build_lowfidelity(const Dataset& hf, const ResponseSurface& surface, const Matrix& extra_inputs,
                          const std::optional<Box>& domain = std::nullopt);

/// Surrogate on reduced inputs (steps 1-2): AS or NLL per the config.
ResponseSurface fit_surrogate(const Dataset& hf, const PipelineConfig& config);

struct PipelineResult {
  ResponseSurface surrogate;
  Dataset low_fidelity;
  /// Training sets of the MF levels, low to high.
  std::vector<Dataset> levels;
  MfModel model;
};

/// Reduce, fit the surrogate, synthesize the LF data, then train the
/// two-level NARGP. Errors carry the failing step.
PipelineResult run_nargp_as(const Dataset& hf, const PipelineConfig& config);
/// Steps 3-5 with an already fitted surrogate.
PipelineResult run_nargp_as(const Dataset& hf, const PipelineConfig& config, ResponseSurface surrogate);

/// Same ingredients with the fidelities swapped: the bottom level holds the
/// HF data plus predictions of a full-space HF GP at the extra inputs, the top
/// level holds surrogate predictions on the same inputs.
PipelineResult run_reversed(const Dataset& hf, const PipelineConfig& config);
PipelineResult run_reversed(const Dataset& hf, const PipelineConfig& config, ResponseSurface surrogate);

/// MF training options of a config, as used for the two pipeline levels.
NargpOptions mf_options(const PipelineConfig& config);

/// Extra LF inputs for a config and HF design.
Matrix sample_extra_inputs(const Dataset& hf, const PipelineConfig& config);

}  // namespace mfas
