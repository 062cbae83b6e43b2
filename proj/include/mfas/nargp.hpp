#pragma once

// Nonlinear autoregressive multi-fidelity GP (NARGP).

#include "mfas/gp.hpp"

#include <cstdint>
#include <vector>

namespace mfas {

/// Chain of GPs ordered from lowest to highest fidelity. Level 1 uses an
/// RBF-ARD kernel on the raw inputs; level q > 1 uses the autoregressive
/// kernel on (x, f_{q-1}(x)).
class MfModel {
 public:
  MfModel(std::vector<GpModel> levels, int mc_samples = 200, std::uint64_t seed = 0);

  const std::vector<GpModel>& levels() const { return levels_; }
  const GpModel& level(std::size_t q) const;
  std::size_t num_levels() const { return levels_.size(); }
  Index dim() const { return levels_.front().input_dim(); }
  int mc_samples() const { return mc_samples_; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::vector<GpModel> levels_;
  int mc_samples_;
  std::uint64_t seed_;
};

struct NargpOptions {
  /// Per-level noise policy; missing entries default to fixed zero.
  std::vector<NoisePolicy> noise;
  /// Per-level optimizer restarts; missing entries default to 10.
  std::vector<int> restarts;
  LbfgsOptions optimizer;
  int mc_samples = 200;
  std::uint64_t seed = 0;
};

/// Fit options of level q (0-based) as used by train_nargp.
FitOptions level_fit_options(const NargpOptions& options, std::size_t q);

/// Inputs of `upper` with the stored output of `lower` at each row appended.
/// Throws HierarchyError(level, row) when a row of `upper` is not in `lower`.
Matrix augmented_inputs(const Dataset& lower, const Dataset& upper, std::size_t level = 1);

/// Trains every level by maximum likelihood. Level q > 1 is augmented with the
/// stored level q-1 outputs at its inputs, which the hierarchy guarantees.
/// Throws HierarchyError naming the level and row when a design is not nested.
MfModel train_nargp(const std::vector<Dataset>& datasets, const NargpOptions& options,
                    std::vector<FitReport>* reports = nullptr);

struct McPrediction {
  Vector mean;
  Vector variance;
  /// mc_samples x T draws of the top level.
  Matrix samples;
};

/// Recursive Monte Carlo prediction through all levels. Particles are drawn
/// independently per test point; the reported moments combine the top-level
/// conditional moments over particles (law of total variance).
McPrediction predict_mc(const MfModel& model, const Matrix& test_inputs);

/// Moments of level q (1-based): exact for q = 1, Monte Carlo above.
Marginals predict_level(const MfModel& model, std::size_t q, const Matrix& test_inputs);

}  // namespace mfas
