#pragma once

// Sample-size sweeps with outer training restarts: MF, HF and LF models
// scored on a shared test set.

#include "mfas/cv.hpp"
#include "mfas/pipeline.hpp"
#include "mfas/serialization.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mfas {

enum class SweepVariable { kNHf, kNLfExtra };
enum class FidelityOrder { kForward, kReversed };

struct StudyConfig {
  /// Benchmark name; empty when the data come from CSV files.
  std::string benchmark;
  /// External data: HF dataset, optional intermediate fidelities (low to
  /// high) and a test set. The reducer surrogate always forms the lowest level.
  std::string hf_csv;
  std::vector<std::string> fidelity_csvs;
  std::string test_csv;

  /// Sampler of the benchmark HF designs.
  SamplerKind design_sampler = SamplerKind::kLhs;
  SweepVariable sweep = SweepVariable::kNHf;
  std::vector<Index> grid;
  /// Value of the variable that is not swept.
  Index n_hf = 100;
  Index n_lf_extra = 100;
  /// When set, n_lf_extra = n_lf_total - n_hf in every cell.
  std::optional<Index> n_lf_total;

  int outer_restarts = 10;
  std::uint64_t seed_base = 0;
  SamplerKind test_sampler = SamplerKind::kLhs;
  Index test_size = 1000;
  CvStrategy cv = CvStrategy::kNone;
  FidelityOrder order = FidelityOrder::kForward;
  PipelineConfig pipeline;
  std::string output_dir;
};

inline constexpr const char* kModelNames[] = {"MF", "HF", "LF"};

struct StudyCell {
  Index grid_value = 0;
  int restart = 0;
  std::uint64_t seed = 0;
  /// Absent when the cell failed.
  std::optional<Vector> r2;       // MF, HF, LF
  std::optional<Vector> pearson;  // against the test outputs
  std::string error;
  std::optional<CvReport> cv;
};

struct StudyAggregate {
  Index grid_value = 0;
  std::string model;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  int count = 0;
};

struct CellTiming {
  Index grid_value = 0;
  int restart = 0;
  double train_mf = 0.0;
  double predict_mf = 0.0;
  double train_hf = 0.0;
  double train_lf = 0.0;
};

struct StudyResult {
  StudyConfig config;
  std::vector<StudyCell> cells;
  std::vector<StudyAggregate> aggregates;
  /// Test outputs and restart-0 predictions per grid value (MF, HF, LF rows).
  Vector test_outputs;
  std::vector<std::pair<Index, Matrix>> correlation_predictions;
  /// Wall-clock data, kept out of the deterministic result document.
  std::vector<CellTiming> timings;

  const StudyAggregate& aggregate(Index grid_value, const std::string& model) const;
};

std::string to_string(SweepVariable v);
SweepVariable parse_sweep_variable(const std::string& name);
std::string to_string(FidelityOrder order);
FidelityOrder parse_fidelity_order(const std::string& name);

Json to_json(const StudyConfig& config);
/// Unknown keys are rejected; throws InvalidArgument on invalid values.
StudyConfig study_config_from_json(const Json& j);

/// Deterministic part of the result: config, cells, aggregates.
Json to_json(const StudyResult& result);
Json timings_to_json(const StudyResult& result);

/// Runs every (grid value, restart) cell. Restart i uses seed_base + i; cell
/// sub-seeds are derived from it and the grid value. Failures are recorded
/// per cell.
StudyResult run_study(const StudyConfig& config);

/// study_result.json, timings.json, r2_sweep.csv, correlations.csv and, with
/// cross-validation, cv_bounds.csv.
void write_study_outputs(const StudyResult& result, const std::string& directory);

}  // namespace mfas
