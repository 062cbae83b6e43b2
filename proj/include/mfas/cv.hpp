#pragma once

// Cross-validation over test batches: fixed trained models are re-scored on
// every test set with k points left out.

#include "mfas/core.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace mfas {

enum class CvStrategy { kNone, kLeaveOneOut, kLeaveTwoOut };

std::string to_string(CvStrategy strategy);
/// Parses "none", "leave_one_out" or "leave_two_out".
CvStrategy parse_cv_strategy(const std::string& name);
/// Points left out per batch: 0, 1 or 2.
int points_left_out(CvStrategy strategy);

/// Largest number of batches cross_validate accepts.
inline constexpr std::uint64_t kMaxCvBatches = 1'000'000;

/// C(n, k), saturating at UINT64_MAX.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

/// Left-out index sets of every batch, lexicographic.
std::vector<std::vector<Index>> cv_batches(Index test_size, int k_out);

struct CvModelStats {
  std::string model;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  /// Sample standard deviation over batches (0 for a single batch).
  double std = 0.0;
  /// Normal approximation: mean -/+ 1.96 std / sqrt(batches).
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  std::size_t lowest_batch = 0;
  std::size_t highest_batch = 0;
  /// Every model's score on this model's lowest and highest batch.
  std::map<std::string, double> scores_at_lowest;
  std::map<std::string, double> scores_at_highest;
};

struct CvReport {
  int k_out = 1;
  Index test_size = 0;
  std::size_t batches = 0;
  std::vector<CvModelStats> models;
  /// Batch scores, models x batches, in the order of `models`.
  Matrix scores;
};

/// R^2 of each named prediction on every batch. Throws when T - k_out < 2,
/// when the batch count exceeds kMaxCvBatches or on length mismatch.
CvReport cross_validate(const Vector& y_true, const std::vector<std::pair<std::string, Vector>>& predictions,
                        int k_out);

/// Header model,k_out,batches,mean,min,max,std,ci_lower,ci_upper,lowest_batch,highest_batch.
void write_cv_bounds_header(std::ostream& out, const std::string& prefix_columns = "");
void write_cv_bounds_rows(std::ostream& out, const CvReport& report, const std::string& prefix = "");

}  // namespace mfas
