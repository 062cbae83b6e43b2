#pragma once

// Scores used by the studies.

#include "mfas/core.hpp"

#include <iosfwd>
#include <string>

namespace mfas {

/// 1 - SS_res / SS_tot. Throws on length mismatch, fewer than two values or a
/// constant y_true.
double r2_score(const Vector& y_true, const Vector& y_pred);

/// Pearson correlation coefficient. Throws when either vector is constant.
double pearson(const Vector& a, const Vector& b);

struct CorrelationData {
  Vector reference;
  Vector prediction;
  double pearson = 0.0;
};

CorrelationData correlation_data(const Vector& reference, const Vector& prediction);

/// Columns reference,prediction; the coefficient goes in a leading comment line.
void write_correlation_csv(std::ostream& out, const CorrelationData& data);

}  // namespace mfas
