#include "mfas/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace mfas {

namespace {

void check_pair(const Vector& a, const Vector& b, const char* what) {
  if (a.size() != b.size()) {
    throw InvalidArgument(std::string(what) + ": length mismatch (" + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()) + ")");
  }
  if (a.size() < 2) throw InvalidArgument(std::string(what) + ": need at least two values");
}

}  // namespace

double r2_score(const Vector& y_true, const Vector& y_pred) {
  check_pair(y_true, y_pred, "r2_score");
  const double total = (y_true.array() - y_true.mean()).square().sum();
  if (!(total > 0.0)) throw InvalidArgument("r2_score: y_true is constant");
  return 1.0 - (y_true - y_pred).squaredNorm() / total;
}

double pearson(const Vector& a, const Vector& b) {
  check_pair(a, b, "pearson");
  const Eigen::ArrayXd da = a.array() - a.mean(), db = b.array() - b.mean();
  const double denom = std::sqrt(da.square().sum() * db.square().sum());
  if (!(denom > 0.0)) throw InvalidArgument("pearson: constant input");
  return std::clamp((da * db).sum() / denom, -1.0, 1.0);
}

CorrelationData correlation_data(const Vector& reference, const Vector& prediction) {
  return {reference, prediction, pearson(reference, prediction)};
}

void write_correlation_csv(std::ostream& out, const CorrelationData& data) {
  out << "# pearson=" << format_double(data.pearson) << '\n' << "reference,prediction\n";
  for (Index i = 0; i < data.reference.size(); ++i) {
    out << format_double(data.reference[i]) << ',' << format_double(data.prediction[i]) << '\n';
  }
}

}  // namespace mfas
