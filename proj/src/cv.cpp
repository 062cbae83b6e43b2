#include "mfas/cv.hpp"

#include "mfas/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace mfas {

std::string to_string(CvStrategy strategy) {
  switch (strategy) {
    case CvStrategy::kNone: return "none";
    case CvStrategy::kLeaveOneOut: return "leave_one_out";
    case CvStrategy::kLeaveTwoOut: return "leave_two_out";
  }
  return "none";
}

CvStrategy parse_cv_strategy(const std::string& name) {
  if (name == "none") return CvStrategy::kNone;
  if (name == "leave_one_out") return CvStrategy::kLeaveOneOut;
  if (name == "leave_two_out") return CvStrategy::kLeaveTwoOut;
  throw InvalidArgument("unknown cross-validation '" + name + "' (expected none, leave_one_out or leave_two_out)");
}

int points_left_out(CvStrategy strategy) {
  return strategy == CvStrategy::kLeaveTwoOut ? 2 : strategy == CvStrategy::kLeaveOneOut ? 1 : 0;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    // result * (n - k + i) / i stays integral at every step.
    const std::uint64_t factor = n - k + i;
    if (result > std::numeric_limits<std::uint64_t>::max() / factor) return std::numeric_limits<std::uint64_t>::max();
    result = result * factor / i;
  }
  return result;
}

std::vector<std::vector<Index>> cv_batches(Index test_size, int k_out) {
  if (k_out < 1 || k_out > 2) throw InvalidArgument("cross-validation: k_out must be 1 or 2");
  if (test_size - k_out < 2) {
    throw InvalidArgument("cross-validation: need at least " + std::to_string(k_out + 2) + " test points");
  }
  const auto count = binomial(static_cast<std::uint64_t>(test_size), static_cast<std::uint64_t>(k_out));
  if (count > kMaxCvBatches) {
    throw InvalidArgument("cross-validation: " + std::to_string(count) + " batches exceed the limit of " +
                          std::to_string(kMaxCvBatches));
  }
  std::vector<std::vector<Index>> batches;
  batches.reserve(count);
  for (Index i = 0; i < test_size; ++i) {
    if (k_out == 1) {
      batches.push_back({i});
      continue;
    }
    for (Index j = i + 1; j < test_size; ++j) batches.push_back({i, j});
  }
  return batches;
}

CvReport cross_validate(const Vector& y_true, const std::vector<std::pair<std::string, Vector>>& predictions,
                        int k_out) {
  if (predictions.empty()) throw InvalidArgument("cross-validation: no predictions");
  for (const auto& [name, pred] : predictions) {
    if (pred.size() != y_true.size()) throw InvalidArgument("cross-validation: '" + name + "' has the wrong length");
  }
  const auto batches = cv_batches(y_true.size(), k_out);
  const Index n_models = static_cast<Index>(predictions.size()), n_batches = static_cast<Index>(batches.size());

  CvReport report;
  report.k_out = k_out;
  report.test_size = y_true.size();
  report.batches = batches.size();
  report.scores.resize(n_models, n_batches);
  std::vector<Index> keep;
  for (Index b = 0; b < n_batches; ++b) {
    keep.clear();
    std::size_t next = 0;
    const auto& out = batches[static_cast<std::size_t>(b)];
    for (Index i = 0; i < y_true.size(); ++i) {
      if (next < out.size() && out[next] == i) {
        ++next;
        continue;
      }
      keep.push_back(i);
    }
    const Vector yt = y_true(keep);
    for (Index m = 0; m < n_models; ++m) {
      report.scores(m, b) = r2_score(yt, predictions[static_cast<std::size_t>(m)].second(keep));
    }
  }

  for (Index m = 0; m < n_models; ++m) {
    CvModelStats s;
    s.model = predictions[static_cast<std::size_t>(m)].first;
    const Vector row = report.scores.row(m).transpose();
    Index lo = 0, hi = 0;
    s.min = row.minCoeff(&lo);
    s.max = row.maxCoeff(&hi);
    s.mean = row.mean();
    // Keep mean inside [min, max] despite summation round-off.
    s.mean = std::clamp(s.mean, s.min, s.max);
    s.std = n_batches > 1 ? std::sqrt((row.array() - s.mean).square().sum() / static_cast<double>(n_batches - 1)) : 0.0;
    const double half_width = 1.96 * s.std / std::sqrt(static_cast<double>(n_batches));
    s.ci_lower = s.mean - half_width;
    s.ci_upper = s.mean + half_width;
    s.lowest_batch = static_cast<std::size_t>(lo);
    s.highest_batch = static_cast<std::size_t>(hi);
    for (Index other = 0; other < n_models; ++other) {
      const auto& name = predictions[static_cast<std::size_t>(other)].first;
      s.scores_at_lowest[name] = report.scores(other, lo);
      s.scores_at_highest[name] = report.scores(other, hi);
    }
    report.models.push_back(std::move(s));
  }
  return report;
}

void write_cv_bounds_header(std::ostream& out, const std::string& prefix_columns) {
  out << prefix_columns << "model,k_out,batches,mean,min,max,std,ci_lower,ci_upper,lowest_batch,highest_batch\n";
}

void write_cv_bounds_rows(std::ostream& out, const CvReport& report, const std::string& prefix) {
  for (const auto& s : report.models) {
    out << prefix << s.model << ',' << report.k_out << ',' << report.batches << ',' << format_double(s.mean) << ','
        << format_double(s.min) << ',' << format_double(s.max) << ',' << format_double(s.std) << ','
        << format_double(s.ci_lower) << ',' << format_double(s.ci_upper) << ',' << s.lowest_batch << ','
        << s.highest_batch << '\n';
  }
}

}  // namespace mfas
