#include "mfas/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace mfas {

namespace {

constexpr double kArmijo = 1e-4;
constexpr double kCurvature = 0.9;

struct Trial {
  double alpha = 0.0;
  double value = 0.0;
  double slope = 0.0;
  Vector x;
  Vector gradient;
  bool finite = false;
};

// Minimizer of the cubic interpolating (a, fa, ga) and (b, fb, gb), clamped
// into the interior of [a, b]; falls back to bisection.
double interpolate(const Trial& a, const Trial& b) {
  const double lo = std::min(a.alpha, b.alpha);
  const double hi = std::max(a.alpha, b.alpha);
  double mid = 0.5 * (lo + hi);
  if (!a.finite || !b.finite) return mid;
  double d1 = a.slope + b.slope - 3.0 * (a.value - b.value) / (a.alpha - b.alpha);
  double disc = d1 * d1 - a.slope * b.slope;
  if (disc < 0.0) return mid;
  double d2 = std::copysign(std::sqrt(disc), b.alpha - a.alpha);
  double denom = b.slope - a.slope + 2.0 * d2;
  if (denom == 0.0) return mid;
  double t = b.alpha - (b.alpha - a.alpha) * (b.slope + d2 - d1) / denom;
  double margin = 0.1 * (hi - lo);
  if (!std::isfinite(t) || t < lo + margin || t > hi - margin) return mid;
  return t;
}

class LineSearch {
 public:
  LineSearch(const Objective& objective, const Vector& x, double f0, const Vector& direction, double slope0,
             int max_steps, int& evaluations)
      : objective_(objective), x_(x), f0_(f0), d_(direction), slope0_(slope0), max_steps_(max_steps),
        evaluations_(evaluations) {}

  // Returns a point satisfying the strong Wolfe conditions or, failing that,
  // the best finite point with sufficient decrease. `ok` is false if none.
  Trial run(double alpha, bool& ok) {
    Trial prev{0.0, f0_, slope0_, x_, Vector(), true};
    for (int step = 0; step < max_steps_; ++step) {
      Trial cur = evaluate(alpha);
      if (!cur.finite || cur.value > f0_ + kArmijo * alpha * slope0_ || (step > 0 && cur.value >= prev.value)) {
        return zoom(prev, cur, ok);
      }
      if (std::abs(cur.slope) <= -kCurvature * slope0_) {
        ok = true;
        return cur;
      }
      if (cur.slope >= 0.0) return zoom(cur, prev, ok);
      prev = cur;
      alpha *= 2.0;
    }
    ok = prev.alpha > 0.0;
    return prev;
  }

 private:
  Trial evaluate(double alpha) {
    Trial t;
    t.alpha = alpha;
    t.x = x_ + alpha * d_;
    t.gradient.resize(x_.size());
    ++evaluations_;
    t.value = objective_(t.x, t.gradient);
    t.finite = std::isfinite(t.value) && t.gradient.allFinite();
    t.slope = t.finite ? t.gradient.dot(d_) : 0.0;
    return t;
  }

  Trial zoom(Trial lo, Trial hi, bool& ok) {
    for (int step = 0; step < max_steps_; ++step) {
      double alpha = interpolate(lo, hi);
      if (std::abs(hi.alpha - lo.alpha) < 1e-16 * std::max(1.0, lo.alpha)) break;
      Trial cur = evaluate(alpha);
      if (!cur.finite || cur.value > f0_ + kArmijo * alpha * slope0_ || cur.value >= lo.value) {
        hi = cur;
        continue;
      }
      if (std::abs(cur.slope) <= -kCurvature * slope0_) {
        ok = true;
        return cur;
      }
      if (cur.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
      lo = cur;
    }
    ok = lo.alpha > 0.0;
    return lo;
  }

  const Objective& objective_;
  const Vector& x_;
  double f0_;
  const Vector& d_;
  double slope0_;
  int max_steps_;
  int& evaluations_;
};

}  // namespace

std::string to_string(LbfgsStatus status) {
  switch (status) {
    case LbfgsStatus::kGradientConverged:
      return "gradient_converged";
    case LbfgsStatus::kRelativeReduction:
      return "relative_reduction";
    case LbfgsStatus::kMaxIterations:
      return "max_iterations";
    case LbfgsStatus::kLineSearchFailed:
      return "line_search_failed";
  }
  return "unknown";
}

LbfgsResult lbfgs_minimize(const Objective& objective, Vector x0, const LbfgsOptions& options) {
  LbfgsResult result;
  result.x = std::move(x0);
  result.gradient.resize(result.x.size());
  result.value = objective(result.x, result.gradient);
  result.evaluations = 1;
  if (!std::isfinite(result.value) || !result.gradient.allFinite()) {
    throw NumericalError("objective is not finite at the starting point");
  }

  std::deque<Vector> s_hist;
  std::deque<Vector> y_hist;
  std::deque<double> rho_hist;

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    if (result.gradient.lpNorm<Eigen::Infinity>() < options.gradient_tolerance) {
      result.status = LbfgsStatus::kGradientConverged;
      return result;
    }

    // Two-loop recursion.
    Vector q = result.gradient;
    std::vector<double> alphas(s_hist.size());
    for (std::size_t k = s_hist.size(); k-- > 0;) {
      alphas[k] = rho_hist[k] * s_hist[k].dot(q);
      q -= alphas[k] * y_hist[k];
    }
    if (!s_hist.empty()) q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (std::size_t k = 0; k < s_hist.size(); ++k) {
      double beta = rho_hist[k] * y_hist[k].dot(q);
      q += (alphas[k] - beta) * s_hist[k];
    }
    Vector direction = -q;
    double slope = direction.dot(result.gradient);
    if (!(slope < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      direction = -result.gradient;
      slope = direction.dot(result.gradient);
    }

    double alpha = s_hist.empty() ? std::min(1.0, 1.0 / result.gradient.lpNorm<Eigen::Infinity>()) : 1.0;
    bool ok = false;
    LineSearch search(objective, result.x, result.value, direction, slope, options.max_line_search_steps,
                      result.evaluations);
    Trial next = search.run(alpha, ok);
    result.iterations = iter + 1;
    if (!ok || !next.finite || next.value >= result.value) {
      if (!s_hist.empty()) {
        // Retry once along steepest descent with a fresh memory.
        s_hist.clear();
        y_hist.clear();
        rho_hist.clear();
        continue;
      }
      result.status = LbfgsStatus::kLineSearchFailed;
      return result;
    }

    Vector s = next.x - result.x;
    Vector y = next.gradient - result.gradient;
    double previous = result.value;
    result.x = std::move(next.x);
    result.value = next.value;
    result.gradient = std::move(next.gradient);

    double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > options.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }

    double scale = std::max({std::abs(previous), std::abs(result.value), 1.0});
    if ((previous - result.value) / scale < options.relative_tolerance) {
      result.status = LbfgsStatus::kRelativeReduction;
      return result;
    }
  }
  result.status = result.gradient.lpNorm<Eigen::Infinity>() < options.gradient_tolerance
                      ? LbfgsStatus::kGradientConverged
                      : LbfgsStatus::kMaxIterations;
  return result;
}

}  // namespace mfas
