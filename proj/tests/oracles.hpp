#pragma once

// Test-only reference implementations. These deliberately use dense
// inverses and explicit loops instead of the library's factorized paths.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

namespace mfas::testing {

inline double brute_rbf(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double variance,
                        const Eigen::VectorXd& ls) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < a.size(); ++j) s += std::pow((a[j] - b[j]) / ls[j], 2);
  return variance * std::exp(-0.5 * s);
}

struct DensePosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// mean = K*N K^-1 y, cov = K** - K*N K^-1 KN*, with an explicit inverse.
inline DensePosterior dense_posterior(const Eigen::MatrixXd& k, const Eigen::MatrixXd& k_star_n,
                                      const Eigen::MatrixXd& k_star_star, const Eigen::VectorXd& y) {
  Eigen::MatrixXd k_inv = k.inverse();
  return {k_star_n * k_inv * y, k_star_star - k_star_n * k_inv * k_star_n.transpose()};
}

inline double dense_log_likelihood(const Eigen::MatrixXd& k, const Eigen::VectorXd& y) {
  const double n = static_cast<double>(y.size());
  return -0.5 * y.dot(k.inverse() * y) - 0.5 * std::log(k.determinant()) - 0.5 * n * std::log(2 * std::numbers::pi);
}

// Central finite-difference gradient.
inline Eigen::VectorXd central_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                                          const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2 * h);
  }
  return g;
}

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double lo = -1.0,
                                     double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = u(rng);
  return m;
}

inline double max_relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double floor = 1e-8) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    double scale = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
  }
  return worst;
}

}  // namespace mfas::testing
