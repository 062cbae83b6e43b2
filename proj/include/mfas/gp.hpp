#pragma once

// Zero-mean Gaussian process regression with exact inference.

#include "mfas/kernels.hpp"
#include "mfas/lbfgs.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mfas {

/// Diagonal jitter added to every Gram matrix, relative to mean(diag K).
inline constexpr double kBaseJitter = 1e-8;
/// Largest relative jitter tried before factorization is declared failed.
inline constexpr double kMaxJitter = 1e-2;

enum class NoisePolicy {
  kFixedZero,  ///< noiseless observations; only jitter on the diagonal
  kFree,       ///< observation noise variance optimized with the kernel
};

struct FitOptions {
  NoisePolicy noise = NoisePolicy::kFixedZero;
  int restarts = 10;
  std::uint64_t seed = 0;
  LbfgsOptions optimizer;
};

/// Outcome of one optimizer restart.
struct RestartDiagnostics {
  std::uint64_t seed = 0;
  double initial_log_likelihood = 0.0;
  double final_log_likelihood = 0.0;
  int iterations = 0;
  std::string status;
  bool failed = false;
};

struct FitReport {
  std::vector<RestartDiagnostics> restarts;
  std::size_t best = 0;
};

struct Posterior {
  Vector mean;
  Matrix cov;
};

struct Marginals {
  Vector mean;
  Vector variance;
};

/// A GP conditioned on training data. Immutable once built.
class GpModel {
 public:
  /// Factorizes K + (noise + jitter) I, escalating the jitter by 10x up to
  /// kMaxJitter on failure. Throws NumericalError if every attempt fails.
  static GpModel condition(Matrix inputs, Vector outputs, KernelParams params, double noise_variance = 0.0,
                           std::uint64_t seed = 0);

  /// Rebuild with an explicit relative jitter (used when deserializing).
  static GpModel condition_with_jitter(Matrix inputs, Vector outputs, KernelParams params, double noise_variance,
                                       double relative_jitter, std::uint64_t seed);

  const Matrix& train_inputs() const { return inputs_; }
  const Vector& train_outputs() const { return outputs_; }
  const KernelParams& kernel_params() const { return params_; }
  KernelFamily family() const { return family_of(params_); }
  double noise_variance() const { return noise_; }
  /// Relative jitter factor actually used (multiplies mean(diag K)).
  double relative_jitter() const { return relative_jitter_; }
  /// Absolute value added to the diagonal, noise excluded.
  double jitter() const { return jitter_; }
  std::uint64_t seed() const { return seed_; }
  Index input_dim() const { return inputs_.cols(); }
  Index size() const { return inputs_.rows(); }
  /// Lower Cholesky factor of K + (noise + jitter) I.
  const Matrix& chol() const { return chol_; }
  const Vector& alpha() const { return alpha_; }

  double log_marginal_likelihood() const;

  /// Gradient of the log marginal likelihood w.r.t. the kernel's log
  /// hyperparameters, followed by d/dlog(noise) when `with_noise`.
  Vector log_likelihood_gradient(bool with_noise) const;

  /// Full posterior mean and covariance at T x d test inputs. The jitter is
  /// treated as a nugget term of the kernel: it is added to the test prior
  /// variance and to covariances between identical test and training rows.
  Posterior predict(const Matrix& test_inputs) const;
  /// Posterior mean and pointwise variance (no T x T covariance).
  Marginals predict_marginals(const Matrix& test_inputs) const;
  Vector predict_mean(const Matrix& test_inputs) const;

  /// n_samples x T joint draws from the posterior at the test inputs.
  Matrix sample_posterior(const Matrix& test_inputs, int n_samples, std::uint64_t seed) const;

 private:
  GpModel() = default;

  Matrix inputs_;
  Vector outputs_;
  KernelParams params_;
  double noise_ = 0.0;
  double relative_jitter_ = kBaseJitter;
  double jitter_ = 0.0;
  std::uint64_t seed_ = 0;
  Matrix chol_;
  Vector alpha_;
};

double log_marginal_likelihood(const GpModel& model);

/// Maximum-likelihood fit over `options.restarts` optimizer starts.
///
/// Restart 0 starts from unit relative lengthscales; restart i > 0 draws
/// lengthscales log-uniformly in [0.1, 10] x the coordinate range and, for a
/// free noise, the noise log-uniformly in [1e-6, 1e-1] x the output variance.
/// Restart i depends only on (seed, i). Returns the highest-likelihood model.
/// Throws NumericalError, listing each restart, when all restarts fail.
GpModel fit(const Matrix& inputs, const Vector& outputs, KernelFamily family, const FitOptions& options,
            FitReport* report = nullptr);

/// Draws n_samples rows from N(mean, cov) with jitter escalation on cov.
Matrix sample_gaussian(const Vector& mean, const Matrix& cov, int n_samples, std::uint64_t seed);

}  // namespace mfas
