#pragma once

// Covariance functions: RBF with automatic relevance determination and the
// nonlinear autoregressive composite kernel
//
//   k((x, f), (x', f')) = k_rho(x, x') * k_f(f, f') + k_delta(x, x').
//
// Hyperparameters are exchanged with optimizers as log values:
//   RBF-ARD:  [log variance, log l_1, ..., log l_d]
//   NARGP:    [rho block (1 + m), f block (2), delta block (1 + m)]

#include "mfas/core.hpp"

#include <variant>

namespace mfas {

struct RbfArdParams {
  double variance = 1.0;
  Vector lengthscales;

  Index dim() const { return lengthscales.size(); }
  /// Throws InvalidArgument on nonpositive or non-finite entries.
  void validate() const;
};

struct NargpKernelParams {
  RbfArdParams rho;    // over the m spatial coordinates
  RbfArdParams f;      // over the previous-level output, one lengthscale
  RbfArdParams delta;  // over the m spatial coordinates

  /// Spatial dimension m.
  Index dim() const { return rho.dim(); }
  void validate() const;
};

enum class KernelFamily { kRbfArd, kNargp };

using KernelParams = std::variant<RbfArdParams, NargpKernelParams>;

KernelFamily family_of(const KernelParams& params);

/// Columns of the input matrix the kernel consumes: d for RBF-ARD on d
/// coordinates, m + 1 for NARGP (spatial coordinates then previous output).
Index input_dim(const KernelParams& params);

double rbf_ard(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b,
               const RbfArdParams& params);

double nargp_kernel(const Eigen::Ref<const Vector>& a, double fa, const Eigen::Ref<const Vector>& b,
                    double fb, const NargpKernelParams& params);

/// Kernel value on rows of input matrices, dispatching on the family.
double kernel_value(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b,
                    const KernelParams& params);

/// Gram matrix on N x d points.
Matrix gram(const Matrix& points, const RbfArdParams& params);
/// Gram matrix of the composite kernel: spatial points N x m plus previous-level values.
Matrix gram(const Matrix& points, const Vector& fvals, const NargpKernelParams& params);
/// Gram matrix on N x input_dim(params) points (NARGP points carry f in the last column).
Matrix gram(const Matrix& points, const KernelParams& params);

/// Cross covariance K(A, B), |A| x |B|.
Matrix cross_covariance(const Matrix& a, const Matrix& b, const KernelParams& params);

/// k(x, x) for every row.
Vector prior_variance(const Matrix& points, const KernelParams& params);

// Log-space hyperparameter vectors.

Index num_hyperparameters(KernelFamily family, Index spatial_dim);
Vector to_log_params(const KernelParams& params);
KernelParams from_log_params(KernelFamily family, Index spatial_dim, const Eigen::Ref<const Vector>& log_params);

/// dK / d(log theta_p) for hyperparameter p, N x N.
Matrix gram_gradient(const Matrix& points, const KernelParams& params, Index p);

/// Contractions sum_ik W_ik dK_ik / d(log theta_p) for every p, without forming
/// the derivative matrices. W must be N x N.
Vector gram_gradient_contractions(const Matrix& points, const KernelParams& params, const Matrix& weights);

}  // namespace mfas
