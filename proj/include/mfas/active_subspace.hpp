#pragma once

// Linear parameter-space reduction from the uncentered gradient covariance.

#include "mfas/core.hpp"

#include <iosfwd>
#include <optional>

namespace mfas {

struct AsDecomposition {
  /// Descending, nonnegative.
  Vector eigenvalues;
  /// Orthonormal columns; the largest-magnitude entry of each is positive.
  Matrix eigenvectors;
  /// Number of active directions.
  Index active_dim = 1;
  /// True when every spectral gap is numerically zero and active_dim fell
  /// back to 1.
  bool degenerate = false;

  Index dim() const { return eigenvalues.size(); }
  /// First active_dim eigenvectors.
  Matrix active_directions() const { return eigenvectors.leftCols(active_dim); }
  Matrix inactive_directions() const { return eigenvectors.rightCols(dim() - active_dim); }
};

/// (1/N) sum_i g_i g_i^T over the rows of `gradients`.
Matrix gradient_covariance(const Matrix& gradients);

/// Eigendecomposition with active_dim at the largest spectral gap (smallest r
/// on ties) unless `active_dim` is given. Throws InvalidArgument if `cov` is
/// not symmetric to 1e-10.
AsDecomposition decompose(const Matrix& cov, std::optional<Index> active_dim = std::nullopt);

/// Gradients from local linear least-squares fits (with intercept) over the
/// k nearest neighbours of each sample; k defaults to min(N, 2m + 1).
/// Throws NumericalError on a rank-deficient neighbourhood.
Matrix estimate_gradients(const Dataset& data, std::optional<Index> k_neighbors = std::nullopt);

/// Square roots of the eigenvalue sums over the active and inactive parts.
struct BoundTerms {
  double active_mass = 0.0;
  double inactive_mass = 0.0;
};
BoundTerms bound_terms(const AsDecomposition& decomposition, Index active_dim);

/// Gradients of the dataset, estimated when it carries none.
Matrix dataset_gradients(const Dataset& data);

/// Writes `active_coordinate,output` rows for a one-dimensional reduction.
void write_summary_plot_csv(std::ostream& out, const Vector& active_coordinate, const Vector& outputs);

}  // namespace mfas
