#pragma once

// Input-space reducers and the response surfaces built on them.

#include "mfas/active_subspace.hpp"
#include "mfas/gp.hpp"
#include "mfas/nll.hpp"

#include <optional>
#include <string>

namespace mfas {

enum class ReducerKind { kActiveSubspace, kNll };

std::string to_string(ReducerKind kind);
/// Parses "as" or "nll".
ReducerKind parse_reducer_kind(const std::string& name);

/// Maps full inputs (N x m) to active coordinates (N x r): a linear projection
/// W1^T x, or the first r coordinates of a RevNet forward pass.
class Reducer {
 public:
  static Reducer linear(Matrix projection);
  static Reducer nonlinear(RevNet net, Index active_dim = 1);

  ReducerKind kind() const { return kind_; }
  Index input_dim() const;
  Index output_dim() const { return active_dim_; }
  /// m x r projection; only for linear reducers.
  const Matrix& projection() const;
  /// Only for nonlinear reducers.
  const RevNet& net() const;

  Matrix reduce(const Matrix& inputs) const;

 private:
  Reducer(ReducerKind kind, Matrix projection, std::optional<RevNet> net, Index active_dim);

  ReducerKind kind_;
  Matrix projection_;
  std::optional<RevNet> net_;
  Index active_dim_;
};

/// A GP on reduced coordinates.
struct ResponseSurface {
  Reducer reducer;
  GpModel gp;

  Marginals predict(const Matrix& inputs) const { return gp.predict_marginals(reducer.reduce(inputs)); }
  Vector predict_mean(const Matrix& inputs) const { return gp.predict_mean(reducer.reduce(inputs)); }
};

/// Fits a GP on the reduced inputs of `data`.
ResponseSurface fit_response_surface(const Reducer& reducer, const Dataset& data, const FitOptions& options);

struct ActiveSubspaceSurface {
  AsDecomposition decomposition;
  ResponseSurface surface;
};

/// Active subspace from the dataset gradients (estimated when absent) and a
/// GP on the active coordinates. `active_dim` overrides the spectral-gap
/// choice and must be below m.
ActiveSubspaceSurface as_response_surface(const Dataset& data, std::optional<Index> active_dim,
                                          const FitOptions& options);

/// GP on the first transformed coordinate of `net`.
ResponseSurface nll_response_surface(const RevNet& net, const Dataset& data, const FitOptions& options);

}  // namespace mfas
