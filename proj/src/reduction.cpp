#include "mfas/reduction.hpp"

namespace mfas {

std::string to_string(ReducerKind kind) { return kind == ReducerKind::kActiveSubspace ? "as" : "nll"; }

ReducerKind parse_reducer_kind(const std::string& name) {
  if (name == "as") return ReducerKind::kActiveSubspace;
  if (name == "nll") return ReducerKind::kNll;
  throw InvalidArgument("unknown reducer '" + name + "' (expected as or nll)");
}

Reducer::Reducer(ReducerKind kind, Matrix projection, std::optional<RevNet> net, Index active_dim)
    : kind_(kind), projection_(std::move(projection)), net_(std::move(net)), active_dim_(active_dim) {}

Reducer Reducer::linear(Matrix projection) {
  if (projection.rows() < 1 || projection.cols() < 1 || projection.cols() > projection.rows()) {
    throw InvalidArgument("Reducer: projection must be m x r with 1 <= r <= m");
  }
  const Index r = projection.cols();
  return Reducer(ReducerKind::kActiveSubspace, std::move(projection), std::nullopt, r);
}

Reducer Reducer::nonlinear(RevNet net, Index active_dim) {
  if (active_dim < 1 || active_dim > net.dim()) throw InvalidArgument("Reducer: active dimension out of range");
  return Reducer(ReducerKind::kNll, Matrix(), std::move(net), active_dim);
}

Index Reducer::input_dim() const { return net_ ? net_->dim() : projection_.rows(); }

const Matrix& Reducer::projection() const {
  if (kind_ != ReducerKind::kActiveSubspace) throw InvalidArgument("Reducer: not a linear reducer");
  return projection_;
}

const RevNet& Reducer::net() const {
  if (!net_) throw InvalidArgument("Reducer: not a nonlinear reducer");
  return *net_;
}

Matrix Reducer::reduce(const Matrix& inputs) const {
  if (inputs.cols() != input_dim()) {
    throw InvalidArgument("Reducer: inputs have " + std::to_string(inputs.cols()) + " columns, expected " +
                          std::to_string(input_dim()));
  }
  if (net_) return net_->forward(inputs).leftCols(active_dim_);
  return inputs * projection_;
}

ResponseSurface fit_response_surface(const Reducer& reducer, const Dataset& data, const FitOptions& options) {
  return {reducer, fit(reducer.reduce(data.inputs()), data.outputs(), KernelFamily::kRbfArd, options)};
}

ActiveSubspaceSurface as_response_surface(const Dataset& data, std::optional<Index> active_dim,
                                          const FitOptions& options) {
  const Index m = data.dim();
  if (active_dim && *active_dim >= m) {
    throw InvalidArgument("as_response_surface: active dimension must be below " + std::to_string(m));
  }
  AsDecomposition as = decompose(gradient_covariance(dataset_gradients(data)), active_dim);
  if (data.size() < as.active_dim + 2) {
    throw InvalidArgument("as_response_surface: need at least r + 2 samples");
  }
  Reducer reducer = Reducer::linear(as.active_directions());
  return {as, fit_response_surface(reducer, data, options)};
}

ResponseSurface nll_response_surface(const RevNet& net, const Dataset& data, const FitOptions& options) {
  return fit_response_surface(Reducer::nonlinear(net, 1), data, options);
}

}  // namespace mfas
