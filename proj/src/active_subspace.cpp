#include "mfas/active_subspace.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <numeric>
#include <ostream>
#include <vector>

namespace mfas {

Matrix gradient_covariance(const Matrix& gradients) {
  if (gradients.rows() < 1) throw InvalidArgument("gradient_covariance: empty gradient set");
  if (!gradients.allFinite()) throw InvalidArgument("gradient_covariance: gradients must be finite");
  Matrix c = gradients.transpose() * gradients / static_cast<double>(gradients.rows());
  return 0.5 * (c + c.transpose());
}

AsDecomposition decompose(const Matrix& cov, std::optional<Index> active_dim) {
  const Index m = cov.rows();
  if (m < 1 || cov.cols() != m) throw InvalidArgument("decompose: covariance must be square and nonempty");
  if (!cov.allFinite()) throw InvalidArgument("decompose: covariance must be finite");
  const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw InvalidArgument("decompose: covariance is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (cov + cov.transpose()));
  if (eig.info() != Eigen::Success) throw NumericalError("decompose: eigendecomposition failed");

  AsDecomposition out;
  out.eigenvalues = eig.eigenvalues().reverse().cwiseMax(0.0);
  out.eigenvectors = eig.eigenvectors().rowwise().reverse();
  for (Index j = 0; j < m; ++j) {
    Index arg = 0;
    out.eigenvectors.col(j).cwiseAbs().maxCoeff(&arg);
    if (out.eigenvectors(arg, j) < 0.0) out.eigenvectors.col(j) *= -1.0;
  }

  if (active_dim) {
    if (*active_dim < 1 || *active_dim > m) {
      throw InvalidArgument("decompose: active dimension " + std::to_string(*active_dim) + " outside [1, " +
                            std::to_string(m) + "]");
    }
    out.active_dim = *active_dim;
    return out;
  }
  out.active_dim = 1;
  double best_gap = -1.0;
  for (Index r = 1; r < m; ++r) {
    const double gap = out.eigenvalues[r - 1] - out.eigenvalues[r];
    if (gap > best_gap) {
      best_gap = gap;
      out.active_dim = r;
    }
  }
  const double top = out.eigenvalues[0];
  out.degenerate = m > 1 && !(best_gap > 1e-12 * std::max(top, std::numeric_limits<double>::min()));
  if (out.degenerate) out.active_dim = 1;
  return out;
}

Matrix estimate_gradients(const Dataset& data, std::optional<Index> k_neighbors) {
  const Index n = data.size(), m = data.dim();
  if (n < m + 1) {
    throw InvalidArgument("estimate_gradients: need at least m + 1 = " + std::to_string(m + 1) + " samples, got " +
                          std::to_string(n));
  }
  const Index k = k_neighbors.value_or(std::min(n, 2 * m + 1));
  if (k < m + 1 || k > n) throw InvalidArgument("estimate_gradients: neighbour count must lie in [m + 1, N]");

  const Matrix& x = data.inputs();
  Matrix grads(n, m);
  std::vector<Index> order(static_cast<std::size_t>(n));
  Vector dist(n);
  for (Index i = 0; i < n; ++i) {
    dist = (x.rowwise() - x.row(i)).rowwise().squaredNorm();
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](Index a, Index b) {
      return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
    });
    Matrix design(k, m + 1);
    Vector rhs(k);
    for (Index r = 0; r < k; ++r) {
      const Index j = order[static_cast<std::size_t>(r)];
      design(r, 0) = 1.0;
      design.row(r).tail(m) = x.row(j) - x.row(i);
      rhs[r] = data.outputs()[j];
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(design);
    if (qr.rank() < m + 1) {
      throw NumericalError("estimate_gradients: degenerate neighbourhood around sample " + std::to_string(i));
    }
    grads.row(i) = qr.solve(rhs).tail(m).transpose();
  }
  return grads;
}

BoundTerms bound_terms(const AsDecomposition& decomposition, Index active_dim) {
  const Index m = decomposition.dim();
  if (active_dim < 1 || active_dim > m) throw InvalidArgument("bound_terms: active dimension out of range");
  return {std::sqrt(decomposition.eigenvalues.head(active_dim).sum()),
          std::sqrt(decomposition.eigenvalues.tail(m - active_dim).sum())};
}

Matrix dataset_gradients(const Dataset& data) {
  return data.has_gradients() ? data.gradients() : estimate_gradients(data);
}

void write_summary_plot_csv(std::ostream& out, const Vector& active_coordinate, const Vector& outputs) {
  if (active_coordinate.size() != outputs.size()) throw InvalidArgument("summary plot: length mismatch");
  out << "active_coordinate,output\n";
  for (Index i = 0; i < outputs.size(); ++i) {
    out << format_double(active_coordinate[i]) << ',' << format_double(outputs[i]) << '\n';
  }
}

}  // namespace mfas
