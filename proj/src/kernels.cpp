#include "mfas/kernels.hpp"

#include <cmath>
#include <string>

namespace mfas {

namespace {

void check_same_dim(Index a, Index b, const char* what) {
  if (a != b) {
    throw InvalidArgument(std::string(what) + ": dimension mismatch (" + std::to_string(a) + " vs " +
                          std::to_string(b) + ")");
  }
}

// Squared scaled distance between rows, summed over the first `d` columns starting at `offset`.
template <typename A, typename B>
double scaled_sqdist(const A& a, const B& b, const Vector& lengthscales, Index offset) {
  double s = 0.0;
  for (Index j = 0; j < lengthscales.size(); ++j) {
    double t = (a[offset + j] - b[offset + j]) / lengthscales[j];
    s += t * t;
  }
  return s;
}

// RBF gram over columns [offset, offset + d) of `points`. Exactly symmetric.
Matrix rbf_gram_block(const Matrix& points, Index offset, const RbfArdParams& p) {
  const Index n = points.rows();
  Matrix k(n, n);
  for (Index i = 0; i < n; ++i) {
    k(i, i) = p.variance;
    for (Index l = 0; l < i; ++l) {
      double v = p.variance * std::exp(-0.5 * scaled_sqdist(points.row(i), points.row(l), p.lengthscales, offset));
      k(i, l) = v;
      k(l, i) = v;
    }
  }
  return k;
}

Matrix rbf_cross_block(const Matrix& a, const Matrix& b, Index offset, const RbfArdParams& p) {
  Matrix k(a.rows(), b.rows());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index l = 0; l < b.rows(); ++l) {
      k(i, l) = p.variance * std::exp(-0.5 * scaled_sqdist(a.row(i), b.row(l), p.lengthscales, offset));
    }
  }
  return k;
}

// [sum W.*K, sum_ik W_ik K_ik (x_ij - x_kj)^2 / l_j^2 for each j].
Vector rbf_contractions(const Matrix& points, Index offset, const RbfArdParams& p, const Matrix& k,
                        const Matrix& w) {
  const Index d = p.dim();
  Vector out = Vector::Zero(1 + d);
  const Index n = points.rows();
  for (Index i = 0; i < n; ++i) {
    for (Index l = 0; l < n; ++l) {
      double wk = w(i, l) * k(i, l);
      out[0] += wk;
      if (l == i) continue;
      for (Index j = 0; j < d; ++j) {
        double t = (points(i, offset + j) - points(l, offset + j)) / p.lengthscales[j];
        out[1 + j] += wk * t * t;
      }
    }
  }
  return out;
}

// dK/dlog(theta) for one RBF block; q = 0 variance, q = 1 + j lengthscale j.
Matrix rbf_gradient_block(const Matrix& points, Index offset, const RbfArdParams& p, const Matrix& k, Index q) {
  if (q == 0) return k;
  const Index j = q - 1;
  const Index n = points.rows();
  Matrix g(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index l = 0; l < n; ++l) {
      double t = (points(i, offset + j) - points(l, offset + j)) / p.lengthscales[j];
      g(i, l) = k(i, l) * t * t;
    }
  }
  return g;
}

void append_log(const RbfArdParams& p, Vector& out, Index& pos) {
  out[pos++] = std::log(p.variance);
  for (Index j = 0; j < p.dim(); ++j) out[pos++] = std::log(p.lengthscales[j]);
}

RbfArdParams read_log(const Eigen::Ref<const Vector>& v, Index& pos, Index d) {
  RbfArdParams p;
  p.variance = std::exp(v[pos++]);
  p.lengthscales.resize(d);
  for (Index j = 0; j < d; ++j) p.lengthscales[j] = std::exp(v[pos++]);
  return p;
}

}  // namespace

void RbfArdParams::validate() const {
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw InvalidArgument("kernel variance must be positive and finite");
  }
  if (lengthscales.size() == 0) throw InvalidArgument("kernel needs at least one lengthscale");
  for (Index j = 0; j < lengthscales.size(); ++j) {
    if (!(lengthscales[j] > 0.0) || !std::isfinite(lengthscales[j])) {
      throw InvalidArgument("kernel lengthscales must be positive and finite");
    }
  }
}

void NargpKernelParams::validate() const {
  rho.validate();
  f.validate();
  delta.validate();
  if (f.dim() != 1) throw InvalidArgument("autoregressive factor takes exactly one lengthscale");
  if (rho.dim() != delta.dim()) throw InvalidArgument("rho and delta factors must share the spatial dimension");
}

KernelFamily family_of(const KernelParams& params) {
  return std::holds_alternative<RbfArdParams>(params) ? KernelFamily::kRbfArd : KernelFamily::kNargp;
}

Index input_dim(const KernelParams& params) {
  if (auto* r = std::get_if<RbfArdParams>(&params)) return r->dim();
  return std::get<NargpKernelParams>(params).dim() + 1;
}

double rbf_ard(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b, const RbfArdParams& params) {
  params.validate();
  check_same_dim(a.size(), params.dim(), "rbf_ard");
  check_same_dim(b.size(), params.dim(), "rbf_ard");
  return params.variance * std::exp(-0.5 * scaled_sqdist(a, b, params.lengthscales, 0));
}

double nargp_kernel(const Eigen::Ref<const Vector>& a, double fa, const Eigen::Ref<const Vector>& b, double fb,
                    const NargpKernelParams& params) {
  params.validate();
  if (!std::isfinite(fa) || !std::isfinite(fb)) throw InvalidArgument("nargp_kernel: non-finite previous output");
  Vector va(1), vb(1);
  va << fa;
  vb << fb;
  return rbf_ard(a, b, params.rho) * rbf_ard(va, vb, params.f) + rbf_ard(a, b, params.delta);
}

double kernel_value(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b,
                    const KernelParams& params) {
  if (auto* r = std::get_if<RbfArdParams>(&params)) return rbf_ard(a, b, *r);
  const auto& p = std::get<NargpKernelParams>(params);
  const Index m = p.dim();
  check_same_dim(a.size(), m + 1, "kernel_value");
  check_same_dim(b.size(), m + 1, "kernel_value");
  return nargp_kernel(a.head(m), a[m], b.head(m), b[m], p);
}

Matrix gram(const Matrix& points, const RbfArdParams& params) {
  params.validate();
  check_same_dim(points.cols(), params.dim(), "gram");
  return rbf_gram_block(points, 0, params);
}

Matrix gram(const Matrix& points, const Vector& fvals, const NargpKernelParams& params) {
  params.validate();
  check_same_dim(points.cols(), params.dim(), "gram");
  check_same_dim(fvals.size(), points.rows(), "gram fvals");
  Matrix augmented(points.rows(), points.cols() + 1);
  augmented << points, fvals;
  return gram(augmented, KernelParams(params));
}

Matrix gram(const Matrix& points, const KernelParams& params) {
  if (auto* r = std::get_if<RbfArdParams>(&params)) return gram(points, *r);
  const auto& p = std::get<NargpKernelParams>(params);
  p.validate();
  const Index m = p.dim();
  check_same_dim(points.cols(), m + 1, "gram");
  Matrix k_rho = rbf_gram_block(points, 0, p.rho);
  Matrix k_f = rbf_gram_block(points, m, p.f);
  Matrix k_delta = rbf_gram_block(points, 0, p.delta);
  return (k_rho.array() * k_f.array()).matrix() + k_delta;
}

Matrix cross_covariance(const Matrix& a, const Matrix& b, const KernelParams& params) {
  const Index d = input_dim(params);
  check_same_dim(a.cols(), d, "cross_covariance");
  check_same_dim(b.cols(), d, "cross_covariance");
  if (auto* r = std::get_if<RbfArdParams>(&params)) {
    r->validate();
    return rbf_cross_block(a, b, 0, *r);
  }
  const auto& p = std::get<NargpKernelParams>(params);
  p.validate();
  const Index m = p.dim();
  Matrix k_rho = rbf_cross_block(a, b, 0, p.rho);
  Matrix k_f = rbf_cross_block(a, b, m, p.f);
  Matrix k_delta = rbf_cross_block(a, b, 0, p.delta);
  return (k_rho.array() * k_f.array()).matrix() + k_delta;
}

Vector prior_variance(const Matrix& points, const KernelParams& params) {
  double v = 0.0;
  if (auto* r = std::get_if<RbfArdParams>(&params)) {
    v = r->variance;
  } else {
    const auto& p = std::get<NargpKernelParams>(params);
    v = p.rho.variance * p.f.variance + p.delta.variance;
  }
  return Vector::Constant(points.rows(), v);
}

Index num_hyperparameters(KernelFamily family, Index spatial_dim) {
  return family == KernelFamily::kRbfArd ? 1 + spatial_dim : 2 * (1 + spatial_dim) + 2;
}

Vector to_log_params(const KernelParams& params) {
  Index pos = 0;
  if (auto* r = std::get_if<RbfArdParams>(&params)) {
    Vector out(1 + r->dim());
    append_log(*r, out, pos);
    return out;
  }
  const auto& p = std::get<NargpKernelParams>(params);
  Vector out(num_hyperparameters(KernelFamily::kNargp, p.dim()));
  append_log(p.rho, out, pos);
  append_log(p.f, out, pos);
  append_log(p.delta, out, pos);
  return out;
}

KernelParams from_log_params(KernelFamily family, Index spatial_dim, const Eigen::Ref<const Vector>& log_params) {
  if (log_params.size() != num_hyperparameters(family, spatial_dim)) {
    throw InvalidArgument("log-parameter vector has wrong length");
  }
  Index pos = 0;
  if (family == KernelFamily::kRbfArd) return read_log(log_params, pos, spatial_dim);
  NargpKernelParams p;
  p.rho = read_log(log_params, pos, spatial_dim);
  p.f = read_log(log_params, pos, 1);
  p.delta = read_log(log_params, pos, spatial_dim);
  return p;
}

Matrix gram_gradient(const Matrix& points, const KernelParams& params, Index p) {
  if (auto* r = std::get_if<RbfArdParams>(&params)) {
    if (p < 0 || p > r->dim()) throw InvalidArgument("hyperparameter index out of range");
    return rbf_gradient_block(points, 0, *r, gram(points, *r), p);
  }
  const auto& np = std::get<NargpKernelParams>(params);
  const Index m = np.dim();
  check_same_dim(points.cols(), m + 1, "gram_gradient");
  Matrix k_rho = rbf_gram_block(points, 0, np.rho);
  Matrix k_f = rbf_gram_block(points, m, np.f);
  if (p < 1 + m) {
    return (rbf_gradient_block(points, 0, np.rho, k_rho, p).array() * k_f.array()).matrix();
  }
  if (p < 3 + m) {
    return (k_rho.array() * rbf_gradient_block(points, m, np.f, k_f, p - (1 + m)).array()).matrix();
  }
  if (p < 4 + 2 * m) {
    Matrix k_delta = rbf_gram_block(points, 0, np.delta);
    return rbf_gradient_block(points, 0, np.delta, k_delta, p - (3 + m));
  }
  throw InvalidArgument("hyperparameter index out of range");
}

Vector gram_gradient_contractions(const Matrix& points, const KernelParams& params, const Matrix& weights) {
  check_same_dim(weights.rows(), points.rows(), "gram_gradient_contractions");
  check_same_dim(weights.cols(), points.rows(), "gram_gradient_contractions");
  if (auto* r = std::get_if<RbfArdParams>(&params)) {
    check_same_dim(points.cols(), r->dim(), "gram_gradient_contractions");
    return rbf_contractions(points, 0, *r, rbf_gram_block(points, 0, *r), weights);
  }
  const auto& p = std::get<NargpKernelParams>(params);
  const Index m = p.dim();
  check_same_dim(points.cols(), m + 1, "gram_gradient_contractions");
  Matrix k_rho = rbf_gram_block(points, 0, p.rho);
  Matrix k_f = rbf_gram_block(points, m, p.f);
  Matrix k_delta = rbf_gram_block(points, 0, p.delta);
  Matrix w_rho = (weights.array() * k_f.array()).matrix();
  Matrix w_f = (weights.array() * k_rho.array()).matrix();
  Vector out(num_hyperparameters(KernelFamily::kNargp, m));
  out << rbf_contractions(points, 0, p.rho, k_rho, w_rho), rbf_contractions(points, m, p.f, k_f, w_f),
      rbf_contractions(points, 0, p.delta, k_delta, weights);
  return out;
}

}  // namespace mfas
