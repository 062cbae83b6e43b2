#include "mfas/gp.hpp"

#include "mfas/random.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace mfas {

namespace {

// d diag(K) / d log(theta_p) for every kernel hyperparameter.
Vector diagonal_derivatives(const KernelParams& params) {
  if (auto* r = std::get_if<RbfArdParams>(&params)) {
    Vector d = Vector::Zero(1 + r->dim());
    d[0] = r->variance;
    return d;
  }
  const auto& p = std::get<NargpKernelParams>(params);
  const Index m = p.dim();
  Vector d = Vector::Zero(num_hyperparameters(KernelFamily::kNargp, m));
  const double product = p.rho.variance * p.f.variance;
  d[0] = product;
  d[1 + m] = product;
  d[3 + m] = p.delta.variance;
  return d;
}

// Lower Cholesky factor of `a` + shift * I with relative jitter escalation.
// Returns false if no jitter level up to kMaxJitter succeeds.
bool factorize(const Matrix& a, double shift, double start_jitter, Matrix& chol, double& relative_jitter,
               double& jitter) {
  const double scale = a.diagonal().mean();
  for (double rel = start_jitter; rel <= kMaxJitter * (1.0 + 1e-9); rel *= 10.0) {
    const double j = rel * scale;
    Matrix shifted = a;
    shifted.diagonal().array() += shift + j;
    Eigen::LLT<Matrix> llt(shifted);
    if (llt.info() == Eigen::Success) {
      Matrix l = llt.matrixL();
      if (l.diagonal().allFinite() && (l.diagonal().array() > 0.0).all()) {
        chol = std::move(l);
        relative_jitter = rel;
        jitter = j;
        return true;
      }
    }
  }
  return false;
}

// The jitter acts as a nugget term j * [x == x'] of the kernel, so it also
// appears in test/train covariances where the rows coincide exactly. This keeps
// noiseless models interpolating their training outputs.
void add_nugget(const Matrix& test, const Matrix& train, double j, Matrix& k_star) {
  if (j == 0.0) return;
  const Index d = test.cols();
  for (Index i = 0; i < test.rows(); ++i) {
    for (Index n = 0; n < train.rows(); ++n) {
      Index c = 0;
      while (c < d && test(i, c) == train(n, c)) ++c;
      if (c == d) k_star(i, n) += j;
    }
  }
}

double output_variance(const Vector& y) {
  const double mean = y.mean();
  double v = (y.array() - mean).square().mean();
  if (!(v > 0.0)) v = y.squaredNorm() / static_cast<double>(y.size());
  if (!(v > 0.0)) v = 1.0;
  return v;
}

Vector coordinate_ranges(const Matrix& x) {
  Vector r(x.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    r[j] = x.col(j).maxCoeff() - x.col(j).minCoeff();
    if (!(r[j] > 0.0)) r[j] = 1.0;
  }
  return r;
}

// Log-parameter starting point for one restart.
Vector initial_log_params(const Matrix& x, const Vector& y, KernelFamily family, bool free_noise, int restart,
                          std::uint64_t restart_seed) {
  Rng rng(restart_seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double ln10 = std::log(10.0);
  const Vector range = coordinate_ranges(x);
  const double v0 = output_variance(y);
  auto draw = [&]() { return restart == 0 ? 0.0 : unit(rng); };

  auto rbf_block = [&](Index offset, Index d, double variance) {
    RbfArdParams p;
    p.variance = variance;
    p.lengthscales.resize(d);
    for (Index j = 0; j < d; ++j) p.lengthscales[j] = range[offset + j] * std::exp(ln10 * draw());
    return p;
  };

  KernelParams params;
  Index spatial = x.cols();
  if (family == KernelFamily::kRbfArd) {
    params = rbf_block(0, spatial, v0);
  } else {
    spatial -= 1;
    NargpKernelParams p;
    p.rho = rbf_block(0, spatial, v0);
    p.f = rbf_block(spatial, 1, 1.0);
    p.delta = rbf_block(0, spatial, v0);
    params = p;
  }
  Vector theta = to_log_params(params);
  if (!free_noise) return theta;
  Vector out(theta.size() + 1);
  // log-uniform in [1e-6, 1e-1] * v0; restart 0 sits at the log midpoint.
  double exponent = -3.5 + 2.5 * draw();
  out << theta, std::log(v0) + ln10 * exponent;
  return out;
}

}  // namespace

GpModel GpModel::condition(Matrix inputs, Vector outputs, KernelParams params, double noise_variance,
                           std::uint64_t seed) {
  return condition_with_jitter(std::move(inputs), std::move(outputs), std::move(params), noise_variance, kBaseJitter,
                               seed);
}

GpModel GpModel::condition_with_jitter(Matrix inputs, Vector outputs, KernelParams params, double noise_variance,
                                       double relative_jitter, std::uint64_t seed) {
  if (inputs.rows() < 1) throw InvalidArgument("GP needs at least one training point");
  if (outputs.size() != inputs.rows()) throw InvalidArgument("GP inputs and outputs differ in length");
  if (inputs.cols() != mfas::input_dim(params)) {
    throw InvalidArgument("GP inputs have " + std::to_string(inputs.cols()) + " columns, kernel expects " +
                          std::to_string(mfas::input_dim(params)));
  }
  if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance)) {
    throw InvalidArgument("noise variance must be nonnegative and finite");
  }
  if (!inputs.allFinite() || !outputs.allFinite()) throw InvalidArgument("GP training data must be finite");

  GpModel model;
  Matrix k = gram(inputs, params);
  if (!factorize(k, noise_variance, relative_jitter, model.chol_, model.relative_jitter_, model.jitter_)) {
    throw NumericalError("Gram matrix is not positive definite after jitter escalation to " +
                         format_double(kMaxJitter));
  }
  model.inputs_ = std::move(inputs);
  model.outputs_ = std::move(outputs);
  model.params_ = std::move(params);
  model.noise_ = noise_variance;
  model.seed_ = seed;
  model.alpha_ = model.chol_.transpose().triangularView<Eigen::Upper>().solve(
      model.chol_.triangularView<Eigen::Lower>().solve(model.outputs_));
  return model;
}

double GpModel::log_marginal_likelihood() const {
  const double n = static_cast<double>(outputs_.size());
  return -0.5 * outputs_.dot(alpha_) - chol_.diagonal().array().log().sum() -
         0.5 * n * std::log(2.0 * std::numbers::pi);
}

Vector GpModel::log_likelihood_gradient(bool with_noise) const {
  const Index n = outputs_.size();
  Matrix k_inv = Matrix::Identity(n, n);
  chol_.triangularView<Eigen::Lower>().solveInPlace(k_inv);
  chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(k_inv);
  Matrix w = alpha_ * alpha_.transpose() - k_inv;
  const double trace_w = w.trace();

  Vector grad = 0.5 * gram_gradient_contractions(inputs_, params_, w);
  // The jitter scales with mean(diag K) and so moves with the variances.
  grad += 0.5 * trace_w * relative_jitter_ * diagonal_derivatives(params_);
  if (!with_noise) return grad;
  Vector out(grad.size() + 1);
  out << grad, 0.5 * trace_w * noise_;
  return out;
}

Posterior GpModel::predict(const Matrix& test_inputs) const {
  if (test_inputs.cols() != input_dim()) throw InvalidArgument("predict: test inputs have wrong dimension");
  Matrix k_star = cross_covariance(test_inputs, inputs_, params_);
  add_nugget(test_inputs, inputs_, jitter_, k_star);
  Posterior post;
  post.mean = k_star * alpha_;
  Matrix v = chol_.triangularView<Eigen::Lower>().solve(k_star.transpose());
  Matrix prior = gram(test_inputs, params_);
  add_nugget(test_inputs, test_inputs, jitter_, prior);
  post.cov = prior - v.transpose() * v;
  post.cov = 0.5 * (post.cov + post.cov.transpose()).eval();
  return post;
}

Marginals GpModel::predict_marginals(const Matrix& test_inputs) const {
  if (test_inputs.cols() != input_dim()) throw InvalidArgument("predict: test inputs have wrong dimension");
  Matrix k_star = cross_covariance(test_inputs, inputs_, params_);
  add_nugget(test_inputs, inputs_, jitter_, k_star);
  Marginals out;
  out.mean = k_star * alpha_;
  Matrix v = chol_.triangularView<Eigen::Lower>().solve(k_star.transpose());
  out.variance = ((prior_variance(test_inputs, params_).array() + jitter_).matrix() - v.colwise().squaredNorm().transpose()).cwiseMax(0.0);
  return out;
}

Vector GpModel::predict_mean(const Matrix& test_inputs) const {
  if (test_inputs.cols() != input_dim()) throw InvalidArgument("predict: test inputs have wrong dimension");
  Matrix k_star = cross_covariance(test_inputs, inputs_, params_);
  add_nugget(test_inputs, inputs_, jitter_, k_star);
  return k_star * alpha_;
}

Matrix GpModel::sample_posterior(const Matrix& test_inputs, int n_samples, std::uint64_t seed) const {
  Posterior post = predict(test_inputs);
  return sample_gaussian(post.mean, post.cov, n_samples, seed);
}

double log_marginal_likelihood(const GpModel& model) { return model.log_marginal_likelihood(); }

Matrix sample_gaussian(const Vector& mean, const Matrix& cov, int n_samples, std::uint64_t seed) {
  const Index t = mean.size();
  if (cov.rows() != t || cov.cols() != t) throw InvalidArgument("sample_gaussian: covariance shape mismatch");
  if (n_samples < 1) throw InvalidArgument("sample_gaussian: need at least one sample");
  Matrix samples = mean.transpose().replicate(n_samples, 1);
  if (cov.cwiseAbs().maxCoeff() == 0.0) return samples;

  Matrix chol;
  double rel = 0.0;
  double jitter = 0.0;
  if (!(cov.diagonal().mean() > 0.0) || !factorize(cov, 0.0, kBaseJitter, chol, rel, jitter)) {
    throw NumericalError("posterior covariance is not factorizable after jitter escalation");
  }
  Rng rng(seed);
  std::normal_distribution<double> normal;
  Matrix z(n_samples, t);
  for (Index i = 0; i < n_samples; ++i) {
    for (Index j = 0; j < t; ++j) z(i, j) = normal(rng);
  }
  samples += z * chol.transpose();
  return samples;
}

GpModel fit(const Matrix& inputs, const Vector& outputs, KernelFamily family, const FitOptions& options,
            FitReport* report) {
  if (inputs.rows() < 1) throw InvalidArgument("fit: need at least one training point");
  if (outputs.size() != inputs.rows()) throw InvalidArgument("fit: inputs and outputs differ in length");
  if (options.restarts < 1) throw InvalidArgument("fit: restarts must be positive");
  if (family == KernelFamily::kNargp && inputs.cols() < 2) {
    throw InvalidArgument("fit: autoregressive kernel needs spatial columns plus the previous output");
  }
  const bool free_noise = options.noise == NoisePolicy::kFree;
  const Index spatial = family == KernelFamily::kRbfArd ? inputs.cols() : inputs.cols() - 1;
  const Index n_kernel = num_hyperparameters(family, spatial);

  auto build = [&](const Vector& theta) {
    KernelParams params = from_log_params(family, spatial, theta.head(n_kernel));
    double noise = free_noise ? std::exp(theta[n_kernel]) : 0.0;
    return GpModel::condition(inputs, outputs, std::move(params), noise, options.seed);
  };

  Objective objective = [&](const Vector& theta, Vector& grad) -> double {
    try {
      GpModel model = build(theta);
      double value = -model.log_marginal_likelihood();
      grad = -model.log_likelihood_gradient(free_noise);
      return value;
    } catch (const Error&) {
      grad.setZero(theta.size());
      return std::numeric_limits<double>::infinity();
    }
  };

  FitReport local;
  FitReport& rep = report ? *report : local;
  rep.restarts.clear();
  double best_value = -std::numeric_limits<double>::infinity();
  std::optional<Vector> best_theta;

  for (int r = 0; r < options.restarts; ++r) {
    RestartDiagnostics diag;
    diag.seed = derive_seed(options.seed, {static_cast<std::uint64_t>(r)});
    Vector theta0 = initial_log_params(inputs, outputs, family, free_noise, r, diag.seed);
    try {
      Vector g0(theta0.size());
      diag.initial_log_likelihood = -objective(theta0, g0);
      LbfgsResult res = lbfgs_minimize(objective, theta0, options.optimizer);
      diag.final_log_likelihood = -res.value;
      diag.iterations = res.iterations;
      diag.status = to_string(res.status);
      if (diag.final_log_likelihood > best_value) {
        best_value = diag.final_log_likelihood;
        best_theta = res.x;
        rep.best = rep.restarts.size();
      }
    } catch (const Error& e) {
      diag.failed = true;
      diag.status = e.what();
    }
    rep.restarts.push_back(diag);
  }

  if (!best_theta) {
    std::ostringstream msg;
    msg << "GP fit failed in all " << options.restarts << " restarts:";
    for (std::size_t i = 0; i < rep.restarts.size(); ++i) msg << " [" << i << "] " << rep.restarts[i].status << ";";
    throw NumericalError(msg.str());
  }
  return build(*best_theta);
}

}  // namespace mfas
