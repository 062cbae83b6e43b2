#include <gtest/gtest.h>

#include "mfas/gp.hpp"
#include "oracles.hpp"

#include <cmath>
#include <algorithm>
#include <numbers>
#include <numeric>

using namespace mfas;
namespace ts = mfas::testing;

namespace {

RbfArdParams rbf(double variance, Vector ls) { return {variance, std::move(ls)}; }

Matrix sine_inputs() { return Vector::LinSpaced(20, 0.0, 1.0); }

Vector sine_outputs(const Matrix& x) { return (2.0 * std::numbers::pi * x.col(0).array()).sin().matrix(); }

KernelParams random_params(KernelFamily family, Index m, std::mt19937_64& rng, double lo = -0.7, double hi = 0.7) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector theta(num_hyperparameters(family, m));
  for (Index i = 0; i < theta.size(); ++i) theta[i] = u(rng);
  return from_log_params(family, m, theta);
}

// n points on [0, 2n]^d, one per width-2 stratum in every coordinate, so no
// two points nearly coincide.
Matrix stratified(Index n, Index d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.25, 0.75);
  Matrix x(n, d);
  std::vector<Index> perm(static_cast<std::size_t>(n));
  for (Index j = 0; j < d; ++j) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (Index i = 0; i < n; ++i) x(i, j) = 2.0 * (static_cast<double>(perm[i]) + u(rng));
  }
  return x;
}

}  // namespace

TEST(LogLikelihood, SinglePointAtZero) {
  auto model = GpModel::condition(Matrix::Zero(1, 1), Vector::Zero(1), rbf(1.0, Vector::Ones(1)));
  EXPECT_NEAR(model.log_marginal_likelihood(), -0.5 * std::log(2 * std::numbers::pi), 1e-7);
}

TEST(LogLikelihood, SinglePointAtTwo) {
  auto model = GpModel::condition(Matrix::Zero(1, 1), Vector::Constant(1, 2.0), rbf(1.0, Vector::Ones(1)));
  EXPECT_NEAR(model.log_marginal_likelihood(), -2.0 - 0.5 * std::log(2 * std::numbers::pi), 1e-7);
}

TEST(LogLikelihood, MatchesDenseInverse) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) {
    Matrix x = ts::random_matrix(2, 2, rng);
    Vector y = ts::random_matrix(2, 1, rng);
    auto params = random_params(KernelFamily::kRbfArd, 2, rng);
    auto model = GpModel::condition(x, y, params, 0.05);
    Matrix k = gram(x, params);
    k.diagonal().array() += 0.05 + model.jitter();
    EXPECT_NEAR(model.log_marginal_likelihood(), ts::dense_log_likelihood(k, y), 1e-10);
  }
}

TEST(LogLikelihood, CholeskyReconstructsShiftedGram) {
  std::mt19937_64 rng(2);
  Matrix x = ts::random_matrix(12, 3, rng);
  auto params = random_params(KernelFamily::kRbfArd, 3, rng);
  auto model = GpModel::condition(x, ts::random_matrix(12, 1, rng), params, 0.01);
  Matrix k = gram(x, params);
  k.diagonal().array() += 0.01 + model.jitter();
  Matrix rebuilt = model.chol() * model.chol().transpose();
  EXPECT_LE((rebuilt - k).norm() / k.norm(), 1e-10);
}

TEST(LogLikelihood, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 16; ++t) {
    const KernelFamily family = t % 2 ? KernelFamily::kNargp : KernelFamily::kRbfArd;
    const bool with_noise = (t / 2) % 2 == 1;
    const Index m = 1 + t % 3, n = 3 + t % 13;
    const Index cols = family == KernelFamily::kNargp ? m + 1 : m;
    // Spread-out points and moderate lengthscales keep the Gram matrix well
    // conditioned, where central differences are a trustworthy reference.
    Matrix x = stratified(n, cols, rng);
    Vector y = ts::random_matrix(n, 1, rng);
    auto params = random_params(family, m, rng, -0.7, 0.2);
    Vector theta = to_log_params(params);
    if (with_noise) {
      theta.conservativeResize(theta.size() + 1);
      theta[theta.size() - 1] = std::log(0.05);
    }
    const Index nk = num_hyperparameters(family, m);
    auto lml = [&](const Vector& th) {
      double noise = with_noise ? std::exp(th[nk]) : 0.0;
      return GpModel::condition(x, y, from_log_params(family, m, th.head(nk)), noise).log_marginal_likelihood();
    };
    double noise = with_noise ? 0.05 : 0.0;
    Vector analytic = GpModel::condition(x, y, params, noise).log_likelihood_gradient(with_noise);
    Vector fd = ts::central_difference(lml, theta, 1e-5);
    ASSERT_EQ(analytic.size(), fd.size());
    double floor = 1e-4 * std::max(1.0, fd.lpNorm<Eigen::Infinity>());
    EXPECT_LT(ts::max_relative_error(analytic, fd, floor), 1e-5) << "trial " << t;
  }
}

TEST(Predict, TrainingPointIsInterpolated) {
  Matrix x = sine_inputs();
  Vector y = sine_outputs(x);
  auto model = GpModel::condition(x, y, rbf(1.0, Vector::Constant(1, 0.2)));
  Posterior post = model.predict(x.row(7));
  EXPECT_NEAR(post.mean[0], y[7], 1e-6);
  EXPECT_LE(post.cov(0, 0), 1e-6);
}

TEST(Predict, FarPointRevertsToPrior) {
  auto model = GpModel::condition(sine_inputs(), sine_outputs(sine_inputs()), rbf(1.7, Vector::Constant(1, 0.2)));
  Posterior post = model.predict(Matrix::Constant(1, 1, 50.0));
  EXPECT_NEAR(post.mean[0], 0.0, 1e-12);
  EXPECT_NEAR(post.cov(0, 0), 1.7, 1e-7);
}

TEST(Predict, HandCaseMatchesExplicitInverse) {
  Matrix x(2, 1);
  x << 0.0, 1.0;
  Vector y(2);
  y << 1.0, -0.5;
  auto params = rbf(1.2, Vector::Constant(1, 0.8));
  auto model = GpModel::condition(x, y, params);
  Matrix test = Matrix::Constant(1, 1, 0.3);
  Matrix k = gram(x, params);
  k.diagonal().array() += model.jitter();
  // The jitter is a nugget of the kernel, so it also sits on the test prior.
  Matrix k_test = gram(test, params);
  k_test(0, 0) += model.jitter();
  auto expected = ts::dense_posterior(k, cross_covariance(test, x, params), k_test, y);
  Posterior post = model.predict(test);
  EXPECT_NEAR(post.mean[0], expected.mean[0], 1e-10);
  EXPECT_NEAR(post.cov(0, 0), expected.cov(0, 0), 1e-10);
}

TEST(Predict, PosteriorVarianceBelowPrior) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 10; ++t) {
    auto params = random_params(KernelFamily::kNargp, 2, rng);
    auto model = GpModel::condition(ts::random_matrix(8, 3, rng), ts::random_matrix(8, 1, rng), params);
    Matrix test = ts::random_matrix(15, 3, rng, -2.0, 2.0);
    Posterior post = model.predict(test);
    Vector prior = prior_variance(test, params);
    EXPECT_TRUE(post.cov.isApprox(post.cov.transpose()));
    for (Index i = 0; i < test.rows(); ++i) {
      EXPECT_LE(post.cov(i, i), prior[i] + model.jitter() + 1e-8);
      EXPECT_GE(post.cov(i, i), -1e-8);
    }
    Marginals marg = model.predict_marginals(test);
    EXPECT_LT((marg.mean - post.mean).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Predict, DimensionMismatchThrows) {
  auto model = GpModel::condition(Matrix::Zero(1, 2), Vector::Zero(1), rbf(1.0, Vector::Ones(2)));
  EXPECT_THROW(model.predict(Matrix::Zero(1, 3)), InvalidArgument);
}

TEST(Conditioning, DuplicatePointsNeedJitterEscalation) {
  Matrix x = Matrix::Constant(4, 1, 0.5);
  auto model = GpModel::condition(x, Vector::Constant(4, 1.0), rbf(1.0, Vector::Ones(1)));
  EXPECT_GE(model.relative_jitter(), kBaseJitter);
  EXPECT_TRUE(std::isfinite(model.log_marginal_likelihood()));
}

TEST(Sampling, DegenerateCovarianceReturnsMean) {
  Vector mean(3);
  mean << 1.0, -2.0, 0.5;
  Matrix s = sample_gaussian(mean, Matrix::Zero(3, 3), 5, 42);
  for (Index i = 0; i < 5; ++i) EXPECT_TRUE(s.row(i).transpose() == mean);
}

TEST(Sampling, MonteCarloMomentsMatchPosterior) {
  Matrix x = sine_inputs();
  auto model = GpModel::condition(x, sine_outputs(x), rbf(1.0, Vector::Constant(1, 0.3)));
  Matrix test = Matrix::Constant(1, 1, 1.4);
  Posterior post = model.predict(test);
  const int n = 100000;
  Matrix draws = model.sample_posterior(test, n, 99);
  double mean = draws.col(0).mean();
  double var = (draws.col(0).array() - mean).square().sum() / (n - 1);
  double sd = std::sqrt(post.cov(0, 0));
  EXPECT_LT(std::abs(mean - post.mean[0]), 4.0 * sd / std::sqrt(static_cast<double>(n)));
  EXPECT_LT(std::abs(var / post.cov(0, 0) - 1.0), 0.05);
}

TEST(Sampling, FixedSeedIsDeterministic) {
  Matrix x = sine_inputs();
  auto model = GpModel::condition(x, sine_outputs(x), rbf(1.0, Vector::Constant(1, 0.3)));
  Matrix test = Vector::LinSpaced(5, -0.5, 1.5);
  EXPECT_TRUE(model.sample_posterior(test, 7, 3) == model.sample_posterior(test, 7, 3));
  EXPECT_FALSE(model.sample_posterior(test, 7, 3) == model.sample_posterior(test, 7, 4));
}

TEST(Fit, ConstantOutputsAreReproduced) {
  std::mt19937_64 rng(5);
  Matrix x = ts::random_matrix(10, 2, rng);
  const double c = 3.5;
  FitOptions options;
  options.restarts = 3;
  auto model = fit(x, Vector::Constant(10, c), KernelFamily::kRbfArd, options);
  Vector pred = model.predict_mean(ts::random_matrix(20, 2, rng, -0.8, 0.8));
  EXPECT_LT((pred.array() - c).abs().maxCoeff(), 1e-3 * c);
}

TEST(Fit, NoiselessSineInterpolates) {
  Matrix x = sine_inputs();
  Vector y = sine_outputs(x);
  FitOptions options;
  options.restarts = 5;
  auto model = fit(x, y, KernelFamily::kRbfArd, options);
  EXPECT_LT((model.predict_mean(x) - y).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Fit, RestartStabilityAcrossSeeds) {
  Matrix x = sine_inputs();
  Vector y = sine_outputs(x);
  FitOptions a, b;
  a.restarts = b.restarts = 5;
  a.seed = 1;
  b.seed = 2;
  double la = fit(x, y, KernelFamily::kRbfArd, a).log_marginal_likelihood();
  double lb = fit(x, y, KernelFamily::kRbfArd, b).log_marginal_likelihood();
  EXPECT_LT(std::abs(la - lb), 0.01 * std::max(std::abs(la), std::abs(lb)));
}

TEST(Fit, MonotoneInRestarts) {
  std::mt19937_64 rng(6);
  Matrix x = ts::random_matrix(15, 3, rng);
  Vector y = (x.col(0).array() * 2.0).sin().matrix() + x.col(1).cwiseAbs2();
  double previous = -std::numeric_limits<double>::infinity();
  for (int r = 1; r <= 4; ++r) {
    FitOptions options;
    options.restarts = r;
    options.seed = 17;
    options.noise = NoisePolicy::kFree;
    double best = fit(x, y, KernelFamily::kRbfArd, options).log_marginal_likelihood();
    EXPECT_GE(best, previous);
    previous = best;
  }
}

TEST(Fit, DeterministicGivenSeed) {
  std::mt19937_64 rng(7);
  Matrix x = ts::random_matrix(10, 2, rng);
  Vector y = x.rowwise().sum();
  FitOptions options;
  options.restarts = 3;
  options.seed = 5;
  auto a = fit(x, y, KernelFamily::kRbfArd, options);
  auto b = fit(x, y, KernelFamily::kRbfArd, options);
  EXPECT_TRUE(to_log_params(a.kernel_params()) == to_log_params(b.kernel_params()));
}

TEST(Fit, ReportListsEveryRestart) {
  Matrix x = sine_inputs();
  FitOptions options;
  options.restarts = 4;
  FitReport report;
  auto model = fit(x, sine_outputs(x), KernelFamily::kRbfArd, options, &report);
  ASSERT_EQ(report.restarts.size(), 4u);
  EXPECT_DOUBLE_EQ(report.restarts[report.best].final_log_likelihood, model.log_marginal_likelihood());
}

TEST(Fit, InvalidArguments) {
  FitOptions options;
  options.restarts = 0;
  EXPECT_THROW(fit(Matrix::Zero(2, 1), Vector::Zero(2), KernelFamily::kRbfArd, options), InvalidArgument);
  options.restarts = 1;
  EXPECT_THROW(fit(Matrix::Zero(2, 1), Vector::Zero(3), KernelFamily::kRbfArd, options), InvalidArgument);
}
