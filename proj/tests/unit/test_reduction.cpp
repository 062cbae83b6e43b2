#include <gtest/gtest.h>

#include "mfas/benchmarks.hpp"
#include "mfas/metrics.hpp"
#include "mfas/reduction.hpp"
#include "mfas/sampling.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace mfas;

namespace {

Dataset ridge_data(Index n, std::uint64_t seed) {
  Vector w(3);
  w << 0.6, -0.8, 0.0;
  Matrix x = sample({SamplerKind::kLhs, n, Box::centered(3), seed});
  Vector y(n);
  Matrix g(n, 3);
  for (Index i = 0; i < n; ++i) {
    const double t = w.dot(x.row(i).transpose());
    y[i] = std::sin(2 * t);
    g.row(i) = 2 * std::cos(2 * t) * w.transpose();
  }
  return Dataset(x, y, g);
}

Dataset paraboloid_data(Index n, std::uint64_t seed) {
  const Benchmark bench = paraboloid_benchmark();
  Matrix x = sample({SamplerKind::kLhs, n, bench.box, seed});
  Vector y(n);
  Matrix g(n, 2);
  for (Index i = 0; i < n; ++i) {
    y[i] = bench.evaluate(x.row(i).transpose());
    g.row(i) = bench.gradient(x.row(i).transpose()).transpose();
  }
  return Dataset(x, y, g);
}

FitOptions quick_fit() {
  FitOptions fo;
  fo.restarts = 3;
  fo.seed = 11;
  return fo;
}

}  // namespace

TEST(ReducerTest, LinearProjects) {
  Matrix w(3, 1);
  w << 1, 2, 3;
  Matrix x(2, 3);
  x << 1, 1, 1, 0, 1, -1;
  Matrix z = Reducer::linear(w).reduce(x);
  EXPECT_EQ(z(0, 0), 6.0);
  EXPECT_EQ(z(1, 0), -1.0);
}

TEST(ReducerTest, IdentityNetKeepsLeadingCoordinates) {
  std::mt19937_64 rng(3);
  Matrix x = mfas::testing::random_matrix(5, 3, rng);
  Reducer r = Reducer::nonlinear(RevNet::identity(3, 4), 2);
  EXPECT_EQ(r.output_dim(), 2);
  EXPECT_TRUE(r.reduce(x) == x.leftCols(2));
}

TEST(ReducerTest, AccessorsMatchKind) {
  Reducer lin = Reducer::linear(Matrix::Identity(2, 1));
  Reducer nl = Reducer::nonlinear(RevNet::identity(2, 1));
  EXPECT_EQ(lin.kind(), ReducerKind::kActiveSubspace);
  EXPECT_EQ(nl.kind(), ReducerKind::kNll);
  EXPECT_THROW(lin.net(), InvalidArgument);
  EXPECT_THROW(nl.projection(), InvalidArgument);
  EXPECT_THROW(lin.reduce(Matrix::Zero(1, 3)), InvalidArgument);
  EXPECT_THROW(Reducer::linear(Matrix::Zero(2, 3)), InvalidArgument);
  EXPECT_THROW(Reducer::nonlinear(RevNet::identity(2, 1), 3), InvalidArgument);
}

TEST(ReducerTest, KindNamesRoundTrip) {
  for (auto k : {ReducerKind::kActiveSubspace, ReducerKind::kNll}) EXPECT_EQ(parse_reducer_kind(to_string(k)), k);
  EXPECT_THROW(parse_reducer_kind("pca"), InvalidArgument);
}

TEST(AsSurface, RidgeFunctionIsOneDimensional) {
  Dataset train = ridge_data(40, 1), test = ridge_data(300, 2);
  auto as = as_response_surface(train, std::nullopt, quick_fit());
  EXPECT_EQ(as.decomposition.active_dim, 1);
  EXPECT_EQ(as.surface.reducer.output_dim(), 1);
  EXPECT_GT(r2_score(test.outputs(), as.surface.predict_mean(test.inputs())), 0.999);
}

TEST(AsSurface, ParaboloidOneDimensionalSurrogate) {
  Dataset train = paraboloid_data(60, 4), test = paraboloid_data(1000, 5);
  auto as = as_response_surface(train, 1, quick_fit());
  EXPECT_GT(r2_score(test.outputs(), as.surface.predict_mean(test.inputs())), 0.9);
}

TEST(AsSurface, PistonSummaryTrendIsMonotone) {
  const Benchmark piston = piston_benchmark();
  Dataset train = evaluate_centered(piston, sample({SamplerKind::kLhs, 100, Box::centered(7), 6}));
  auto as = as_response_surface(train, 1, quick_fit());
  // Along the active coordinate the surrogate mean is monotone.
  Matrix line = Vector::LinSpaced(50, -1.0, 1.0) * as.decomposition.active_directions().transpose();
  Vector mean = as.surface.predict_mean(line);
  Vector diff = mean.tail(49) - mean.head(49);
  EXPECT_TRUE((diff.array() > 0).all() || (diff.array() < 0).all());
}

TEST(AsSurface, Errors) {
  Dataset train = ridge_data(10, 1);
  EXPECT_THROW(as_response_surface(train, 3, quick_fit()), InvalidArgument);
  EXPECT_THROW(as_response_surface(train.head(2), 1, quick_fit()), InvalidArgument);
}

TEST(NllSurface, IdentityNetEqualsFirstCoordinateGp) {
  Dataset train = ridge_data(25, 7);
  Dataset test = ridge_data(20, 8);
  ResponseSurface nll = nll_response_surface(RevNet::identity(3, 2), train, quick_fit());
  Matrix e1 = Matrix::Zero(3, 1);
  e1(0, 0) = 1.0;
  ResponseSurface lin = fit_response_surface(Reducer::linear(e1), train, quick_fit());
  EXPECT_LT((nll.predict_mean(test.inputs()) - lin.predict_mean(test.inputs())).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(nll.gp.input_dim(), 1);
}

TEST(NllSurface, ParaboloidNotWorseThanActiveSubspace) {
  Dataset train = paraboloid_data(60, 4), test = paraboloid_data(1000, 5);
  auto as = as_response_surface(train, 1, quick_fit());
  NllOptions options;
  options.seed = 2;
  RevNet net = train_nll(train, options);
  ResponseSurface nll = nll_response_surface(net, train, quick_fit());
  const double r2_as = r2_score(test.outputs(), as.surface.predict_mean(test.inputs()));
  const double r2_nll = r2_score(test.outputs(), nll.predict_mean(test.inputs()));
  EXPECT_GE(r2_nll, r2_as - 0.05) << "AS " << r2_as;
}

TEST(NllSurface, PistonSanityFloor) {
  const Benchmark piston = piston_benchmark();
  Dataset train = evaluate_centered(piston, sample({SamplerKind::kLhs, 100, Box::centered(7), 9}));
  Dataset test = evaluate_centered(piston, sample({SamplerKind::kLhs, 500, Box::centered(7), 10}));
  NllOptions options;
  options.seed = 1;
  RevNet net = train_nll(train, options);
  ResponseSurface nll = nll_response_surface(net, train, quick_fit());
  EXPECT_GT(r2_score(test.outputs(), nll.predict_mean(test.inputs())), 0.0);
}
