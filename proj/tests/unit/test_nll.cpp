#include <gtest/gtest.h>

#include "mfas/nll.hpp"
#include "mfas/sampling.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace mfas;
namespace ts = mfas::testing;

namespace {

// Loss computed through the dense Jacobian: w = J^{-T} grad f per sample.
double dense_loss(const RevNet& net, const Matrix& x, const Matrix& g) {
  double total = 0.0;
  const Index mp = net.padded_dim();
  for (Index s = 0; s < x.rows(); ++s) {
    Vector grad = Vector::Zero(mp);
    grad.head(net.dim()) = g.row(s).transpose();
    if (grad.squaredNorm() == 0.0) continue;
    Vector w = net.jacobian(x.row(s).transpose()).transpose().fullPivLu().solve(grad);
    const Index last = net.padded() ? mp - 1 : mp;
    total += w.segment(1, last - 1).squaredNorm() / grad.squaredNorm();
  }
  return total / static_cast<double>(x.rows());
}

RevNet random_biased_net(Index m, int layers, std::uint64_t seed) {
  RevNet net = RevNet::random(m, layers, 0.25, seed);
  std::mt19937_64 rng(seed + 1);
  Vector theta = net.parameters() + 0.3 * ts::random_matrix(net.num_parameters(), 1, rng);
  net.set_parameters(theta);
  return net;
}

}  // namespace

TEST(RevNet, ZeroStepIsIdentity) {
  RevNet net = RevNet::random(4, 3, 0.0, 1);
  std::mt19937_64 rng(2);
  Matrix x = ts::random_matrix(5, 4, rng);
  EXPECT_TRUE(net.forward(x) == x);
}

TEST(RevNet, ZeroWeightsAreIdentity) {
  RevNet net = RevNet::identity(5, 4);
  std::mt19937_64 rng(3);
  Matrix x = ts::random_matrix(6, 5, rng);
  EXPECT_TRUE(net.forward(x).leftCols(5) == x);
  EXPECT_TRUE((net.forward(x).col(5).array() == 0.0).all());
  EXPECT_TRUE(net.inverse(net.forward(x)) == x);
}

TEST(RevNet, PaddingAndBlocks) {
  RevNet odd = RevNet::random(7, 2, 0.25, 1);
  EXPECT_TRUE(odd.padded());
  EXPECT_EQ(odd.padded_dim(), 8);
  EXPECT_EQ(odd.half(), 4);
  RevNet even = RevNet::random(6, 2, 0.25, 1);
  EXPECT_FALSE(even.padded());
  EXPECT_EQ(even.half(), 3);
}

TEST(RevNet, RoundTripIsExact) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 20; ++t) {
    const Index m = 1 + t % 12;
    RevNet net = random_biased_net(m, 4, static_cast<std::uint64_t>(t));
    Matrix x = ts::random_matrix(100, m, rng);
    EXPECT_LT((net.inverse(net.forward(x)) - x).cwiseAbs().maxCoeff(), 1e-10) << "m = " << m;
  }
}

TEST(RevNet, Injective) {
  RevNet net = random_biased_net(3, 4, 7);
  Vector a(3), b(3);
  a << 0.1, 0.2, 0.3;
  b << 0.1, 0.2, 0.30001;
  EXPECT_GT((net.forward_point(a) - net.forward_point(b)).norm(), 0.0);
}

TEST(RevNet, DimensionMismatch) {
  RevNet net = RevNet::random(3, 2, 0.25, 1);
  EXPECT_THROW(net.forward(Matrix::Zero(2, 4)), InvalidArgument);
  EXPECT_THROW(net.inverse(Matrix::Zero(2, 3)), InvalidArgument);
}

TEST(RevNet, JacobianMatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 10; ++t) {
    const Index m = 2 + 2 * (t % 3);
    RevNet net = random_biased_net(m, 5, static_cast<std::uint64_t>(t) + 10);
    Vector x = ts::random_matrix(m, 1, rng);
    Matrix jac = net.jacobian(x);
    Matrix fd(m, m);
    for (Index j = 0; j < m; ++j) {
      Vector xp = x, xm = x;
      xp[j] += 1e-6;
      xm[j] -= 1e-6;
      fd.col(j) = (net.forward_point(xp) - net.forward_point(xm)) / 2e-6;
    }
    EXPECT_LT((jac - fd).cwiseAbs().maxCoeff() / jac.cwiseAbs().maxCoeff(), 1e-5);
  }
}

TEST(RevNet, ParameterRoundTrip) {
  RevNet net = random_biased_net(5, 3, 1);
  RevNet copy = RevNet::identity(5, 3);
  copy.set_parameters(net.parameters());
  EXPECT_TRUE(copy.parameters() == net.parameters());
  EXPECT_THROW(copy.set_parameters(Vector::Zero(3)), InvalidArgument);
}

TEST(NllLoss, MatchesDenseJacobianRoute) {
  std::mt19937_64 rng(6);
  for (Index m : {2, 3, 5, 8}) {
    RevNet net = random_biased_net(m, 4, static_cast<std::uint64_t>(m));
    Matrix x = ts::random_matrix(12, m, rng), g = ts::random_matrix(12, m, rng);
    g.row(3).setZero();
    EXPECT_NEAR(nll_loss(net, x, g), dense_loss(net, x, g), 1e-12);
  }
}

TEST(NllLoss, ParameterGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(7);
  for (Index m : {2, 3, 6}) {
    RevNet net = random_biased_net(m, 3, static_cast<std::uint64_t>(m) + 20);
    Matrix x = ts::random_matrix(9, m, rng), g = ts::random_matrix(9, m, rng);
    Vector analytic;
    nll_loss(net, x, g, &analytic);
    const Vector theta = net.parameters();
    auto f = [&](const Vector& th) {
      RevNet probe = net;
      probe.set_parameters(th);
      return nll_loss(probe, x, g);
    };
    Vector fd = ts::central_difference(f, theta, 1e-6);
    EXPECT_LT(ts::max_relative_error(analytic, fd, 1e-6), 1e-5) << "m = " << m;
  }
}

TEST(NllLoss, IdentityNetMeasuresInactiveEnergy) {
  Matrix x = Matrix::Zero(2, 2), g(2, 2);
  g << 3.0, 4.0, 1.0, 0.0;
  // sample 1: 16/25, sample 2: 0
  EXPECT_NEAR(nll_loss(RevNet::identity(2, 3), x, g), 0.5 * 16.0 / 25.0, 1e-15);
}

TEST(TrainNll, ConstantFunctionIsNoOp) {
  Matrix x = latin_hypercube(10, 2, 1);
  Dataset d(x, Vector::Constant(10, 2.0), Matrix::Zero(10, 2));
  NllOptions options;
  options.epochs = 50;
  NllReport report;
  RevNet net = train_nll(d, options, &report);
  EXPECT_EQ(report.loss.front(), 0.0);
  EXPECT_EQ(report.best_epoch, 0);
  EXPECT_EQ(report.loss.size(), 1u);
  EXPECT_EQ(nll_loss(net, x, d.gradients()), 0.0);
}

TEST(TrainNll, AxisAlignedFunctionConcentratesSensitivity) {
  Matrix x = latin_hypercube(40, 2, 3);
  Matrix g = Matrix::Zero(40, 2);
  g.col(0).setOnes();
  Dataset d(x, x.col(0), g);
  NllOptions options;
  options.epochs = 500;
  NllReport report;
  RevNet net = train_nll(d, options, &report);
  EXPECT_LT(nll_loss(net, x, g), 0.1);
}

TEST(TrainNll, BestSoFarAndDeterminism) {
  Matrix x = latin_hypercube(30, 3, 5);
  Matrix g(30, 3);
  for (Index i = 0; i < 30; ++i) g.row(i) << 2 * x(i, 0), -2 * x(i, 1), 0.3;
  Dataset d(x, Vector::Zero(30), g);
  NllOptions options;
  options.epochs = 200;
  options.seed = 9;
  NllReport r1, r2;
  RevNet a = train_nll(d, options, &r1);
  RevNet b = train_nll(d, options, &r2);
  EXPECT_TRUE(a.parameters() == b.parameters());
  EXPECT_EQ(r1.best_loss, *std::min_element(r1.loss.begin(), r1.loss.end()));
  EXPECT_EQ(nll_loss(a, x, g), r1.best_loss);
  EXPECT_LE(r1.best_loss, r1.loss.front());
}

TEST(TrainNll, RequiresGradients) {
  Dataset d(Matrix::Zero(3, 2), Vector::Zero(3));
  EXPECT_THROW(train_nll(d, NllOptions{}), InvalidArgument);
}
