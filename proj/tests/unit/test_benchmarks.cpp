#include <gtest/gtest.h>

#include "mfas/benchmarks.hpp"
#include "mfas/sampling.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace mfas;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// Independent scratch evaluation of the piston chain, written out inline.
double piston_oracle(double m, double s, double v0, double k, double p0, double ta, double t0) {
  const double a = p0 * s + 19.62 * m - k * v0 / s;
  const double v = s / (2 * k) * (std::sqrt(a * a + 4 * k * p0 * v0 * ta / t0) - a);
  return 2 * std::numbers::pi * std::sqrt(m / (k + s * s * p0 * v0 * ta / (t0 * v * v)));
}

// Central differences with step 1e-6 relative to each coordinate.
Vector relative_fd(const Benchmark& b, const Vector& x) {
  Vector g(x.size());
  for (Index j = 0; j < x.size(); ++j) {
    const double h = 1e-6 * std::max(std::abs(x[j]), 1e-3);
    Vector xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    g[j] = (b.evaluate(xp) - b.evaluate(xm)) / (2 * h);
  }
  return g;
}

}  // namespace

TEST(Ebola, CollapsesToBetaOverGamma) {
  EXPECT_DOUBLE_EQ(ebola_r0(vec({0.3, 0, 0, 0.5, 0.12, 0.1, 0.3, 0})), 0.3 / 0.12);
}

TEST(Ebola, ZeroTransmissionGivesZero) { EXPECT_EQ(ebola_r0(vec({0, 0, 0, 0.5, 0.1, 0.1, 0.3, 0.2})), 0.0); }

TEST(Ebola, HandEvaluation) {
  // (0.2 + 0.1*0.5*0.1/0.25 + 0.1*0.2/0.2) / (0.1 + 0.2) = 0.32 / 0.3
  EXPECT_NEAR(ebola_r0(vec({0.2, 0.1, 0.1, 0.5, 0.1, 0.2, 0.25, 0.2})), 1.0666666666666667, 1e-15);
}

TEST(Ebola, ZeroDenominatorThrows) {
  EXPECT_THROW(ebola_r0(vec({0.2, 0.1, 0.1, 0.5, 0.1, 0.0, 0.25, 0.2})), InvalidArgument);
  EXPECT_THROW(ebola_r0(vec({0.2, 0.1, 0.1, 0.5, 0.0, 0.2, 0.25, 0.0})), InvalidArgument);
}

TEST(Ebola, LinearInBetaOne) {
  Benchmark b = ebola_benchmark();
  Matrix x = sample({SamplerKind::kUniform, 50, b.box, 1, 0});
  for (Index i = 0; i < x.rows(); ++i) {
    Vector p = x.row(i).transpose();
    EXPECT_DOUBLE_EQ(ebola_r0_gradient(p)[0], 1.0 / (p[4] + p[7]));
  }
}

TEST(Piston, MidpointMatchesScratchFormula) {
  Benchmark b = piston_benchmark();
  Vector mid = 0.5 * (b.box.lower() + b.box.upper());
  EXPECT_NEAR(piston_cycle_time(mid), 0.4643970224718025, 1e-13);
  EXPECT_NEAR(piston_cycle_time(mid), piston_oracle(45, 0.0125, 0.006, 3000, 100000, 293, 350), 1e-14);
}

TEST(Piston, HeavierPistonIsSlowerAtMidpoint) {
  Benchmark b = piston_benchmark();
  Vector mid = 0.5 * (b.box.lower() + b.box.upper());
  Vector heavy = mid;
  heavy[0] *= 2.0;
  EXPECT_GT(piston_cycle_time(heavy), piston_cycle_time(mid));
  EXPECT_NEAR(piston_cycle_time(heavy), piston_oracle(90, 0.0125, 0.006, 3000, 100000, 293, 350), 1e-14);
}

// Mass also enters the gas volume through A, so the period is not monotone in
// M everywhere: at the lower corner a heavier piston cycles faster.
TEST(Piston, MassEffectReversesAtLowerCorner) {
  Benchmark b = piston_benchmark();
  Vector light = b.box.lower();
  Vector heavy = light;
  heavy[0] = 60.0;
  EXPECT_LT(piston_cycle_time(heavy), piston_cycle_time(light));
  EXPECT_NEAR(piston_cycle_time(light), piston_oracle(30, 0.005, 0.002, 1000, 90000, 290, 340), 1e-14);
  EXPECT_NEAR(piston_cycle_time(heavy), piston_oracle(60, 0.005, 0.002, 1000, 90000, 290, 340), 1e-14);
}

TEST(Piston, PositiveOverBox) {
  Benchmark b = piston_benchmark();
  Matrix x = sample({SamplerKind::kUniform, 200, b.box, 2, 0});
  for (Index i = 0; i < x.rows(); ++i) EXPECT_GT(piston_cycle_time(x.row(i).transpose()), 0.0);
}

TEST(Piston, WrongSizeThrows) { EXPECT_THROW(piston_cycle_time(Vector::Ones(6)), InvalidArgument); }

TEST(Paraboloid, Examples) {
  EXPECT_EQ(paraboloid(vec({0, 0})), 0.0);
  EXPECT_EQ(paraboloid(vec({1, 1})), 0.0);
  EXPECT_EQ(paraboloid(vec({0.5, 0.25})), 0.1875);
  EXPECT_TRUE(paraboloid_gradient(vec({0.5, 0.25})).isApprox(vec({1.0, -0.5})));
}

TEST(Paraboloid, LevelSetsAreHyperbolas) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int t = 0; t < 100; ++t) {
    const double x1 = u(rng), x2 = u(rng), y2 = u(rng);
    // (y1, y2) on the same branch family x1^2 - x2^2 = c
    const double c = x1 * x1 - x2 * x2;
    if (c + y2 * y2 < 0) continue;
    const double y1 = std::sqrt(c + y2 * y2);
    EXPECT_NEAR(paraboloid(vec({y1, y2})), paraboloid(vec({x1, x2})), 1e-12);
  }
}

TEST(Benchmarks, GradientsMatchFiniteDifferences) {
  for (const auto& name : benchmark_names()) {
    Benchmark b = benchmark_by_name(name);
    Vector lo = b.box.lower() + 0.01 * b.box.width(), hi = b.box.upper() - 0.01 * b.box.width();
    Matrix x = sample({SamplerKind::kUniform, 100, Box(lo, hi), 4, 0});
    for (Index i = 0; i < x.rows(); ++i) {
      Vector p = x.row(i).transpose();
      Vector analytic = b.gradient(p), fd = relative_fd(b, p);
      const double scale = std::max(analytic.cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LT((analytic - fd).cwiseAbs().maxCoeff() / scale, 1e-4) << name << " point " << i;
    }
  }
}

TEST(Benchmarks, CenteredDatasetScalesGradients) {
  Benchmark b = piston_benchmark();
  Matrix t = sample({SamplerKind::kLhs, 20, Box::centered(7), 5, 0});
  Dataset d = evaluate_centered(b, t);
  ASSERT_TRUE(d.has_gradients());
  // chain rule through the affine map, checked by differencing in centered coordinates
  const double h = 1e-6;
  for (Index i = 0; i < 5; ++i) {
    for (Index j = 0; j < 7; ++j) {
      Matrix tp = t.row(i), tm = t.row(i);
      tp(0, j) += h;
      tm(0, j) -= h;
      const double fd = (b.evaluate(b.box.from_centered(tp).row(0).transpose()) -
                         b.evaluate(b.box.from_centered(tm).row(0).transpose())) /
                        (2 * h);
      EXPECT_NEAR(d.gradients()(i, j), fd, 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
  EXPECT_THROW(evaluate_centered(b, Matrix::Zero(2, 3)), InvalidArgument);
}

TEST(Benchmarks, UnknownName) { EXPECT_THROW(benchmark_by_name("borehole"), InvalidArgument); }
