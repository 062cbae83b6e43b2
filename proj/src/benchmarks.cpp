#include "mfas/benchmarks.hpp"

#include <cmath>
#include <numbers>

namespace mfas {

namespace {

void check_size(const Vector& p, Index m, const char* what) {
  if (p.size() != m) {
    throw InvalidArgument(std::string(what) + " expects " + std::to_string(m) + " parameters, got " +
                          std::to_string(p.size()));
  }
}

Box make_box(std::initializer_list<std::pair<double, double>> ranges) {
  Vector lo(static_cast<Index>(ranges.size())), hi(static_cast<Index>(ranges.size()));
  Index j = 0;
  for (auto [a, b] : ranges) {
    lo[j] = a;
    hi[j++] = b;
  }
  return Box(lo, hi);
}

constexpr double kPistonGravity = 19.62;

}  // namespace

double ebola_r0(const Vector& p) {
  check_size(p, 8, "ebola_r0");
  const double beta1 = p[0], beta2 = p[1], beta3 = p[2], rho1 = p[3];
  const double gamma1 = p[4], gamma2 = p[5], omega = p[6], psi = p[7];
  if (gamma2 == 0.0 || omega == 0.0 || gamma1 + psi == 0.0) throw InvalidArgument("ebola_r0: zero denominator");
  return (beta1 + beta2 * rho1 * gamma1 / omega + beta3 * psi / gamma2) / (gamma1 + psi);
}

Vector ebola_r0_gradient(const Vector& p) {
  const double r0 = ebola_r0(p);
  const double beta2 = p[1], beta3 = p[2], rho1 = p[3];
  const double gamma1 = p[4], gamma2 = p[5], omega = p[6], psi = p[7];
  const double den = gamma1 + psi;
  Vector g(8);
  g[0] = 1.0 / den;
  g[1] = rho1 * gamma1 / omega / den;
  g[2] = psi / gamma2 / den;
  g[3] = beta2 * gamma1 / omega / den;
  g[4] = beta2 * rho1 / omega / den - r0 / den;
  g[5] = -beta3 * psi / (gamma2 * gamma2) / den;
  g[6] = -beta2 * rho1 * gamma1 / (omega * omega) / den;
  g[7] = beta3 / gamma2 / den - r0 / den;
  return g;
}

double piston_cycle_time(const Vector& p) {
  check_size(p, 7, "piston_cycle_time");
  const double mass = p[0], s = p[1], v0 = p[2], k = p[3], p0 = p[4], ta = p[5], t0 = p[6];
  const double a = p0 * s + kPistonGravity * mass - k * v0 / s;
  const double disc = a * a + 4.0 * k * p0 * v0 * ta / t0;
  if (!(disc >= 0.0)) throw InvalidArgument("piston_cycle_time: negative discriminant");
  const double v = s / (2.0 * k) * (std::sqrt(disc) - a);
  const double q = k + s * s * p0 * v0 * ta / (t0 * v * v);
  if (!(q > 0.0) || !(mass / q >= 0.0)) throw InvalidArgument("piston_cycle_time: parameters outside the model");
  return 2.0 * std::numbers::pi * std::sqrt(mass / q);
}

Vector piston_cycle_time_gradient(const Vector& p) {
  const double c = piston_cycle_time(p);
  const double mass = p[0], s = p[1], v0 = p[2], k = p[3], p0 = p[4], ta = p[5], t0 = p[6];
  enum { kM, kS, kV0, kK, kP0, kTa, kT0 };

  const double a = p0 * s + kPistonGravity * mass - k * v0 / s;
  Vector da = Vector::Zero(7);
  da[kM] = kPistonGravity;
  da[kS] = p0 + k * v0 / (s * s);
  da[kV0] = -k / s;
  da[kK] = -v0 / s;
  da[kP0] = s;

  const double e = 4.0 * k * p0 * v0 * ta / t0;
  Vector de = Vector::Zero(7);
  de[kV0] = e / v0;
  de[kK] = e / k;
  de[kP0] = e / p0;
  de[kTa] = e / ta;
  de[kT0] = -e / t0;

  const double d = std::sqrt(a * a + e);
  Vector dd = (a * da + 0.5 * de) / d;

  const double v = s / (2.0 * k) * (d - a);
  Vector dv = s / (2.0 * k) * (dd - da);
  dv[kS] += v / s;
  dv[kK] -= v / k;

  const double g = s * s * p0 * v0 * ta / (t0 * v * v);
  Vector dg = -2.0 * g / v * dv;
  dg[kS] += 2.0 * g / s;
  dg[kP0] += g / p0;
  dg[kV0] += g / v0;
  dg[kTa] += g / ta;
  dg[kT0] -= g / t0;

  const double q = k + g;
  Vector dq = dg;
  dq[kK] += 1.0;

  Vector dc = -0.5 * c / q * dq;
  dc[kM] += 0.5 * c / mass;
  return dc;
}

double paraboloid(const Vector& x) {
  check_size(x, 2, "paraboloid");
  return x[0] * x[0] - x[1] * x[1];
}

Vector paraboloid_gradient(const Vector& x) {
  check_size(x, 2, "paraboloid");
  Vector g(2);
  g << 2.0 * x[0], -2.0 * x[1];
  return g;
}

// Ranges of the modified SEIR model for Ebola in Liberia (Diaz et al., 2018).
Benchmark ebola_benchmark() {
  return {"ebola",
          make_box({{0.1, 0.4},
                    {0.1, 0.4},
                    {0.05, 0.2},
                    {0.41, 1.0},
                    {0.0276, 0.1702},
                    {0.081, 0.21},
                    {0.25, 0.5},
                    {0.0833, 0.7}}),
          {"beta1", "beta2", "beta3", "rho1", "gamma1", "gamma2", "omega", "psi"},
          ebola_r0,
          ebola_r0_gradient};
}

// Standard piston simulation ranges (Ben-Ari and Steinberg, 2007).
Benchmark piston_benchmark() {
  return {"piston",
          make_box({{30.0, 60.0},
                    {0.005, 0.020},
                    {0.002, 0.010},
                    {1000.0, 5000.0},
                    {90000.0, 110000.0},
                    {290.0, 296.0},
                    {340.0, 360.0}}),
          {"M", "S", "V0", "k", "P0", "Ta", "T0"},
          piston_cycle_time,
          piston_cycle_time_gradient};
}

Benchmark paraboloid_benchmark() {
  return {"paraboloid", Box::unit(2), {"x1", "x2"}, paraboloid, paraboloid_gradient};
}

Benchmark benchmark_by_name(const std::string& name) {
  if (name == "ebola") return ebola_benchmark();
  if (name == "piston") return piston_benchmark();
  if (name == "paraboloid") return paraboloid_benchmark();
  throw InvalidArgument("unknown benchmark '" + name + "' (expected ebola, piston or paraboloid)");
}

std::vector<std::string> benchmark_names() { return {"ebola", "piston", "paraboloid"}; }

Dataset evaluate_centered(const Benchmark& bench, const Matrix& centered) {
  if (centered.cols() != bench.dim()) {
    throw InvalidArgument(bench.name + ": inputs have " + std::to_string(centered.cols()) + " columns, expected " +
                          std::to_string(bench.dim()));
  }
  const Matrix physical = bench.box.from_centered(centered);
  const Vector half_width = 0.5 * bench.box.width();
  Vector y(centered.rows());
  Matrix g(centered.rows(), centered.cols());
  for (Index i = 0; i < centered.rows(); ++i) {
    const Vector x = physical.row(i).transpose();
    y[i] = bench.evaluate(x);
    g.row(i) = bench.gradient(x).cwiseProduct(half_width).transpose();
  }
  return Dataset(centered, y, g);
}

Dataset evaluate_physical(const Benchmark& bench, const Matrix& inputs) {
  if (inputs.cols() != bench.dim()) {
    throw InvalidArgument(bench.name + ": inputs have " + std::to_string(inputs.cols()) + " columns, expected " +
                          std::to_string(bench.dim()));
  }
  Vector y(inputs.rows());
  Matrix g(inputs.rows(), inputs.cols());
  for (Index i = 0; i < inputs.rows(); ++i) {
    const Vector x = inputs.row(i).transpose();
    y[i] = bench.evaluate(x);
    g.row(i) = bench.gradient(x).transpose();
  }
  return Dataset(inputs, y, g);
}

}  // namespace mfas
