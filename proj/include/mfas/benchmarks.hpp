#pragma once

// Closed-form test objectives with analytic gradients.

#include "mfas/core.hpp"

#include <functional>
#include <string>
#include <vector>

namespace mfas {

struct Benchmark {
  std::string name;
  Box box;
  std::vector<std::string> parameter_names;
  /// f at a point in physical coordinates.
  std::function<double(const Vector&)> evaluate;
  /// Gradient of f with respect to physical coordinates.
  std::function<Vector(const Vector&)> gradient;

  Index dim() const { return box.dim(); }
};

/// Basic reproduction number of the modified SEIR Ebola model.
/// Parameter order: beta1, beta2, beta3, rho1, gamma1, gamma2, omega, psi.
double ebola_r0(const Vector& p);
Vector ebola_r0_gradient(const Vector& p);

/// Cycle time of the piston model.
/// Parameter order: M, S, V0, k, P0, Ta, T0.
double piston_cycle_time(const Vector& p);
Vector piston_cycle_time_gradient(const Vector& p);

/// x1^2 - x2^2.
double paraboloid(const Vector& x);
Vector paraboloid_gradient(const Vector& x);

Benchmark ebola_benchmark();
Benchmark piston_benchmark();
/// The paraboloid on [0, 1]^2.
Benchmark paraboloid_benchmark();

/// "ebola", "piston" or "paraboloid". Throws InvalidArgument otherwise.
Benchmark benchmark_by_name(const std::string& name);
std::vector<std::string> benchmark_names();

/// Evaluates the benchmark on rows of `centered` in [-1, 1]^m. The dataset
/// keeps the centered inputs and carries gradients with respect to them.
Dataset evaluate_centered(const Benchmark& bench, const Matrix& centered);

/// Evaluates the benchmark on rows of `inputs` in physical units.
Dataset evaluate_physical(const Benchmark& bench, const Matrix& inputs);

}  // namespace mfas
