#pragma once

// Nonlinear level-set learning with a reversible residual network.

#include "mfas/core.hpp"

#include <cstdint>
#include <vector>

namespace mfas {

/// Reversible network on R^m. Odd m is padded with one zero coordinate; the
/// padded state splits into halves u (first) and v (second). Layer n maps
///   u' = u + h K1^T tanh(K1 v + b1)
///   v' = v - h K2^T tanh(K2 u' + b2)
/// which is inverted exactly by running the updates backwards.
class RevNet {
 public:
  struct Layer {
    Matrix k1;  ///< hidden x half
    Vector b1;  ///< hidden
    Matrix k2;  ///< hidden x half
    Vector b2;  ///< hidden
  };

  RevNet(Index dim, double h, std::vector<Layer> layers);

  /// Weights drawn from N(0, 1/m), biases zero; hidden width defaults to the
  /// half-block size.
  static RevNet random(Index dim, int n_layers, double h, std::uint64_t seed, Index hidden = 0);
  /// All weights and biases zero: forward is the identity.
  static RevNet identity(Index dim, int n_layers, double h = 0.25, Index hidden = 0);

  Index dim() const { return dim_; }
  bool padded() const { return dim_ % 2 == 1; }
  Index padded_dim() const { return dim_ + (padded() ? 1 : 0); }
  Index half() const { return padded_dim() / 2; }
  Index hidden() const { return layers_.empty() ? half() : layers_.front().k1.rows(); }
  double h() const { return h_; }
  const std::vector<Layer>& layers() const { return layers_; }

  /// Maps each row of `x` (N x dim) to the padded transformed space
  /// (N x padded_dim).
  Matrix forward(const Matrix& x) const;
  /// Inverse of forward; rows of `z` are padded_dim wide. Returns N x dim.
  Matrix inverse(const Matrix& z) const;
  Vector forward_point(const Vector& x) const;
  Vector inverse_point(const Vector& z) const;

  /// Jacobian of forward at `x` (padded_dim x padded_dim, padded input).
  Matrix jacobian(const Vector& x) const;

  /// Flat parameter vector (k1, b1, k2, b2 per layer, column-major).
  Vector parameters() const;
  void set_parameters(const Vector& theta);
  Index num_parameters() const;

 private:
  Matrix pad(const Matrix& x) const;

  Index dim_;
  double h_;
  std::vector<Layer> layers_;
};

/// Mean over samples of the squared transformed sensitivities outside the
/// first coordinate, |(J^{-T} grad f)_{2..m}|^2 / |grad f|^2. Samples with a
/// zero gradient contribute zero. Optionally writes d loss / d parameters.
double nll_loss(const RevNet& net, const Matrix& inputs, const Matrix& gradients, Vector* parameter_gradient = nullptr);

struct NllOptions {
  int layers = 10;
  int epochs = 20000;
  double learning_rate = 0.03;
  double h = 0.25;
  /// Hidden width of every layer; 0 means the half-block size.
  Index hidden = 0;
  std::uint64_t seed = 0;
};

struct NllReport {
  /// Loss at the start of every epoch.
  std::vector<double> loss;
  int best_epoch = 0;
  double best_loss = 0.0;
};

/// Full-batch Adam on nll_loss, returning the best parameters seen. Throws
/// NumericalError naming the epoch if the loss becomes non-finite.
RevNet train_nll(const Dataset& data, const NllOptions& options, NllReport* report = nullptr);

}  // namespace mfas
