#include "mfas/nargp.hpp"

#include "mfas/random.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mfas {

namespace {

// Rows per predict_marginals call; bounds the cross-covariance memory.
constexpr Index kPredictBlock = 4096;

Marginals predict_blocked(const GpModel& gp, const Matrix& inputs) {
  Marginals out{Vector(inputs.rows()), Vector(inputs.rows())};
  for (Index start = 0; start < inputs.rows(); start += kPredictBlock) {
    const Index len = std::min(kPredictBlock, inputs.rows() - start);
    Marginals part = gp.predict_marginals(inputs.middleRows(start, len));
    out.mean.segment(start, len) = part.mean;
    out.variance.segment(start, len) = part.variance;
  }
  return out;
}

// particles: S x T; returns (S*T) x (m+1) with row s*T + t = (x_t, f[s,t]).
Matrix augment(const Matrix& x, const Matrix& particles) {
  const Index s_count = particles.rows(), t_count = x.rows(), m = x.cols();
  Matrix out(s_count * t_count, m + 1);
  for (Index s = 0; s < s_count; ++s) {
    out.block(s * t_count, 0, t_count, m) = x;
    out.block(s * t_count, m, t_count, 1) = particles.row(s).transpose();
  }
  return out;
}

Matrix draw(const Matrix& mean, const Matrix& variance, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal;
  Matrix out(mean.rows(), mean.cols());
  for (Index s = 0; s < mean.rows(); ++s)
    for (Index t = 0; t < mean.cols(); ++t) out(s, t) = mean(s, t) + std::sqrt(variance(s, t)) * normal(rng);
  return out;
}

struct Propagation {
  Marginals moments;
  Matrix samples;
};

Propagation propagate(const MfModel& model, std::size_t q, const Matrix& x) {
  if (q < 1 || q > model.num_levels()) {
    throw InvalidArgument("level " + std::to_string(q) + " outside [1, " + std::to_string(model.num_levels()) + "]");
  }
  if (x.cols() != model.dim()) throw InvalidArgument("predict: test inputs have wrong dimension");
  const Index s_count = model.mc_samples(), t_count = x.rows();
  Marginals first = predict_blocked(model.level(0), x);
  if (q == 1) {
    Matrix samples = draw(first.mean.transpose().replicate(s_count, 1), first.variance.transpose().replicate(s_count, 1),
                          derive_seed(model.seed(), {1}));
    return {first, samples};
  }
  Matrix particles = draw(first.mean.transpose().replicate(s_count, 1),
                          first.variance.transpose().replicate(s_count, 1), derive_seed(model.seed(), {1}));
  for (std::size_t level = 2; level <= q; ++level) {
    Marginals cond = predict_blocked(model.level(level - 1), augment(x, particles));
    // row-major (s, t) layout viewed as S x T
    Matrix mean = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        cond.mean.data(), s_count, t_count);
    Matrix var = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        cond.variance.data(), s_count, t_count);
    particles = draw(mean, var, derive_seed(model.seed(), {level}));
    if (level == q) {
      Marginals out;
      out.mean = mean.colwise().mean().transpose();
      const Vector spread = (mean.rowwise() - out.mean.transpose()).colwise().squaredNorm().transpose() /
                            static_cast<double>(s_count);
      out.variance = var.colwise().mean().transpose() + spread;
      return {out, particles};
    }
  }
  throw NumericalError("unreachable level propagation");
}

}  // namespace

MfModel::MfModel(std::vector<GpModel> levels, int mc_samples, std::uint64_t seed)
    : levels_(std::move(levels)), mc_samples_(mc_samples), seed_(seed) {
  if (levels_.empty()) throw InvalidArgument("MfModel: needs at least one level");
  if (mc_samples_ < 1) throw InvalidArgument("MfModel: mc_samples must be positive");
  const Index m = levels_.front().input_dim();
  if (levels_.front().family() != KernelFamily::kRbfArd) {
    throw InvalidArgument("MfModel: level 1 must use the RBF-ARD kernel");
  }
  for (std::size_t q = 1; q < levels_.size(); ++q) {
    if (levels_[q].family() != KernelFamily::kNargp || levels_[q].input_dim() != m + 1) {
      throw InvalidArgument("MfModel: level " + std::to_string(q + 1) +
                            " must use the autoregressive kernel on m + 1 inputs");
    }
  }
}

const GpModel& MfModel::level(std::size_t q) const {
  if (q >= levels_.size()) throw InvalidArgument("MfModel: level index out of range");
  return levels_[q];
}

FitOptions level_fit_options(const NargpOptions& options, std::size_t q) {
  FitOptions fo;
  fo.noise = q < options.noise.size() ? options.noise[q] : NoisePolicy::kFixedZero;
  fo.restarts = q < options.restarts.size() ? options.restarts[q] : 10;
  fo.optimizer = options.optimizer;
  fo.seed = derive_seed(options.seed, {0x6c6576656cULL, q});
  return fo;
}

Matrix augmented_inputs(const Dataset& lower, const Dataset& upper, std::size_t level) {
  if (upper.dim() != lower.dim()) throw InvalidArgument("train_nargp: datasets differ in input dimension");
  const Index m = upper.dim();
  Matrix augmented(upper.size(), m + 1);
  augmented.leftCols(m) = upper.inputs();
  for (Index i = 0; i < upper.size(); ++i) {
    auto row = lower.find_row(upper.inputs().row(i).transpose());
    if (!row) {
      throw HierarchyError(level, i,
                           "train_nargp: row " + std::to_string(i) + " of level " + std::to_string(level + 1) +
                               " is missing from level " + std::to_string(level));
    }
    augmented(i, m) = lower.outputs()[*row];
  }
  return augmented;
}

MfModel train_nargp(const std::vector<Dataset>& datasets, const NargpOptions& options,
                    std::vector<FitReport>* reports) {
  if (datasets.size() < 2) throw InvalidArgument("train_nargp: need at least two fidelity levels");
  std::vector<Matrix> inputs = {datasets[0].inputs()};
  for (std::size_t q = 1; q < datasets.size(); ++q) inputs.push_back(augmented_inputs(datasets[q - 1], datasets[q], q));

  if (reports) reports->assign(datasets.size(), FitReport{});
  std::vector<GpModel> levels;
  levels.reserve(datasets.size());
  for (std::size_t q = 0; q < datasets.size(); ++q) {
    levels.push_back(fit(inputs[q], datasets[q].outputs(), q == 0 ? KernelFamily::kRbfArd : KernelFamily::kNargp,
                         level_fit_options(options, q), reports ? &(*reports)[q] : nullptr));
  }
  return MfModel(std::move(levels), options.mc_samples, options.seed);
}

McPrediction predict_mc(const MfModel& model, const Matrix& test_inputs) {
  Propagation p = propagate(model, model.num_levels(), test_inputs);
  return {std::move(p.moments.mean), std::move(p.moments.variance), std::move(p.samples)};
}

Marginals predict_level(const MfModel& model, std::size_t q, const Matrix& test_inputs) {
  return propagate(model, q, test_inputs).moments;
}

}  // namespace mfas
