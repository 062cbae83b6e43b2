#include "mfas/nll.hpp"

#include "mfas/random.hpp"

#include <cmath>
#include <string>

namespace mfas {

namespace {

// Per-layer quantities cached by the batched forward pass (samples as columns).
struct LayerTape {
  Matrix v;   // v entering the layer
  Matrix u1;  // u after the first update
  Matrix q1, d1, q2, d2;
  Matrix a, bc;  // covector halves entering the layer / after the first update
  Matrix r1, r2;
};

Matrix tanh_of(const Matrix& p) { return p.array().tanh().matrix(); }
Matrix sech2_of(const Matrix& q) { return (1.0 - q.array().square()).matrix(); }

}  // namespace

RevNet::RevNet(Index dim, double h, std::vector<Layer> layers) : dim_(dim), h_(h), layers_(std::move(layers)) {
  if (dim_ < 1) throw InvalidArgument("RevNet: dimension must be positive");
  if (!(h_ >= 0.0) || !std::isfinite(h_)) throw InvalidArgument("RevNet: time step must be nonnegative");
  const Index hf = half();
  for (const auto& l : layers_) {
    const Index w = l.k1.rows();
    if (l.k1.cols() != hf || l.k2.cols() != hf || l.k2.rows() != w || l.b1.size() != w || l.b2.size() != w) {
      throw InvalidArgument("RevNet: inconsistent layer shapes");
    }
  }
}

RevNet RevNet::random(Index dim, int n_layers, double h, std::uint64_t seed, Index hidden) {
  if (n_layers < 1) throw InvalidArgument("RevNet: need at least one layer");
  const Index hf = (dim + dim % 2) / 2;
  const Index w = hidden > 0 ? hidden : hf;
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(dim)));
  std::vector<Layer> layers(static_cast<std::size_t>(n_layers));
  for (auto& l : layers) {
    l.k1 = Matrix::NullaryExpr(w, hf, [&]() { return normal(rng); });
    l.k2 = Matrix::NullaryExpr(w, hf, [&]() { return normal(rng); });
    l.b1 = Vector::Zero(w);
    l.b2 = Vector::Zero(w);
  }
  return RevNet(dim, h, std::move(layers));
}

RevNet RevNet::identity(Index dim, int n_layers, double h, Index hidden) {
  if (n_layers < 0) throw InvalidArgument("RevNet: negative layer count");
  const Index hf = (dim + dim % 2) / 2;
  const Index w = hidden > 0 ? hidden : hf;
  std::vector<Layer> layers(static_cast<std::size_t>(n_layers),
                            Layer{Matrix::Zero(w, hf), Vector::Zero(w), Matrix::Zero(w, hf), Vector::Zero(w)});
  return RevNet(dim, h, std::move(layers));
}

Matrix RevNet::pad(const Matrix& x) const {
  if (x.cols() != dim_) {
    throw InvalidArgument("RevNet: inputs have " + std::to_string(x.cols()) + " columns, expected " +
                          std::to_string(dim_));
  }
  if (!padded()) return x;
  Matrix out = Matrix::Zero(x.rows(), dim_ + 1);
  out.leftCols(dim_) = x;
  return out;
}

Matrix RevNet::forward(const Matrix& x) const {
  const Matrix state = pad(x).transpose();
  const Index hf = half();
  Matrix u = state.topRows(hf), v = state.bottomRows(hf);
  for (const auto& l : layers_) {
    u += h_ * l.k1.transpose() * tanh_of((l.k1 * v).colwise() + l.b1);
    v -= h_ * l.k2.transpose() * tanh_of((l.k2 * u).colwise() + l.b2);
  }
  Matrix out(x.rows(), padded_dim());
  out.leftCols(hf) = u.transpose();
  out.rightCols(hf) = v.transpose();
  return out;
}

Matrix RevNet::inverse(const Matrix& z) const {
  if (z.cols() != padded_dim()) throw InvalidArgument("RevNet: inverse expects padded-width rows");
  const Index hf = half();
  Matrix u = z.leftCols(hf).transpose(), v = z.rightCols(hf).transpose();
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
    v += h_ * it->k2.transpose() * tanh_of((it->k2 * u).colwise() + it->b2);
    u -= h_ * it->k1.transpose() * tanh_of((it->k1 * v).colwise() + it->b1);
  }
  Matrix out(z.rows(), padded_dim());
  out.leftCols(hf) = u.transpose();
  out.rightCols(hf) = v.transpose();
  return out.leftCols(dim_);
}

Vector RevNet::forward_point(const Vector& x) const { return forward(Matrix(x.transpose())).row(0).transpose(); }

Vector RevNet::inverse_point(const Vector& z) const { return inverse(Matrix(z.transpose())).row(0).transpose(); }

Matrix RevNet::jacobian(const Vector& x) const {
  const Index hf = half(), mp = padded_dim();
  const Vector state = pad(Matrix(x.transpose())).row(0).transpose();
  Vector u = state.head(hf), v = state.tail(hf);
  Matrix jac = Matrix::Identity(mp, mp);
  const Matrix eye = Matrix::Identity(hf, hf);
  for (const auto& l : layers_) {
    const Vector q1 = ((l.k1 * v) + l.b1).array().tanh().matrix();
    const Matrix a = h_ * l.k1.transpose() * (1.0 - q1.array().square()).matrix().asDiagonal() * l.k1;
    u += h_ * l.k1.transpose() * q1;
    const Vector q2 = ((l.k2 * u) + l.b2).array().tanh().matrix();
    const Matrix b = h_ * l.k2.transpose() * (1.0 - q2.array().square()).matrix().asDiagonal() * l.k2;
    v -= h_ * l.k2.transpose() * q2;
    Matrix layer(mp, mp);
    layer << eye, a, -b, eye - b * a;
    jac = layer * jac;
  }
  return jac;
}

Index RevNet::num_parameters() const {
  Index n = 0;
  for (const auto& l : layers_) n += l.k1.size() + l.b1.size() + l.k2.size() + l.b2.size();
  return n;
}

Vector RevNet::parameters() const {
  Vector theta(num_parameters());
  Index o = 0;
  auto put = [&](const auto& m) {
    theta.segment(o, m.size()) = Eigen::Map<const Vector>(m.data(), m.size());
    o += m.size();
  };
  for (const auto& l : layers_) {
    put(l.k1);
    put(l.b1);
    put(l.k2);
    put(l.b2);
  }
  return theta;
}

void RevNet::set_parameters(const Vector& theta) {
  if (theta.size() != num_parameters()) throw InvalidArgument("RevNet: parameter vector has wrong length");
  Index o = 0;
  auto get = [&](auto& m) {
    Eigen::Map<Vector>(m.data(), m.size()) = theta.segment(o, m.size());
    o += m.size();
  };
  for (auto& l : layers_) {
    get(l.k1);
    get(l.b1);
    get(l.k2);
    get(l.b2);
  }
}

double nll_loss(const RevNet& net, const Matrix& inputs, const Matrix& gradients, Vector* parameter_gradient) {
  if (inputs.rows() != gradients.rows() || inputs.cols() != net.dim() || gradients.cols() != net.dim()) {
    throw InvalidArgument("nll_loss: inputs and gradients must both be N x dim");
  }
  if (inputs.rows() < 1) throw InvalidArgument("nll_loss: no samples");
  const Index n = inputs.rows(), hf = net.half(), mp = net.padded_dim();
  const double h = net.h();
  const auto& layers = net.layers();

  Matrix state = Matrix::Zero(mp, n), cov = Matrix::Zero(mp, n);
  state.topRows(net.dim()) = inputs.transpose();
  cov.topRows(net.dim()) = gradients.transpose();
  const Vector energy = gradients.rowwise().squaredNorm();

  Matrix u = state.topRows(hf), v = state.bottomRows(hf);
  Matrix a = cov.topRows(hf), b = cov.bottomRows(hf);
  std::vector<LayerTape> tape(layers.size());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    auto& t = tape[i];
    t.v = v;
    t.a = a;
    t.q1 = tanh_of((l.k1 * v).colwise() + l.b1);
    t.d1 = sech2_of(t.q1);
    u += h * l.k1.transpose() * t.q1;
    t.u1 = u;
    t.q2 = tanh_of((l.k2 * u).colwise() + l.b2);
    t.d2 = sech2_of(t.q2);
    v -= h * l.k2.transpose() * t.q2;
    // covector of the inverse Jacobian transpose
    t.r1 = l.k1 * a;
    b -= h * l.k1.transpose() * t.d1.cwiseProduct(t.r1);
    t.bc = b;
    t.r2 = l.k2 * b;
    a += h * l.k2.transpose() * t.d2.cwiseProduct(t.r2);
  }

  // transformed covector w = (a, b); the loss skips coordinate 0 and the pad
  Matrix w(mp, n);
  w.topRows(hf) = a;
  w.bottomRows(hf) = b;
  Matrix mask = Matrix::Ones(mp, n);
  mask.row(0).setZero();
  if (net.padded()) mask.row(mp - 1).setZero();
  Vector weight(n);
  for (Index s = 0; s < n; ++s) weight[s] = energy[s] > 0.0 ? 1.0 / (energy[s] * static_cast<double>(n)) : 0.0;
  const Matrix masked = w.cwiseProduct(mask);
  const double loss = (masked.colwise().squaredNorm().transpose().cwiseProduct(weight)).sum();
  if (!parameter_gradient) return loss;

  Matrix wbar = 2.0 * masked * weight.asDiagonal();
  Matrix abar = wbar.topRows(hf), bbar = wbar.bottomRows(hf);
  Matrix ubar = Matrix::Zero(hf, n), vbar = Matrix::Zero(hf, n);
  std::vector<RevNet::Layer> grads(layers.size());
  for (std::size_t ii = layers.size(); ii-- > 0;) {
    const auto& l = layers[ii];
    const auto& t = tape[ii];
    auto& g = grads[ii];
    g.k1 = Matrix::Zero(l.k1.rows(), hf);
    g.k2 = Matrix::Zero(l.k2.rows(), hf);

    // a_out = a + h K2^T (d2 * r2), r2 = K2 bc
    const Matrix e2 = t.d2.cwiseProduct(t.r2);
    const Matrix e2bar = h * l.k2 * abar;
    g.k2 += h * e2 * abar.transpose();
    Matrix d2bar = e2bar.cwiseProduct(t.r2);
    const Matrix r2bar = e2bar.cwiseProduct(t.d2);
    g.k2 += r2bar * t.bc.transpose();
    const Matrix bcbar = bbar + l.k2.transpose() * r2bar;

    // bc = b - h K1^T (d1 * r1), r1 = K1 a
    const Matrix e1 = t.d1.cwiseProduct(t.r1);
    const Matrix e1bar = -h * l.k1 * bcbar;
    g.k1 -= h * e1 * bcbar.transpose();
    Matrix d1bar = e1bar.cwiseProduct(t.r1);
    const Matrix r1bar = e1bar.cwiseProduct(t.d1);
    g.k1 += r1bar * t.a.transpose();
    abar += l.k1.transpose() * r1bar;
    bbar = bcbar;

    // v_out = v - h K2^T q2, q2 = tanh(K2 u1 + b2), d2 = 1 - q2^2
    const Matrix q2bar = -h * l.k2 * vbar;
    g.k2 -= h * t.q2 * vbar.transpose();
    const Matrix p2bar =
        q2bar.cwiseProduct(t.d2) - 2.0 * d2bar.cwiseProduct(t.q2).cwiseProduct(t.d2);
    g.k2 += p2bar * t.u1.transpose();
    g.b2 = p2bar.rowwise().sum();
    ubar += l.k2.transpose() * p2bar;

    // u1 = u + h K1^T q1, q1 = tanh(K1 v + b1)
    const Matrix q1bar = h * l.k1 * ubar;
    g.k1 += h * t.q1 * ubar.transpose();
    const Matrix p1bar =
        q1bar.cwiseProduct(t.d1) - 2.0 * d1bar.cwiseProduct(t.q1).cwiseProduct(t.d1);
    g.k1 += p1bar * t.v.transpose();
    g.b1 = p1bar.rowwise().sum();
    vbar += l.k1.transpose() * p1bar;
  }

  RevNet gnet(net.dim(), h, std::move(grads));
  *parameter_gradient = gnet.parameters();
  return loss;
}

RevNet train_nll(const Dataset& data, const NllOptions& options, NllReport* report) {
  if (data.size() < 2) throw InvalidArgument("train_nll: need at least two samples");
  if (options.layers < 1 || options.epochs < 0 || !(options.learning_rate > 0.0)) {
    throw InvalidArgument("train_nll: layers must be positive, epochs nonnegative, learning rate positive");
  }
  const Matrix& grads = data.gradients();
  RevNet net = RevNet::random(data.dim(), options.layers, options.h, derive_seed(options.seed, {0x6e6c6c}),
                              options.hidden);

  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  Vector theta = net.parameters();
  Vector m1 = Vector::Zero(theta.size()), m2 = Vector::Zero(theta.size()), g;
  Vector best_theta = theta;
  double best = std::numeric_limits<double>::infinity();
  int best_epoch = 0;
  std::vector<double> history;
  history.reserve(static_cast<std::size_t>(options.epochs) + 1);

  for (int epoch = 0; epoch <= options.epochs; ++epoch) {
    const double loss = nll_loss(net, data.inputs(), grads, &g);
    if (!std::isfinite(loss) || !g.allFinite()) {
      throw NumericalError("train_nll: loss diverged at epoch " + std::to_string(epoch));
    }
    history.push_back(loss);
    if (loss < best) {
      best = loss;
      best_theta = theta;
      best_epoch = epoch;
    }
    if (epoch == options.epochs || loss == 0.0) break;
    const int t = epoch + 1;
    m1 = beta1 * m1 + (1.0 - beta1) * g;
    m2 = beta2 * m2 + (1.0 - beta2) * g.cwiseAbs2();
    const double c1 = 1.0 - std::pow(beta1, t), c2 = 1.0 - std::pow(beta2, t);
    theta -= (options.learning_rate * (m1 / c1).array() / ((m2 / c2).array().sqrt() + eps)).matrix();
    net.set_parameters(theta);
  }
  net.set_parameters(best_theta);
  if (report) {
    report->loss = std::move(history);
    report->best_epoch = best_epoch;
    report->best_loss = best;
  }
  return net;
}

}  // namespace mfas
