#include "eltd/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "eltd/error.hpp"

namespace eltd {

Eigen::VectorXd Mlp::forward(const Eigen::MatrixXd& x) const {
  if (static_cast<std::size_t>(x.cols()) != inputs()) throw Error(ErrorCode::DimensionMismatch, "MLP input width mismatch");
  Eigen::MatrixXd a = x * w1.transpose();
  a.rowwise() += b1.transpose();
  return a.array().tanh().matrix() * w2 + Eigen::VectorXd::Constant(x.rows(), b2);
}

double Mlp::forward_one(std::span<const double> x) const {
  if (x.size() != inputs()) throw Error(ErrorCode::DimensionMismatch, "MLP input width mismatch");
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  return ((w1 * xv + b1).array().tanh().matrix()).dot(w2) + b2;
}

Mlp Mlp::random(std::size_t inputs, std::size_t hidden, std::uint64_t seed) {
  if (inputs == 0 || hidden == 0) throw Error(ErrorCode::InvalidArgument, "MLP layers must be non-empty");
  std::mt19937_64 rng(seed);
  const double r1 = 1.0 / std::sqrt(static_cast<double>(inputs)), r2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  std::uniform_real_distribution<double> u1(-r1, r1), u2(-r2, r2);
  const auto h = static_cast<Eigen::Index>(hidden), d = static_cast<Eigen::Index>(inputs);
  Mlp m{Eigen::MatrixXd(h, d), Eigen::VectorXd(h), Eigen::VectorXd(h), 0.0};
  for (Eigen::Index r = 0; r < h; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) m.w1(r, c) = u1(rng);
  }
  for (Eigen::Index r = 0; r < h; ++r) m.b1(r) = u1(rng);
  for (Eigen::Index r = 0; r < h; ++r) m.w2(r) = u2(rng);
  m.b2 = u2(rng);
  return m;
}

Adam::Adam(std::size_t size, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(size, 0.0), v_(size, 0.0) {
  if (!(lr >= 0.0)) throw Error(ErrorCode::InvalidArgument, "learning rate must be >= 0");
}

void Adam::step(std::span<double> theta, std::span<const double> grad) {
  if (theta.size() != m_.size() || grad.size() != m_.size()) throw Error(ErrorCode::DimensionMismatch, "Adam size mismatch");
  b1_pow_ *= beta1_;
  b2_pow_ *= beta2_;
  for (std::size_t q = 0; q < m_.size(); ++q) {
    if (!std::isfinite(grad[q])) throw Error(ErrorCode::NonFiniteLoss, "non-finite gradient");
    m_[q] = beta1_ * m_[q] + (1.0 - beta1_) * grad[q];
    v_[q] = beta2_ * v_[q] + (1.0 - beta2_) * grad[q] * grad[q];
    theta[q] -= lr_ * (m_[q] / (1.0 - b1_pow_)) / (std::sqrt(v_[q] / (1.0 - b2_pow_)) + eps_);
  }
}

namespace {

void append(const Mlp& m, std::vector<double>& out) {
  for (Eigen::Index r = 0; r < m.w1.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.w1.cols(); ++c) out.push_back(m.w1(r, c));
  }
  for (Eigen::Index k = 0; k < m.b1.size(); ++k) out.push_back(m.b1(k));
  for (Eigen::Index k = 0; k < m.w2.size(); ++k) out.push_back(m.w2(k));
  out.push_back(m.b2);
}

std::size_t load(Mlp& m, std::span<const double> flat, std::size_t p) {
  for (Eigen::Index r = 0; r < m.w1.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.w1.cols(); ++c) m.w1(r, c) = flat[p++];
  }
  for (Eigen::Index k = 0; k < m.b1.size(); ++k) m.b1(k) = flat[p++];
  for (Eigen::Index k = 0; k < m.w2.size(); ++k) m.w2(k) = flat[p++];
  m.b2 = flat[p++];
  return p;
}

// Forward with cached activations; appends dLoss/dparams given dLoss/dout.
struct MlpPass {
  Eigen::MatrixXd act;  // N x hidden, tanh outputs
  Eigen::VectorXd out;

  MlpPass(const Mlp& m, const Eigen::MatrixXd& x) {
    act = x * m.w1.transpose();
    act.rowwise() += m.b1.transpose();
    act = act.array().tanh().matrix();
    out = act * m.w2 + Eigen::VectorXd::Constant(x.rows(), m.b2);
  }

  void backward(const Mlp& m, const Eigen::MatrixXd& x, const Eigen::VectorXd& dout, std::vector<double>& grad) const {
    const Eigen::VectorXd gw2 = act.transpose() * dout;
    const Eigen::MatrixXd da = ((dout * m.w2.transpose()).array() * (1.0 - act.array().square())).matrix();
    const Eigen::MatrixXd gw1 = da.transpose() * x;
    const Eigen::VectorXd gb1 = da.colwise().sum().transpose();
    for (Eigen::Index r = 0; r < gw1.rows(); ++r) {
      for (Eigen::Index c = 0; c < gw1.cols(); ++c) grad.push_back(gw1(r, c));
    }
    for (Eigen::Index k = 0; k < gb1.size(); ++k) grad.push_back(gb1(k));
    for (Eigen::Index k = 0; k < gw2.size(); ++k) grad.push_back(gw2(k));
    grad.push_back(dout.sum());
  }
};

struct TargetScale {
  double mean, sd;
};

TargetScale target_scale(std::span<const double> y) {
  if (y.empty()) throw Error(ErrorCode::Empty, "no training targets");
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double ss = 0.0;
  for (double v : y) ss += (v - mean) * (v - mean);
  double sd = y.size() > 1 ? std::sqrt(ss / static_cast<double>(y.size() - 1)) : 0.0;
  if (!(sd > 1e-12)) sd = 1.0;
  return {mean, sd};
}

bool converged(const std::vector<double>& loss, double tol) {
  if (loss.size() < 6) return false;
  const double cur = loss.back(), ref = loss[loss.size() - 6];
  return std::abs(cur - ref) <= tol * std::max(std::abs(ref), 1e-300);
}

FeatureLayout effective_layout(const PathFeatureTensor& x, FeatureLayout requested) {
  return x.location_count() == 1 ? FeatureLayout::Flatten : requested;
}

void check_rows(const Eigen::MatrixXd& rows, std::span<const double> y) {
  if (static_cast<std::size_t>(rows.rows()) != y.size()) throw Error(ErrorCode::LengthMismatch, "rows and targets differ");
  if (rows.rows() == 0) throw Error(ErrorCode::Empty, "no training rows");
}

}  // namespace

// ---------------------------------------------------------------------------

namespace bpnn {

Model::Model(Mlp net, Standardizer scaler, double y_mean, double y_sd, FeatureLayout layout, ModelAxes axes)
    : net_(std::move(net)), scaler_(std::move(scaler)), y_mean_(y_mean), y_sd_(y_sd), layout_(layout),
      axes_(std::move(axes)) {
  if (net_.inputs() != scaler_.size()) throw Error(ErrorCode::DimensionMismatch, "BPNN input width differs from scaler");
  if (!(y_sd_ > 0.0)) throw Error(ErrorCode::InvalidArgument, "target scale must be positive");
}

double Model::predict_vector(std::span<const double> x) const {
  if (x.size() != scaler_.size()) throw Error(ErrorCode::DimensionMismatch, "BPNN feature width mismatch");
  std::vector<double> z(x.begin(), x.end());
  scaler_.apply_inplace(z);
  return y_mean_ + y_sd_ * net_.forward_one(z);
}

double Model::predict(std::span<const double> slab) const {
  std::vector<double> row(feature_width(layout_, axes_.locations, axes_.factors.size()));
  layout_row(slab, axes_.locations, axes_.factors.size(), layout_, row);
  return predict_vector(row);
}

std::vector<double> Model::predict_all(const PathFeatureTensor& x) const {
  check_axes(axes_, x);
  std::vector<double> out;
  for (std::size_t t = 0; t < x.epoch_count(); ++t) out.push_back(predict(x.epoch_row(t)));
  return out;
}

TrainResult train_matrix(const Eigen::MatrixXd& rows, std::span<const double> y, const Config& cfg, ModelAxes axes) {
  check_rows(rows, y);
  auto scaler = Standardizer::fit(rows);
  const Eigen::MatrixXd x = scaler.apply(rows);
  const auto ts = target_scale(y);
  Eigen::VectorXd ys(static_cast<Eigen::Index>(y.size()));
  for (std::size_t t = 0; t < y.size(); ++t) ys(static_cast<Eigen::Index>(t)) = (y[t] - ts.mean) / ts.sd;

  Mlp net = Mlp::random(static_cast<std::size_t>(x.cols()), cfg.hidden, cfg.seed);
  Adam adam(net.parameter_count(), cfg.learning_rate);
  TrainingTrace trace;
  const double n = static_cast<double>(y.size());
  std::vector<double> theta, grad;
  for (std::size_t it = 0;; ++it) {
    MlpPass pass(net, x);
    const Eigen::VectorXd r = pass.out - ys;
    const double mse = r.squaredNorm() / n;
    if (!std::isfinite(mse)) throw Error(ErrorCode::NonFiniteLoss, "BPNN loss diverged");
    trace.loss.push_back(mse * ts.sd * ts.sd);
    trace.iterations = it;
    if (converged(trace.loss, cfg.tolerance)) {
      trace.converged = true;
      break;
    }
    if (it >= cfg.max_iterations) break;
    grad.clear();
    pass.backward(net, x, (2.0 / n) * r, grad);
    theta.clear();
    append(net, theta);
    adam.step(theta, grad);
    load(net, theta, 0);
  }
  return {Model(std::move(net), std::move(scaler), ts.mean, ts.sd, cfg.layout, std::move(axes)), std::move(trace)};
}

TrainResult train(const TrainingData& data, const Config& cfg) {
  Config c = cfg;
  c.layout = effective_layout(data.x, cfg.layout);
  return train_matrix(design_matrix(data.x, c.layout), data.y, c, axes_of(data.x));
}

}  // namespace bpnn

// ---------------------------------------------------------------------------

namespace grnn {

double estimate(std::span<const double> query, const Eigen::MatrixXd& bank, std::span<const double> y, double sigma) {
  if (bank.cols() == 0) throw Error(ErrorCode::EmptyBank, "GRNN bank is empty");
  if (query.size() != static_cast<std::size_t>(bank.rows()) || y.size() != static_cast<std::size_t>(bank.cols())) {
    throw Error(ErrorCode::DimensionMismatch, "GRNN query or targets do not match the bank");
  }
  if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
  const auto T = static_cast<std::size_t>(bank.cols());
  std::vector<double> expo(T);
  double best = -std::numeric_limits<double>::infinity();
  std::size_t nearest = 0;
  for (std::size_t t = 0; t < T; ++t) {
    double d = 0.0;
    for (std::size_t i = 0; i < query.size(); ++i) {
      const double z = query[i] - bank(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t));
      d += z * z;
    }
    expo[t] = -d / (2.0 * sigma * sigma);
    if (expo[t] > best) {
      best = expo[t];
      nearest = t;
    }
  }
  if (!std::isfinite(best)) return y[nearest];
  double num = 0.0, den = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const double k = std::exp(expo[t] - best);
    num += k * y[t];
    den += k;
  }
  return num / den;
}

std::vector<double> sigma_grid(std::size_t d) {
  std::vector<double> grid;
  const double root = std::sqrt(static_cast<double>(std::max<std::size_t>(d, 1)));
  for (int k = 0; k <= 40; ++k) grid.push_back(root * 0.01 * std::pow(300.0, k / 40.0));
  return grid;
}

std::vector<double> loo_mse(const Eigen::MatrixXd& bank, std::span<const double> y, std::span<const double> sigmas,
                            std::span<const std::int64_t> hours, std::int64_t exclusion_hours) {
  const auto T = bank.cols();
  if (static_cast<std::size_t>(T) != y.size()) throw Error(ErrorCode::LengthMismatch, "bank and targets differ");
  if (T < 2) throw Error(ErrorCode::EmptyBank, "leave-one-out needs at least 2 bank columns");
  const Eigen::VectorXd q = bank.colwise().squaredNorm().transpose();
  Eigen::MatrixXd d = -2.0 * bank.transpose() * bank;
  d.colwise() += q;
  d.rowwise() += q.transpose();
  d = d.cwiseMax(0.0);
  mask_leave_out(d, hours, exclusion_hours);
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), T);
  std::vector<double> out;
  for (double s : sigmas) {
    Eigen::MatrixXd e = (-1.0 / (2.0 * s * s)) * d;
    const Eigen::RowVectorXd top = e.colwise().maxCoeff();
    e.rowwise() -= top;
    const Eigen::MatrixXd k = e.array().exp().matrix();
    const Eigen::VectorXd yhat = (k.transpose() * yv).cwiseQuotient(k.colwise().sum().transpose());
    out.push_back((yv - yhat).squaredNorm() / static_cast<double>(T));
  }
  return out;
}

Model::Model(Eigen::MatrixXd bank, std::vector<double> y, double sigma, Standardizer scaler, FeatureLayout layout,
             ModelAxes axes)
    : bank_(std::move(bank)), y_(std::move(y)), sigma_(sigma), scaler_(std::move(scaler)), layout_(layout),
      axes_(std::move(axes)) {
  if (bank_.cols() == 0) throw Error(ErrorCode::EmptyBank, "GRNN bank is empty");
  if (static_cast<std::size_t>(bank_.cols()) != y_.size()) throw Error(ErrorCode::DimensionMismatch, "bank and targets differ");
  if (static_cast<std::size_t>(bank_.rows()) != scaler_.size()) throw Error(ErrorCode::DimensionMismatch, "bank and scaler differ");
  if (!(sigma_ > 0.0) || !std::isfinite(sigma_)) throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
}

double Model::predict_vector(std::span<const double> x) const {
  if (x.size() != scaler_.size()) throw Error(ErrorCode::DimensionMismatch, "GRNN feature width mismatch");
  std::vector<double> z(x.begin(), x.end());
  scaler_.apply_inplace(z);
  return estimate(z, bank_, y_, sigma_);
}

double Model::predict(std::span<const double> slab) const {
  std::vector<double> row(feature_width(layout_, axes_.locations, axes_.factors.size()));
  layout_row(slab, axes_.locations, axes_.factors.size(), layout_, row);
  return predict_vector(row);
}

std::vector<double> Model::predict_all(const PathFeatureTensor& x) const {
  check_axes(axes_, x);
  std::vector<double> out;
  for (std::size_t t = 0; t < x.epoch_count(); ++t) out.push_back(predict(x.epoch_row(t)));
  return out;
}

TrainResult train_matrix(const Eigen::MatrixXd& rows, std::span<const double> y, const Config& cfg, ModelAxes axes,
                         std::span<const std::int64_t> hours) {
  check_rows(rows, y);
  if (cfg.loo_exclusion_hours < 0) throw Error(ErrorCode::InvalidArgument, "leave-out window must be non-negative");
  auto scaler = Standardizer::fit(rows);
  Eigen::MatrixXd bank = scaler.apply(rows).transpose();
  TrainingTrace trace;
  double sigma = cfg.sigma;
  if (sigma > 0.0) {
    trace.loss.push_back(y.size() >= 2 ? loo_mse(bank, y, std::span<const double>(&sigma, 1), hours, cfg.loo_exclusion_hours).front() : 0.0);
  } else {
    const auto grid = sigma_grid(static_cast<std::size_t>(bank.rows()));
    const auto mse = loo_mse(bank, y, grid, hours, cfg.loo_exclusion_hours);
    const auto best = static_cast<std::size_t>(std::min_element(mse.begin(), mse.end()) - mse.begin());
    sigma = grid[best];
    trace.loss.push_back(mse[best]);
  }
  trace.iterations = 1;
  trace.converged = true;
  Model model(std::move(bank), std::vector<double>(y.begin(), y.end()), sigma, std::move(scaler), cfg.layout,
              std::move(axes));
  if (cfg.sigma <= 0.0 && !hours.empty()) model.set_loo_exclusion_hours(cfg.loo_exclusion_hours);
  return {std::move(model), std::move(trace)};
}

TrainResult train(const TrainingData& data, const Config& cfg) {
  Config c = cfg;
  c.layout = effective_layout(data.x, cfg.layout);
  std::vector<std::int64_t> hours;
  for (const auto& e : data.x.epochs) hours.push_back(e.hours_since_epoch());
  return train_matrix(design_matrix(data.x, c.layout), data.y, c, axes_of(data.x), hours);
}

}  // namespace grnn

// ---------------------------------------------------------------------------

namespace moe {

void group_inputs(std::span<const double> slab, std::size_t locations, std::size_t factors, std::size_t experts,
                  std::span<double> out) {
  if (slab.size() != locations * factors || out.size() != experts * factors || locations == 0) {
    throw Error(ErrorCode::DimensionMismatch, "mixture-of-experts input has the wrong shape");
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t k = 0; k < experts; ++k) {
    std::size_t lo = 0, hi = locations;
    if (locations >= experts) {
      lo = k * locations / experts;
      hi = (k + 1) * locations / experts;
    }
    for (std::size_t j = lo; j < hi; ++j) {
      for (std::size_t i = 0; i < factors; ++i) out[k * factors + i] += slab[j * factors + i];
    }
    for (std::size_t i = 0; i < factors; ++i) out[k * factors + i] /= static_cast<double>(hi - lo);
  }
}

namespace {

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd p = logits;
  const Eigen::VectorXd top = p.rowwise().maxCoeff();
  p.colwise() -= top;
  p = p.array().exp().matrix();
  const Eigen::VectorXd s = p.rowwise().sum();
  p.array().colwise() /= s.array();
  return p;
}

Eigen::MatrixXd expert_slice(const Eigen::MatrixXd& z, std::size_t k, std::size_t factors) {
  return z.middleCols(static_cast<Eigen::Index>(k * factors), static_cast<Eigen::Index>(factors));
}

}  // namespace

Model::Model(std::vector<Mlp> experts, Eigen::MatrixXd gate_w, Eigen::VectorXd gate_b, double temperature,
             Standardizer scaler, double y_mean, double y_sd, ModelAxes axes)
    : experts_(std::move(experts)), gate_w_(std::move(gate_w)), gate_b_(std::move(gate_b)), temperature_(temperature),
      scaler_(std::move(scaler)), y_mean_(y_mean), y_sd_(y_sd), axes_(std::move(axes)) {
  const auto k = experts_.size();
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "mixture of experts needs at least 2 experts");
  if (!(temperature_ > 0.0)) throw Error(ErrorCode::InvalidArgument, "gate temperature must be positive");
  if (scaler_.size() % k != 0) throw Error(ErrorCode::DimensionMismatch, "scaler width is not experts x factors");
  const auto n = scaler_.size() / k;
  for (const auto& e : experts_) {
    if (e.inputs() != n) throw Error(ErrorCode::DimensionMismatch, "expert input width mismatch");
  }
  if (static_cast<std::size_t>(gate_w_.rows()) != k || static_cast<std::size_t>(gate_w_.cols()) != scaler_.size() ||
      static_cast<std::size_t>(gate_b_.size()) != k) {
    throw Error(ErrorCode::DimensionMismatch, "gate shape mismatch");
  }
}

Eigen::VectorXd Model::standardize(std::span<const double> z) const {
  if (z.size() != scaler_.size()) throw Error(ErrorCode::DimensionMismatch, "mixture-of-experts input width mismatch");
  std::vector<double> s(z.begin(), z.end());
  scaler_.apply_inplace(s);
  return Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
}

std::vector<double> Model::gate_weights(std::span<const double> z) const {
  const Eigen::VectorXd s = standardize(z);
  const Eigen::MatrixXd logits = ((gate_w_ * s + gate_b_) / temperature_).transpose();
  const Eigen::MatrixXd p = softmax_rows(logits);
  return {p.data(), p.data() + p.size()};
}

std::vector<double> Model::expert_outputs(std::span<const double> z) const {
  const Eigen::VectorXd s = standardize(z);
  const auto n = scaler_.size() / experts_.size();
  std::vector<double> out;
  for (std::size_t k = 0; k < experts_.size(); ++k) {
    out.push_back(y_mean_ + y_sd_ * experts_[k].forward_one(std::span<const double>(s.data() + k * n, n)));
  }
  return out;
}

double Model::predict_vector(std::span<const double> z) const {
  const auto g = gate_weights(z);
  const auto f = expert_outputs(z);
  double out = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) out += g[k] * f[k];
  return out;
}

double Model::predict(std::span<const double> slab) const {
  const auto n = axes_.factors.size();
  std::vector<double> z(experts_.size() * n);
  group_inputs(slab, axes_.locations, n, experts_.size(), z);
  return predict_vector(z);
}

std::vector<double> Model::predict_all(const PathFeatureTensor& x) const {
  check_axes(axes_, x);
  std::vector<double> out;
  for (std::size_t t = 0; t < x.epoch_count(); ++t) out.push_back(predict(x.epoch_row(t)));
  return out;
}

TrainResult train_matrix(const Eigen::MatrixXd& rows, std::span<const double> y, const Config& cfg, ModelAxes axes) {
  check_rows(rows, y);
  const auto K = cfg.experts;
  if (K < 2) throw Error(ErrorCode::InvalidArgument, "mixture of experts needs at least 2 experts");
  if (!(cfg.temperature > 0.0)) throw Error(ErrorCode::InvalidArgument, "gate temperature must be positive");
  if (static_cast<std::size_t>(rows.cols()) % K != 0) throw Error(ErrorCode::DimensionMismatch, "rows are not experts x factors wide");
  const auto n = static_cast<std::size_t>(rows.cols()) / K;
  auto scaler = Standardizer::fit(rows);
  const Eigen::MatrixXd z = scaler.apply(rows);
  const auto ts = target_scale(y);
  const auto N = z.rows();
  Eigen::VectorXd ys(N);
  for (Eigen::Index t = 0; t < N; ++t) ys(t) = (y[static_cast<std::size_t>(t)] - ts.mean) / ts.sd;

  std::vector<Mlp> experts;
  for (std::size_t k = 0; k < K; ++k) experts.push_back(Mlp::random(n, cfg.hidden, cfg.seed + 1 + k));
  Eigen::MatrixXd gw(static_cast<Eigen::Index>(K), z.cols());
  Eigen::VectorXd gb = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(K));
  {
    std::mt19937_64 rng(cfg.seed);
    const double r = 1.0 / std::sqrt(static_cast<double>(z.cols()));
    std::uniform_real_distribution<double> u(-r, r);
    for (Eigen::Index a = 0; a < gw.rows(); ++a) {
      for (Eigen::Index b = 0; b < gw.cols(); ++b) gw(a, b) = u(rng);
    }
  }
  std::size_t np = static_cast<std::size_t>(gw.size() + gb.size());
  for (const auto& e : experts) np += e.parameter_count();
  Adam adam(np, cfg.learning_rate);

  std::vector<Eigen::MatrixXd> slices;
  for (std::size_t k = 0; k < K; ++k) slices.push_back(expert_slice(z, k, n));
  TrainingTrace trace;
  const double dn = static_cast<double>(N);
  std::vector<double> theta, grad;
  for (std::size_t it = 0;; ++it) {
    std::vector<MlpPass> passes;
    Eigen::MatrixXd f(N, static_cast<Eigen::Index>(K));
    for (std::size_t k = 0; k < K; ++k) {
      passes.emplace_back(experts[k], slices[k]);
      f.col(static_cast<Eigen::Index>(k)) = passes.back().out;
    }
    Eigen::MatrixXd logits = (z * gw.transpose()) / cfg.temperature;
    logits.rowwise() += (gb / cfg.temperature).transpose();
    const Eigen::MatrixXd p = softmax_rows(logits);
    const Eigen::VectorXd out = (p.array() * f.array()).rowwise().sum();
    const Eigen::VectorXd r = out - ys;
    const double mse = r.squaredNorm() / dn;
    if (!std::isfinite(mse)) throw Error(ErrorCode::NonFiniteLoss, "mixture-of-experts loss diverged");
    trace.loss.push_back(mse * ts.sd * ts.sd);
    trace.iterations = it;
    if (converged(trace.loss, cfg.tolerance)) {
      trace.converged = true;
      break;
    }
    if (it >= cfg.max_iterations) break;
    const Eigen::VectorXd dout = (2.0 / dn) * r;
    // d out / d logit_k = p_k (f_k - out)
    Eigen::MatrixXd dlogit = (p.array() * (f.colwise() - out).array()).matrix();
    dlogit.array().colwise() *= dout.array();
    dlogit /= cfg.temperature;
    const Eigen::MatrixXd ggw = dlogit.transpose() * z;
    const Eigen::VectorXd ggb = dlogit.colwise().sum().transpose();

    grad.clear();
    theta.clear();
    for (std::size_t k = 0; k < K; ++k) {
      const Eigen::VectorXd df = p.col(static_cast<Eigen::Index>(k)).cwiseProduct(dout);
      passes[k].backward(experts[k], slices[k], df, grad);
      append(experts[k], theta);
    }
    for (Eigen::Index a = 0; a < gw.rows(); ++a) {
      for (Eigen::Index b = 0; b < gw.cols(); ++b) {
        grad.push_back(ggw(a, b));
        theta.push_back(gw(a, b));
      }
    }
    for (Eigen::Index a = 0; a < gb.size(); ++a) {
      grad.push_back(ggb(a));
      theta.push_back(gb(a));
    }
    adam.step(theta, grad);
    std::size_t pos = 0;
    for (auto& e : experts) pos = load(e, theta, pos);
    for (Eigen::Index a = 0; a < gw.rows(); ++a) {
      for (Eigen::Index b = 0; b < gw.cols(); ++b) gw(a, b) = theta[pos++];
    }
    for (Eigen::Index a = 0; a < gb.size(); ++a) gb(a) = theta[pos++];
  }
  return {Model(std::move(experts), std::move(gw), std::move(gb), cfg.temperature, std::move(scaler), ts.mean, ts.sd,
                std::move(axes)),
          std::move(trace)};
}

TrainResult train(const TrainingData& data, const Config& cfg) {
  const auto n = data.x.factor_count(), l = data.x.location_count();
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(cfg.experts * n));
  std::vector<double> z(cfg.experts * n);
  for (std::size_t t = 0; t < data.size(); ++t) {
    group_inputs(data.x.epoch_row(t), l, n, cfg.experts, z);
    for (std::size_t c = 0; c < z.size(); ++c) rows(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c)) = z[c];
  }
  return train_matrix(rows, data.y, cfg, axes_of(data.x));
}

}  // namespace moe

}  // namespace eltd
