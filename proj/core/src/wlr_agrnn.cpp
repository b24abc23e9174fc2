#include "eltd/wlr_agrnn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "eltd/error.hpp"

namespace eltd::wlr_agrnn {

std::vector<double> WlrParams::flatten() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (Eigen::Index r = 0; r < w1.rows(); ++r) {
    for (Eigen::Index c = 0; c < w1.cols(); ++c) out.push_back(w1(r, c));
  }
  for (Eigen::Index k = 0; k < b1.size(); ++k) out.push_back(b1(k));
  for (Eigen::Index k = 0; k < w2.size(); ++k) out.push_back(w2(k));
  out.push_back(b2);
  return out;
}

void WlrParams::assign(std::span<const double> flat) {
  if (flat.size() != parameter_count()) throw Error(ErrorCode::DimensionMismatch, "parameter vector has the wrong length");
  std::size_t p = 0;
  for (Eigen::Index r = 0; r < w1.rows(); ++r) {
    for (Eigen::Index c = 0; c < w1.cols(); ++c) w1(r, c) = flat[p++];
  }
  for (Eigen::Index k = 0; k < b1.size(); ++k) b1(k) = flat[p++];
  for (Eigen::Index k = 0; k < w2.size(); ++k) w2(k) = flat[p++];
  b2 = flat[p];
}

WlrParams WlrParams::zeros(std::size_t hidden, std::size_t inputs) {
  if (hidden == 0 || inputs == 0) throw Error(ErrorCode::InvalidArgument, "WLR layers must be non-empty");
  const auto h = static_cast<Eigen::Index>(hidden), n = static_cast<Eigen::Index>(inputs);
  return {Eigen::MatrixXd::Zero(h, n), Eigen::VectorXd::Zero(h), Eigen::RowVectorXd::Zero(h), 0.0};
}

WlrParams WlrParams::random(std::size_t hidden, std::size_t inputs, std::uint64_t seed) {
  auto p = zeros(hidden, inputs);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u1(-1.0 / std::sqrt(static_cast<double>(inputs)),
                                            1.0 / std::sqrt(static_cast<double>(inputs)));
  std::uniform_real_distribution<double> u2(-1.0 / std::sqrt(static_cast<double>(hidden)),
                                            1.0 / std::sqrt(static_cast<double>(hidden)));
  for (Eigen::Index r = 0; r < p.w1.rows(); ++r) {
    for (Eigen::Index c = 0; c < p.w1.cols(); ++c) p.w1(r, c) = u1(rng);
  }
  for (Eigen::Index k = 0; k < p.w2.size(); ++k) p.w2(k) = u2(rng);
  return p;
}

double wlr_forward(const WlrParams& params, std::span<const double> x) {
  if (x.size() != params.inputs()) {
    throw Error(ErrorCode::DimensionMismatch, "WLR expects " + std::to_string(params.inputs()) + " inputs, got " +
                                                  std::to_string(x.size()));
  }
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  return params.w2.dot(params.w1 * xv + params.b1) + params.b2;
}

// ---------------------------------------------------------------------------

std::string_view to_string(ElevationTransform t) noexcept {
  return t == ElevationTransform::Raw ? "raw" : "floored_normalized";
}

ElevationTransform parse_elevation_transform(std::string_view s) {
  if (s == "raw") return ElevationTransform::Raw;
  if (s == "floored_normalized") return ElevationTransform::FlooredNormalized;
  throw Error(ErrorCode::ConfigError, "unknown elevation transform '" + std::string(s) + "'");
}

std::vector<double> transform_elevation(std::span<const double> profile, const ElevationWeighting& w) {
  if (profile.empty()) throw Error(ErrorCode::Empty, "empty elevation profile");
  std::vector<double> out(profile.begin(), profile.end());
  for (double h : out) {
    if (!std::isfinite(h)) throw Error(ErrorCode::NoElevationData, "non-finite elevation in profile");
  }
  if (w.kind == ElevationTransform::Raw) {
    for (double h : out) {
      if (h < 0.0) throw Error(ErrorCode::OutOfRange, "raw elevation weighting needs non-negative heights");
    }
    return out;
  }
  if (!(w.floor_m > 0.0)) throw Error(ErrorCode::InvalidArgument, "elevation floor must be positive");
  double sum = 0.0;
  for (auto& h : out) {
    h = std::max(h, w.floor_m);
    sum += h;
  }
  const double scale = sum / static_cast<double>(out.size());
  for (auto& h : out) h /= scale;
  return out;
}

std::vector<double> elevation_weight(std::span<const double> xhat, std::span<const double> profile,
                                     const ElevationWeighting& w) {
  if (xhat.size() != profile.size()) throw Error(ErrorCode::LengthMismatch, "expert outputs and profile differ in length");
  auto out = transform_elevation(profile, w);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] *= xhat[j];
  return out;
}

// ---------------------------------------------------------------------------

KernelEstimate agrnn_predict(std::span<const double> query, const Bank& bank, std::span<const double> y,
                             std::span<const double> sigmas) {
  if (bank.cols() == 0) throw Error(ErrorCode::EmptyBank, "kernel bank has no columns");
  const auto l = static_cast<std::size_t>(bank.rows());
  if (query.size() != l || sigmas.size() != l || y.size() != static_cast<std::size_t>(bank.cols())) {
    throw Error(ErrorCode::DimensionMismatch, "query, sigmas and targets must match the bank shape");
  }
  const auto T = static_cast<std::size_t>(bank.cols());
  std::vector<double> expo(T);
  double best = -std::numeric_limits<double>::infinity();
  std::size_t nearest = 0;
  for (std::size_t t = 0; t < T; ++t) {
    double d = 0.0;
    for (std::size_t j = 0; j < l; ++j) {
      const double z = (query[j] - bank(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(t))) / sigmas[j];
      d += z * z;
    }
    expo[t] = -0.5 * d;
    if (expo[t] > best) {
      best = expo[t];
      nearest = t;
    }
  }
  if (!std::isfinite(best)) return {y[nearest], true};
  double num = 0.0, den = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const double k = std::exp(expo[t] - best);
    num += k * y[t];
    den += k;
  }
  if (!(den > 0.0)) return {y[nearest], true};
  return {num / den, false};
}

std::vector<double> bank_row_sd(const Bank& bank, std::size_t* degenerate_rows) {
  std::vector<double> sd(static_cast<std::size_t>(bank.rows()));
  std::size_t degenerate = 0;
  const auto T = static_cast<double>(bank.cols());
  for (Eigen::Index j = 0; j < bank.rows(); ++j) {
    const double mean = bank.row(j).mean();
    const double ss = (bank.row(j).array() - mean).square().sum();
    const double floor = 1e-6 * std::abs(mean) + 1e-12;
    double s = T > 1 ? std::sqrt(ss / (T - 1.0)) : 0.0;
    if (!(s > floor)) {
      s = floor;
      ++degenerate;
    }
    sd[static_cast<std::size_t>(j)] = s;
  }
  if (degenerate_rows) *degenerate_rows = degenerate;
  return sd;
}

namespace {

// Squared anisotropic distances between bank columns, +inf where the leave-out rule excludes a pair.
Eigen::MatrixXd pairwise_d(const Bank& bank, std::span<const double> scale_per_row, const LooExclusion& ex) {
  Eigen::MatrixXd scaled = bank;
  for (Eigen::Index j = 0; j < bank.rows(); ++j) scaled.row(j) /= scale_per_row[static_cast<std::size_t>(j)];
  const Eigen::VectorXd q = scaled.colwise().squaredNorm().transpose();
  Eigen::MatrixXd d(bank.cols(), bank.cols());
  d.noalias() = -2.0 * scaled.transpose() * scaled;
  d.colwise() += q;
  d.rowwise() += q.transpose();
  d = d.cwiseMax(0.0);
  mask_leave_out(d, ex.hours, ex.window);
  return d;
}

// Column t of the result holds normalised leave-one-out weights P(s, t) for target epoch t.
Eigen::MatrixXd loo_weights(const Eigen::MatrixXd& d, double inv_scale_sq) {
  Eigen::MatrixXd e = (-0.5 * inv_scale_sq) * d;
  const Eigen::RowVectorXd top = e.colwise().maxCoeff();
  e.rowwise() -= top;
  Eigen::MatrixXd k = e.array().exp().matrix();
  const Eigen::RowVectorXd s = k.colwise().sum();
  k.array().rowwise() /= s.array();
  return k;
}

// Fused single pass of loo_weights + weighted_rss for the sigma search; dmin holds column minima of d.
double fused_wrss(const Eigen::MatrixXd& d, const Eigen::VectorXd& dmin, double inv_scale_sq, std::span<const double> y,
                  std::span<const double> w) {
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
  const double g = -0.5 * inv_scale_sq;
  double wrss = 0.0;
  for (Eigen::Index t = 0; t < d.cols(); ++t) {
    const Eigen::ArrayXd k = ((d.col(t).array() - dmin(t)) * g).exp();
    const double yhat = (k * yv.array()).sum() / k.sum();
    const double r = y[static_cast<std::size_t>(t)] - yhat;
    wrss += w[static_cast<std::size_t>(t)] * r * r;
  }
  return wrss;
}

double weighted_rss(const Eigen::MatrixXd& p, std::span<const double> y, std::span<const double> w,
                    Eigen::VectorXd* yhat_out) {
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
  const Eigen::Map<const Eigen::VectorXd> wv(w.data(), static_cast<Eigen::Index>(w.size()));
  Eigen::VectorXd yhat = p.transpose() * yv;
  const double wrss = (wv.array() * (yv - yhat).array().square()).sum();
  if (yhat_out) *yhat_out = std::move(yhat);
  return wrss;
}

void check_targets(const Bank& bank, std::span<const double> y, std::span<const double> w) {
  if (y.size() != static_cast<std::size_t>(bank.cols()) || w.size() != y.size()) {
    throw Error(ErrorCode::LengthMismatch, "bank columns, targets and weights differ in length");
  }
  if (bank.cols() < 2) throw Error(ErrorCode::DegenerateBank, "leave-one-out needs at least 2 bank columns");
}

}  // namespace

double loo_wrss(const Bank& bank, std::span<const double> y, std::span<const double> weights,
                std::span<const double> row_sd, double scale, const LooExclusion& exclusion) {
  check_targets(bank, y, weights);
  if (row_sd.size() != static_cast<std::size_t>(bank.rows())) {
    throw Error(ErrorCode::DimensionMismatch, "row_sd length differs from bank rows");
  }
  if (!(scale > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma scale must be positive");
  return weighted_rss(loo_weights(pairwise_d(bank, row_sd, exclusion), 1.0 / (scale * scale)), y, weights, nullptr);
}

SigmaSelection select_sigmas(const Bank& bank, std::span<const double> y, std::span<const double> weights,
                             double c_min, double c_max, const LooExclusion& exclusion) {
  check_targets(bank, y, weights);
  if (!(c_min > 0.0 && c_max > c_min)) throw Error(ErrorCode::InvalidArgument, "bad sigma scale bracket");
  SigmaSelection sel;
  sel.row_sd = bank_row_sd(bank, &sel.degenerate_rows);
  const Eigen::MatrixXd d1 = pairwise_d(bank, sel.row_sd, exclusion);
  const Eigen::VectorXd dmin = d1.colwise().minCoeff().transpose();
  auto f = [&](double c) { return fused_wrss(d1, dmin, 1.0 / (c * c), y, weights); };

  constexpr double kInvPhi = 0.6180339887498949;
  double a = c_min, b = c_max;
  double x1 = b - kInvPhi * (b - a), x2 = a + kInvPhi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > 1e-3) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
    }
  }
  // endpoints guard against a monotone objective
  double best_c = f1 <= f2 ? x1 : x2, best_f = std::min(f1, f2);
  for (double c : {c_min, c_max}) {
    const double fc = f(c);
    if (fc < best_f) {
      best_f = fc;
      best_c = c;
    }
  }
  if (!std::isfinite(best_f)) throw Error(ErrorCode::NonFiniteLoss, "leave-one-out WRSS is not finite");
  sel.scale = best_c;
  sel.loo_wrss = best_f;
  sel.sigmas.resize(sel.row_sd.size());
  for (std::size_t j = 0; j < sel.sigmas.size(); ++j) sel.sigmas[j] = best_c * sel.row_sd[j];
  return sel;
}

// ---------------------------------------------------------------------------

std::string_view to_string(WeightScheme s) noexcept {
  return s == WeightScheme::Uniform ? "uniform" : "inverse_residual";
}

WeightScheme parse_weight_scheme(std::string_view s) {
  if (s == "uniform") return WeightScheme::Uniform;
  if (s == "inverse_residual") return WeightScheme::InverseResidual;
  throw Error(ErrorCode::ConfigError, "unknown weight scheme '" + std::string(s) + "'");
}

Bank build_bank(const WlrParams& params, const Problem& problem) {
  const auto T = problem.epochs(), l = problem.locations();
  if (problem.x.size() != T || problem.w.size() != T) throw Error(ErrorCode::LengthMismatch, "problem arrays differ in length");
  const Eigen::VectorXd v = params.w1.transpose() * params.w2.transpose();
  const double beta = params.w2.dot(params.b1) + params.b2;
  const Eigen::Map<const Eigen::VectorXd> h(problem.h_weight.data(), static_cast<Eigen::Index>(l));
  Bank u(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(T));
  for (std::size_t t = 0; t < T; ++t) {
    const auto& xt = problem.x[t];
    if (static_cast<std::size_t>(xt.rows()) != l || xt.cols() != v.size()) {
      throw Error(ErrorCode::DimensionMismatch, "epoch slab has the wrong shape");
    }
    u.col(static_cast<Eigen::Index>(t)) = h.cwiseProduct((xt * v).array().matrix() + Eigen::VectorXd::Constant(h.size(), beta));
  }
  return u;
}

Objective wrss_and_gradient(const WlrParams& params, const Problem& problem, std::span<const double> sigmas) {
  const Bank u = build_bank(params, problem);
  check_targets(u, problem.y, problem.w);
  if (sigmas.size() != problem.locations()) throw Error(ErrorCode::DimensionMismatch, "sigma count differs from locations");
  for (double s : sigmas) {
    if (!(s > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigmas must be positive");
  }
  const Eigen::MatrixXd p = loo_weights(pairwise_d(u, sigmas, problem.exclusion()), 1.0);
  Eigen::VectorXd yhat;
  const double wrss = weighted_rss(p, problem.y, problem.w, &yhat);

  const auto T = static_cast<Eigen::Index>(problem.epochs());
  const Eigen::Map<const Eigen::VectorXd> yv(problem.y.data(), T);
  const Eigen::Map<const Eigen::VectorXd> wv(problem.w.data(), T);
  const Eigen::VectorXd g = -2.0 * wv.cwiseProduct(yv - yhat);
  // a(s, t) = g_t P(s, t) (y_s - yhat_t)
  Eigen::MatrixXd a = p;
  for (Eigen::Index t = 0; t < T; ++t) {
    a.col(t).array() *= g(t) * (yv.array() - yhat(t));
  }
  const Eigen::MatrixXd m = a + a.transpose();
  const Eigen::RowVectorXd msum = m.colwise().sum();
  Eigen::MatrixXd du = u * m;
  du = u.array().rowwise() * msum.array() - du.array();
  for (Eigen::Index j = 0; j < du.rows(); ++j) {
    const double s = sigmas[static_cast<std::size_t>(j)];
    du.row(j) *= -problem.h_weight[static_cast<std::size_t>(j)] / (s * s);
  }
  // du now holds dL/dxhat
  const auto n = static_cast<Eigen::Index>(params.inputs());
  Eigen::VectorXd ax = Eigen::VectorXd::Zero(n);
  for (Eigen::Index t = 0; t < T; ++t) ax.noalias() += problem.x[static_cast<std::size_t>(t)].transpose() * du.col(t);
  const double s = du.sum();

  Objective out{wrss, std::vector<double>(yhat.data(), yhat.data() + yhat.size()), WlrParams::zeros(params.hidden(), params.inputs())};
  out.gradient.w1 = params.w2.transpose() * ax.transpose();
  out.gradient.b1 = params.w2.transpose() * s;
  out.gradient.w2 = (params.w1 * ax + s * params.b1).transpose();
  out.gradient.b2 = s;
  return out;
}

// ---------------------------------------------------------------------------

Model::Model(WlrParams params, ElevationWeighting elevation, std::vector<double> h_weight, std::vector<double> sigmas,
             Bank bank, std::vector<double> y, WeightScheme weights, std::vector<double> epoch_weights,
             Standardizer scaler, ModelAxes axes)
    : params_(std::move(params)), elevation_(elevation), h_weight_(std::move(h_weight)), sigmas_(std::move(sigmas)),
      bank_(std::move(bank)), y_(std::move(y)), weights_(weights), epoch_weights_(std::move(epoch_weights)),
      scaler_(std::move(scaler)), axes_(std::move(axes)) {
  const auto l = h_weight_.size();
  if (bank_.cols() == 0) throw Error(ErrorCode::EmptyBank, "kernel bank has no columns");
  if (static_cast<std::size_t>(bank_.rows()) != l || sigmas_.size() != l) {
    throw Error(ErrorCode::DimensionMismatch, "bank rows, sigmas and elevation weights differ");
  }
  if (static_cast<std::size_t>(bank_.cols()) != y_.size() || epoch_weights_.size() != y_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "bank columns, targets and epoch weights differ");
  }
  if (scaler_.size() != params_.inputs()) throw Error(ErrorCode::DimensionMismatch, "scaler width differs from WLR inputs");
  if (axes_.locations != 0 && axes_.locations != l) throw Error(ErrorCode::DimensionMismatch, "axes disagree with bank rows");
  for (double s : sigmas_) {
    if (!(s > 0.0) || !std::isfinite(s)) throw Error(ErrorCode::NonFiniteLoss, "sigmas must be positive and finite");
  }
}

std::vector<double> Model::query_vector(std::span<const double> slab) const {
  const auto l = h_weight_.size(), n = params_.inputs();
  if (slab.size() != l * n) throw Error(ErrorCode::DimensionMismatch, "slab does not match locations x factors");
  std::vector<double> u(l), z(n);
  for (std::size_t j = 0; j < l; ++j) {
    std::copy_n(slab.begin() + static_cast<std::ptrdiff_t>(j * n), n, z.begin());
    scaler_.apply_inplace(z);
    u[j] = h_weight_[j] * wlr_forward(params_, z);
  }
  return u;
}

KernelEstimate Model::predict_detail(std::span<const double> slab) const {
  return agrnn_predict(query_vector(slab), bank_, y_, sigmas_);
}

std::vector<double> Model::predict_all(const PathFeatureTensor& x) const {
  check_axes(axes_, x);
  std::vector<double> out;
  out.reserve(x.epoch_count());
  for (std::size_t t = 0; t < x.epoch_count(); ++t) out.push_back(predict(x.epoch_row(t)));
  return out;
}

// ---------------------------------------------------------------------------

Standardizer fit_factor_scaler(const PathFeatureTensor& x) {
  const auto rows = x.epoch_count() * x.location_count();
  const auto n = x.factor_count();
  Eigen::MatrixXd pooled(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t i = 0; i < n; ++i) pooled(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) = x.data[r * n + i];
  }
  return Standardizer::fit(pooled);
}

Problem make_problem(const TrainingData& data, std::span<const double> profile, const ElevationWeighting& elevation,
                     const Standardizer& scaler) {
  const auto T = data.size(), l = data.x.location_count(), n = data.x.factor_count();
  if (data.x.epoch_count() != T) throw Error(ErrorCode::LengthMismatch, "tensor epochs and targets differ");
  if (profile.size() != l) throw Error(ErrorCode::LengthMismatch, "elevation profile length differs from locations");
  if (scaler.size() != n) throw Error(ErrorCode::DimensionMismatch, "scaler width differs from factor count");
  Problem p;
  p.h_weight = transform_elevation(profile, elevation);
  p.y = data.y;
  p.w.assign(T, 1.0);
  p.hours.reserve(T);
  for (const auto& e : data.x.epochs) p.hours.push_back(e.hours_since_epoch());
  p.x.reserve(T);
  std::vector<double> z(n);
  for (std::size_t t = 0; t < T; ++t) {
    Eigen::MatrixXd slab(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < l; ++j) {
      for (std::size_t i = 0; i < n; ++i) z[i] = data.x.at(t, j, i);
      scaler.apply_inplace(z);
      for (std::size_t i = 0; i < n; ++i) slab(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = z[i];
    }
    p.x.push_back(std::move(slab));
  }
  return p;
}

namespace {

void refresh_weights(Problem& p, const std::vector<double>& yhat, double eps) {
  double sum = 0.0;
  for (std::size_t t = 0; t < p.y.size(); ++t) {
    p.w[t] = 1.0 / (eps + std::abs(p.y[t] - yhat[t]));
    sum += p.w[t];
  }
  const double mean = sum / static_cast<double>(p.w.size());
  for (auto& w : p.w) w /= mean;
}

}  // namespace

TrainResult train(const TrainingData& data, std::span<const double> profile, const TrainConfig& cfg) {
  if (data.size() < 2) throw Error(ErrorCode::DegenerateBank, "training needs at least 2 epochs");
  // zero is allowed: it freezes the initial parameters (useful as a diagnostic)
  if (!(cfg.learning_rate >= 0.0) || !std::isfinite(cfg.learning_rate)) {
    throw Error(ErrorCode::InvalidArgument, "learning rate must be >= 0");
  }
  if (cfg.weight_refresh == 0) throw Error(ErrorCode::InvalidArgument, "weight refresh interval must be positive");
  if (!(cfg.weight_epsilon_ns > 0.0)) throw Error(ErrorCode::InvalidArgument, "weight epsilon must be positive");
  auto scaler = fit_factor_scaler(data.x);
  Problem problem = make_problem(data, profile, cfg.elevation, scaler);
  if (cfg.loo_exclusion_hours < 0) throw Error(ErrorCode::InvalidArgument, "leave-out window must be non-negative");
  problem.exclusion_hours = cfg.loo_exclusion_hours;
  WlrParams params = WlrParams::random(cfg.hidden, data.x.factor_count(), cfg.seed);

  const auto np = params.parameter_count();
  std::vector<double> m1(np, 0.0), m2(np, 0.0);
  double b1_pow = 1.0, b2_pow = 1.0;
  TrainingTrace trace;
  std::size_t window_start = 0;
  std::vector<double> last_yhat;
  for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
    if (cfg.weights == WeightScheme::InverseResidual && it > 0 && it % cfg.weight_refresh == 0) {
      refresh_weights(problem, last_yhat, cfg.weight_epsilon_ns);
      window_start = trace.loss.size();
    }
    const auto sel = select_sigmas(build_bank(params, problem), problem.y, problem.w, kSigmaScaleMin, kSigmaScaleMax,
                                   problem.exclusion());
    auto obj = wrss_and_gradient(params, problem, sel.sigmas);
    if (!std::isfinite(obj.wrss)) throw Error(ErrorCode::NonFiniteLoss, "WRSS diverged at iteration " + std::to_string(it));
    trace.loss.push_back(obj.wrss);
    trace.iterations = it + 1;
    last_yhat = std::move(obj.yhat);
    const auto k = trace.loss.size() - 1;
    if (k >= window_start + 5) {
      const double ref = trace.loss[k - 5];
      if (std::abs(trace.loss[k] - ref) <= cfg.tolerance * std::max(std::abs(ref), 1e-300)) {
        trace.converged = true;
        break;
      }
    }
    const auto grad = obj.gradient.flatten();
    auto theta = params.flatten();
    b1_pow *= cfg.adam_beta1;
    b2_pow *= cfg.adam_beta2;
    for (std::size_t q = 0; q < np; ++q) {
      if (!std::isfinite(grad[q])) throw Error(ErrorCode::NonFiniteLoss, "non-finite WRSS gradient");
      m1[q] = cfg.adam_beta1 * m1[q] + (1.0 - cfg.adam_beta1) * grad[q];
      m2[q] = cfg.adam_beta2 * m2[q] + (1.0 - cfg.adam_beta2) * grad[q] * grad[q];
      const double mh = m1[q] / (1.0 - b1_pow), vh = m2[q] / (1.0 - b2_pow);
      theta[q] -= cfg.learning_rate * mh / (std::sqrt(vh) + cfg.adam_epsilon);
    }
    params.assign(theta);
  }

  Bank bank = build_bank(params, problem);
  auto sel = select_sigmas(bank, problem.y, problem.w, kSigmaScaleMin, kSigmaScaleMax, problem.exclusion());
  ModelAxes axes = axes_of(data.x);
  Model model(std::move(params), cfg.elevation, problem.h_weight, std::move(sel.sigmas), std::move(bank), problem.y,
              cfg.weights, problem.w, std::move(scaler), std::move(axes));
  model.set_loo_exclusion_hours(cfg.loo_exclusion_hours);
  return {std::move(model), std::move(trace)};
}

}  // namespace eltd::wlr_agrnn
