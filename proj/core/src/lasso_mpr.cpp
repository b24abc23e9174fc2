#include "eltd/lasso_mpr.hpp"

#include <algorithm>
#include <cmath>

#include "eltd/stats.hpp"

namespace eltd::lasso {

double soft_threshold(double z, double gamma) noexcept {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

double alpha_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const Eigen::VectorXd yc = y.array() - y.mean();
  const Eigen::RowVectorXd means = x.colwise().mean();
  const Eigen::MatrixXd xc = x.rowwise() - means;
  return 2.0 * (xc.transpose() * yc).cwiseAbs().maxCoeff();
}

double objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double intercept, const Eigen::VectorXd& w,
                 double alpha) {
  const Eigen::VectorXd r = y - (x * w).array().matrix() - Eigen::VectorXd::Constant(y.size(), intercept);
  return r.squaredNorm() + alpha * w.lpNorm<1>();
}

Fit coordinate_descent(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double alpha, double tolerance,
                       std::size_t max_sweeps) {
  if (x.rows() != y.size()) throw Error(ErrorCode::LengthMismatch, "design rows and target length differ");
  if (x.rows() < 1) throw Error(ErrorCode::Empty, "no training rows");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw Error(ErrorCode::InvalidArgument, "alpha must be >= 0");
  const Eigen::Index p = x.cols();
  const double y_mean = y.mean();
  const Eigen::VectorXd yc = y.array() - y_mean;
  const Eigen::RowVectorXd x_mean = x.colwise().mean();
  const Eigen::MatrixXd xc = x.rowwise() - x_mean;
  const Eigen::MatrixXd gram = xc.transpose() * xc;
  const Eigen::VectorXd xty = xc.transpose() * yc;
  const double yty = yc.squaredNorm();
  for (Eigen::Index k = 0; k < p; ++k) {
    if (!(gram(k, k) > 1e-12 * static_cast<double>(x.rows()))) {
      throw Error(ErrorCode::DegenerateDesign, "design column " + std::to_string(k) + " has no variance");
    }
  }

  Fit fit;
  fit.weights = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd gw = Eigen::VectorXd::Zero(p);  // gram * w
  auto current_objective = [&] {
    return yty - 2.0 * xty.dot(fit.weights) + fit.weights.dot(gw) + alpha * fit.weights.lpNorm<1>();
  };
  fit.trace.loss.push_back(current_objective());
  const double half_alpha = alpha / 2.0;
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index k = 0; k < p; ++k) {
      const double old = fit.weights(k);
      const double rho = xty(k) - gw(k) + gram(k, k) * old;
      const double updated = soft_threshold(rho, half_alpha) / gram(k, k);
      const double delta = updated - old;
      if (delta != 0.0) {
        fit.weights(k) = updated;
        gw.noalias() += delta * gram.col(k);
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    const double obj = current_objective();
    if (!std::isfinite(obj)) throw Error(ErrorCode::NonFiniteLoss, "LASSO objective diverged");
    fit.trace.loss.push_back(obj);
    fit.trace.iterations = sweep + 1;
    if (max_change < tolerance) {
      fit.trace.converged = true;
      break;
    }
  }
  fit.intercept = y_mean - x_mean.dot(fit.weights);
  return fit;
}

// ---------------------------------------------------------------------------

Model::Model(std::size_t degree, double alpha, FeatureLayout layout, Standardizer scaler,
             std::vector<double> coefficients, ModelAxes axes)
    : degree_(degree), alpha_(alpha), layout_(layout), scaler_(std::move(scaler)),
      coefficients_(std::move(coefficients)), axes_(std::move(axes)), index_(scaler_.size(), degree) {
  if (!(alpha >= 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be >= 0");
  if (coefficients_.size() != index_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "LASSO-MPR coefficient vector has the wrong length");
  }
  for (double c : coefficients_) {
    if (!std::isfinite(c)) throw Error(ErrorCode::NonFiniteLoss, "non-finite LASSO-MPR coefficient");
  }
}

double Model::predict_vector(std::span<const double> x) const {
  if (x.size() != scaler_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(scaler_.size()) + " features, got " +
                                                  std::to_string(x.size()));
  }
  std::vector<double> z(x.begin(), x.end());
  scaler_.apply_inplace(z);
  std::vector<double> terms(index_.size());
  poly_expand_into(z, index_, terms);
  double s = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) s += coefficients_[i] * terms[i];
  return s;
}

double Model::predict(std::span<const double> slab) const {
  std::vector<double> row(feature_width(layout_, axes_.locations, axes_.factors.size()));
  layout_row(slab, axes_.locations, axes_.factors.size(), layout_, row);
  return predict_vector(row);
}

std::vector<double> Model::predict_all(const PathFeatureTensor& x) const {
  check_axes(axes_, x);
  std::vector<double> out;
  out.reserve(x.epoch_count());
  for (std::size_t t = 0; t < x.epoch_count(); ++t) out.push_back(predict(x.epoch_row(t)));
  return out;
}

std::size_t Model::nonzero_weights() const noexcept {
  return static_cast<std::size_t>(std::count_if(coefficients_.begin() + 1, coefficients_.end(),
                                                [](double c) { return c != 0.0; }));
}

Eigen::MatrixXd expand_design(const Eigen::MatrixXd& scaled, const PolyTermIndex& index) {
  Eigen::MatrixXd out(scaled.rows(), static_cast<Eigen::Index>(index.size() - 1));
  std::vector<double> row(static_cast<std::size_t>(scaled.cols())), terms(index.size());
  for (Eigen::Index r = 0; r < scaled.rows(); ++r) {
    for (Eigen::Index c = 0; c < scaled.cols(); ++c) row[static_cast<std::size_t>(c)] = scaled(r, c);
    poly_expand_into(row, index, terms);
    for (std::size_t k = 1; k < terms.size(); ++k) out(r, static_cast<Eigen::Index>(k - 1)) = terms[k];
  }
  return out;
}

TrainResult train_matrix(const Eigen::MatrixXd& rows, const Eigen::VectorXd& y, const Config& cfg, ModelAxes axes) {
  if (cfg.degree < 1) throw Error(ErrorCode::InvalidArgument, "polynomial degree must be >= 1");
  auto scaler = Standardizer::fit(rows);
  const PolyTermIndex index(static_cast<std::size_t>(rows.cols()), cfg.degree);
  const Eigen::MatrixXd design = expand_design(scaler.apply(rows), index);
  auto fit = coordinate_descent(design, y, cfg.alpha, cfg.tolerance, cfg.max_sweeps);
  std::vector<double> coef(index.size());
  coef[0] = fit.intercept;
  for (Eigen::Index k = 0; k < fit.weights.size(); ++k) coef[static_cast<std::size_t>(k) + 1] = fit.weights(k);
  return {Model(cfg.degree, cfg.alpha, cfg.layout, std::move(scaler), std::move(coef), std::move(axes)),
          std::move(fit.trace)};
}

TrainResult train(const TrainingData& data, const Config& cfg) {
  Config c = cfg;
  if (data.x.location_count() == 1) c.layout = FeatureLayout::Flatten;
  const auto rows = design_matrix(data.x, c.layout);
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(data.y.data(), static_cast<Eigen::Index>(data.y.size()));
  return train_matrix(rows, y, c, axes_of(data.x));
}

// ---------------------------------------------------------------------------

std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  for (int k = 0; k <= 10; ++k) grid.push_back(std::pow(10.0, -3.0 + 0.5 * k));
  grid.push_back(0.5);
  std::sort(grid.begin(), grid.end());
  return grid;
}

namespace {

struct Split {
  Eigen::MatrixXd train_x, valid_x;
  Eigen::VectorXd train_y, valid_y;
};

Split split_tail(const Eigen::MatrixXd& rows, const Eigen::VectorXd& y, double validation_fraction) {
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "validation fraction must be in (0, 1)");
  }
  const auto n = rows.rows();
  const auto n_valid = static_cast<Eigen::Index>(std::ceil(validation_fraction * static_cast<double>(n)));
  const auto n_train = n - n_valid;
  if (n_train < 2 || n_valid < 1) throw Error(ErrorCode::Empty, "not enough rows to split for a sweep");
  return {rows.topRows(n_train), rows.bottomRows(n_valid), y.head(n_train), y.tail(n_valid)};
}

double validation_rmse(const Model& model, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  std::vector<double> pred, actual;
  std::vector<double> row(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) row[static_cast<std::size_t>(c)] = x(r, c);
    pred.push_back(model.predict_vector(row));
    actual.push_back(y(r));
  }
  return stats::rmse(actual, pred);
}

std::size_t argmin_of(const std::vector<SweepPoint>& pts) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].rmse < pts[best].rmse) best = i;
  }
  return best;
}

}  // namespace

SweepResult sweep_alpha(const Eigen::MatrixXd& rows, const Eigen::VectorXd& y, std::size_t degree,
                        std::span<const double> alphas, double validation_fraction, const Config& base) {
  if (alphas.empty()) throw Error(ErrorCode::InvalidArgument, "alpha grid is empty");
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] > 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha grid must be positive");
    if (i && !(alphas[i] > alphas[i - 1])) throw Error(ErrorCode::InvalidArgument, "alpha grid must be sorted");
  }
  const auto split = split_tail(rows, y, validation_fraction);
  SweepResult out;
  for (double a : alphas) {
    Config cfg = base;
    cfg.degree = degree;
    cfg.alpha = a;
    auto res = train_matrix(split.train_x, split.train_y, cfg, {});
    out.points.push_back({a, validation_rmse(res.model, split.valid_x, split.valid_y)});
  }
  out.argmin = argmin_of(out.points);
  return out;
}

SweepResult sweep_degree(const Eigen::MatrixXd& rows, const Eigen::VectorXd& y, double alpha,
                         std::span<const std::size_t> degrees, double validation_fraction, const Config& base) {
  if (degrees.empty()) throw Error(ErrorCode::InvalidArgument, "degree grid is empty");
  const auto split = split_tail(rows, y, validation_fraction);
  SweepResult out;
  for (auto m : degrees) {
    Config cfg = base;
    cfg.degree = m;
    cfg.alpha = alpha;
    auto res = train_matrix(split.train_x, split.train_y, cfg, {});
    out.points.push_back({static_cast<double>(m), validation_rmse(res.model, split.valid_x, split.valid_y)});
  }
  out.argmin = argmin_of(out.points);
  return out;
}

}  // namespace eltd::lasso
