#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "eltd/features.hpp"
#include "eltd/model_common.hpp"

namespace eltd::lasso {

inline constexpr std::size_t kDefaultDegree = 3;
inline constexpr double kDefaultAlpha = 0.5;

struct Config {
  std::size_t degree = kDefaultDegree;
  double alpha = kDefaultAlpha;
  double tolerance = 1e-8;
  std::size_t max_sweeps = 100000;
  /// Path-mode inputs are reduced to per-factor location means before expansion.
  FeatureLayout layout = FeatureLayout::LocationMean;
};

/// Result of minimising sum_t (y_t - b0 - x_t.w)^2 + alpha * |w|_1 with an unpenalised b0.
struct Fit {
  double intercept = 0.0;
  Eigen::VectorXd weights;
  TrainingTrace trace;
};

/// Soft-threshold operator S(z, g) = sign(z) * max(|z| - g, 0).
double soft_threshold(double z, double gamma) noexcept;

/// Smallest alpha for which every penalised weight is zero: max_p |2 x_p . (y - mean y)|.
double alpha_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

/// Cyclic coordinate descent with exact soft-threshold updates on the centred Gram matrix.
/// The trace records the objective after each full sweep. Throws DegenerateDesign on zero-variance columns.
Fit coordinate_descent(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double alpha, double tolerance,
                       std::size_t max_sweeps);

/// Objective value for a given solution (direct residual evaluation).
double objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double intercept, const Eigen::VectorXd& w,
                 double alpha);

class Model {
public:
  Model(std::size_t degree, double alpha, FeatureLayout layout, Standardizer scaler, std::vector<double> coefficients,
        ModelAxes axes);

  /// `x` is one row in the model's feature layout (factor vector for location_mean).
  [[nodiscard]] double predict_vector(std::span<const double> x) const;
  /// One epoch slab (locations x factors).
  [[nodiscard]] double predict(std::span<const double> slab) const;
  [[nodiscard]] std::vector<double> predict_all(const PathFeatureTensor& x) const;

  [[nodiscard]] std::size_t degree() const noexcept { return degree_; }
  [[nodiscard]] double alpha() const noexcept { return alpha_; }
  [[nodiscard]] FeatureLayout layout() const noexcept { return layout_; }
  [[nodiscard]] const Standardizer& scaler() const noexcept { return scaler_; }
  [[nodiscard]] const std::vector<double>& coefficients() const noexcept { return coefficients_; }
  [[nodiscard]] const ModelAxes& axes() const noexcept { return axes_; }
  void set_train_ranges(std::vector<std::string> r) { axes_.train_ranges = std::move(r); }
  [[nodiscard]] std::size_t nonzero_weights() const noexcept;

private:
  std::size_t degree_;
  double alpha_;
  FeatureLayout layout_;
  Standardizer scaler_;
  std::vector<double> coefficients_;
  ModelAxes axes_;
  PolyTermIndex index_;
};

/// Expands standardised rows into the polynomial design (constant column dropped).
Eigen::MatrixXd expand_design(const Eigen::MatrixXd& scaled, const PolyTermIndex& index);

struct TrainResult {
  Model model;
  TrainingTrace trace;
};

/// Standardise -> expand -> coordinate descent. Layout is forced to Flatten when there is one location.
TrainResult train(const TrainingData& data, const Config& cfg);

/// Lower-level entry used by tests and sweeps: rows already in feature layout.
TrainResult train_matrix(const Eigen::MatrixXd& rows, const Eigen::VectorXd& y, const Config& cfg, ModelAxes axes);

struct SweepPoint {
  double value;  // alpha or degree
  double rmse;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  std::size_t argmin = 0;
};

/// 1e-3 ... 1e2 in half-decade steps with 0.5 inserted.
std::vector<double> default_alpha_grid();

/// Trains on the leading (1 - validation_fraction) rows, scores RMSE on the trailing rows.
SweepResult sweep_alpha(const Eigen::MatrixXd& rows, const Eigen::VectorXd& y, std::size_t degree,
                        std::span<const double> alphas, double validation_fraction = 0.25, const Config& base = {});
SweepResult sweep_degree(const Eigen::MatrixXd& rows, const Eigen::VectorXd& y, double alpha,
                         std::span<const std::size_t> degrees, double validation_fraction = 0.25,
                         const Config& base = {});

}  // namespace eltd::lasso
