#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "eltd/features.hpp"
#include "eltd/model_common.hpp"

namespace eltd {

/// One tanh hidden layer, linear scalar output. Rows of `x` are samples.
struct Mlp {
  Eigen::MatrixXd w1;  // hidden x inputs
  Eigen::VectorXd b1;
  Eigen::VectorXd w2;  // hidden
  double b2 = 0.0;

  [[nodiscard]] std::size_t inputs() const noexcept { return static_cast<std::size_t>(w1.cols()); }
  [[nodiscard]] std::size_t hidden() const noexcept { return static_cast<std::size_t>(w1.rows()); }
  [[nodiscard]] std::size_t parameter_count() const noexcept {
    return static_cast<std::size_t>(w1.size() + b1.size() + w2.size() + 1);
  }
  [[nodiscard]] Eigen::VectorXd forward(const Eigen::MatrixXd& x) const;
  [[nodiscard]] double forward_one(std::span<const double> x) const;

  /// Uniform(+-1/sqrt(fan_in)) weights and biases drawn from `rng` state seeded by `seed`.
  static Mlp random(std::size_t inputs, std::size_t hidden, std::uint64_t seed);
};

/// Full-batch Adam with bias correction over a flat parameter vector.
class Adam {
public:
  Adam(std::size_t size, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void step(std::span<double> theta, std::span<const double> grad);

private:
  double lr_, beta1_, beta2_, eps_;
  double b1_pow_ = 1.0, b2_pow_ = 1.0;
  std::vector<double> m_, v_;
};

// ---------------------------------------------------------------------------
// BPNN

namespace bpnn {

struct Config {
  std::size_t hidden = 16;
  double learning_rate = 0.001;
  std::size_t max_iterations = 3000;
  double tolerance = 1e-7;  // relative MSE change over 5 iterations
  std::uint64_t seed = 42;
  FeatureLayout layout = FeatureLayout::LocationMean;
};

class Model {
public:
  Model(Mlp net, Standardizer scaler, double y_mean, double y_sd, FeatureLayout layout, ModelAxes axes);

  [[nodiscard]] double predict_vector(std::span<const double> x) const;
  [[nodiscard]] double predict(std::span<const double> slab) const;
  [[nodiscard]] std::vector<double> predict_all(const PathFeatureTensor& x) const;

  [[nodiscard]] const Mlp& net() const noexcept { return net_; }
  [[nodiscard]] const Standardizer& scaler() const noexcept { return scaler_; }
  [[nodiscard]] double y_mean() const noexcept { return y_mean_; }
  [[nodiscard]] double y_sd() const noexcept { return y_sd_; }
  [[nodiscard]] FeatureLayout layout() const noexcept { return layout_; }
  [[nodiscard]] const ModelAxes& axes() const noexcept { return axes_; }
  void set_train_ranges(std::vector<std::string> r) { axes_.train_ranges = std::move(r); }

private:
  Mlp net_;
  Standardizer scaler_;
  double y_mean_, y_sd_;
  FeatureLayout layout_;
  ModelAxes axes_;
};

struct TrainResult {
  Model model;
  TrainingTrace trace;
};

/// Trace holds the train MSE (ns^2) before each update.
TrainResult train_matrix(const Eigen::MatrixXd& rows, std::span<const double> y, const Config& cfg, ModelAxes axes);
TrainResult train(const TrainingData& data, const Config& cfg);

}  // namespace bpnn

// ---------------------------------------------------------------------------
// GRNN

namespace grnn {

/// Isotropic Gaussian kernel regression, max-exponent stabilised. Columns of `bank` are samples.
/// Throws EmptyBank and DimensionMismatch.
double estimate(std::span<const double> query, const Eigen::MatrixXd& bank, std::span<const double> y, double sigma);

struct Config {
  double sigma = 0.0;  // <= 0 selects by leave-one-out grid search
  FeatureLayout layout = FeatureLayout::LocationMean;
  std::int64_t loo_exclusion_hours = kDefaultLooExclusionHours;  // temporal half-window of the leave-out rule
};

/// Log-spaced sigma candidates for a bank of dimension d.
std::vector<double> sigma_grid(std::size_t d);

/// Leave-out MSE for each candidate sigma (standardised bank); see mask_leave_out.
std::vector<double> loo_mse(const Eigen::MatrixXd& bank, std::span<const double> y, std::span<const double> sigmas,
                            std::span<const std::int64_t> hours = {}, std::int64_t exclusion_hours = 0);

class Model {
public:
  Model(Eigen::MatrixXd bank, std::vector<double> y, double sigma, Standardizer scaler, FeatureLayout layout,
        ModelAxes axes);

  [[nodiscard]] double predict_vector(std::span<const double> x) const;
  [[nodiscard]] double predict(std::span<const double> slab) const;
  [[nodiscard]] std::vector<double> predict_all(const PathFeatureTensor& x) const;

  [[nodiscard]] const Eigen::MatrixXd& bank() const noexcept { return bank_; }
  [[nodiscard]] const std::vector<double>& targets() const noexcept { return y_; }
  [[nodiscard]] double sigma() const noexcept { return sigma_; }
  [[nodiscard]] const Standardizer& scaler() const noexcept { return scaler_; }
  [[nodiscard]] FeatureLayout layout() const noexcept { return layout_; }
  [[nodiscard]] const ModelAxes& axes() const noexcept { return axes_; }
  void set_train_ranges(std::vector<std::string> r) { axes_.train_ranges = std::move(r); }
  [[nodiscard]] std::int64_t loo_exclusion_hours() const noexcept { return loo_exclusion_hours_; }
  void set_loo_exclusion_hours(std::int64_t h) noexcept { loo_exclusion_hours_ = h; }

private:
  Eigen::MatrixXd bank_;  // standardised inputs, one column per training epoch
  std::vector<double> y_;
  double sigma_;
  Standardizer scaler_;
  FeatureLayout layout_;
  ModelAxes axes_;
  std::int64_t loo_exclusion_hours_ = 0;
};

struct TrainResult {
  Model model;
  TrainingTrace trace;  // single entry: leave-one-out MSE at the chosen sigma
};

/// `hours` (one per row, may be empty) feeds the leave-out rule.
TrainResult train_matrix(const Eigen::MatrixXd& rows, std::span<const double> y, const Config& cfg, ModelAxes axes,
                         std::span<const std::int64_t> hours = {});
TrainResult train(const TrainingData& data, const Config& cfg);

}  // namespace grnn

// ---------------------------------------------------------------------------
// Mixture of experts

namespace moe {

struct Config {
  std::size_t experts = 4;
  std::size_t hidden = 8;
  double temperature = 1.0;
  double learning_rate = 0.001;
  std::size_t max_iterations = 3000;
  double tolerance = 1e-7;
  std::uint64_t seed = 42;
};

/// Expert k sees the per-factor mean over location group k (contiguous slices; every expert sees all
/// locations when there are fewer locations than experts). The gate sees all group means.
void group_inputs(std::span<const double> slab, std::size_t locations, std::size_t factors, std::size_t experts,
                  std::span<double> out);

class Model {
public:
  Model(std::vector<Mlp> experts, Eigen::MatrixXd gate_w, Eigen::VectorXd gate_b, double temperature,
        Standardizer scaler, double y_mean, double y_sd, ModelAxes axes);

  /// `z` is the concatenated group-mean vector (experts x factors), raw units.
  [[nodiscard]] double predict_vector(std::span<const double> z) const;
  [[nodiscard]] std::vector<double> gate_weights(std::span<const double> z) const;
  [[nodiscard]] std::vector<double> expert_outputs(std::span<const double> z) const;
  [[nodiscard]] double predict(std::span<const double> slab) const;
  [[nodiscard]] std::vector<double> predict_all(const PathFeatureTensor& x) const;

  [[nodiscard]] std::size_t expert_count() const noexcept { return experts_.size(); }
  [[nodiscard]] const std::vector<Mlp>& experts() const noexcept { return experts_; }
  [[nodiscard]] const Eigen::MatrixXd& gate_w() const noexcept { return gate_w_; }
  [[nodiscard]] const Eigen::VectorXd& gate_b() const noexcept { return gate_b_; }
  [[nodiscard]] double temperature() const noexcept { return temperature_; }
  [[nodiscard]] const Standardizer& scaler() const noexcept { return scaler_; }
  [[nodiscard]] double y_mean() const noexcept { return y_mean_; }
  [[nodiscard]] double y_sd() const noexcept { return y_sd_; }
  [[nodiscard]] const ModelAxes& axes() const noexcept { return axes_; }
  void set_train_ranges(std::vector<std::string> r) { axes_.train_ranges = std::move(r); }

private:
  [[nodiscard]] Eigen::VectorXd standardize(std::span<const double> z) const;

  std::vector<Mlp> experts_;
  Eigen::MatrixXd gate_w_;  // experts x (experts * factors)
  Eigen::VectorXd gate_b_;
  double temperature_;
  Standardizer scaler_;
  double y_mean_, y_sd_;
  ModelAxes axes_;
};

struct TrainResult {
  Model model;
  TrainingTrace trace;
};

/// `rows` are concatenated group means (experts x factors wide).
TrainResult train_matrix(const Eigen::MatrixXd& rows, std::span<const double> y, const Config& cfg, ModelAxes axes);
TrainResult train(const TrainingData& data, const Config& cfg);

}  // namespace moe

}  // namespace eltd
