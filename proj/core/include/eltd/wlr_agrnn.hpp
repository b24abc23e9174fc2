#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "eltd/features.hpp"
#include "eltd/model_common.hpp"

namespace eltd::wlr_agrnn {

/// Two purely affine layers shared by every location:
/// h = W1 x + b1, xhat = W2 h + b2.
struct WlrParams {
  Eigen::MatrixXd w1;     // hidden x n
  Eigen::VectorXd b1;     // hidden
  Eigen::RowVectorXd w2;  // 1 x hidden
  double b2 = 0.0;

  [[nodiscard]] std::size_t hidden() const noexcept { return static_cast<std::size_t>(w1.rows()); }
  [[nodiscard]] std::size_t inputs() const noexcept { return static_cast<std::size_t>(w1.cols()); }
  [[nodiscard]] std::size_t parameter_count() const noexcept { return static_cast<std::size_t>(w1.size() + b1.size() + w2.size() + 1); }

  /// Flat view in the order w1 (row-major), b1, w2, b2.
  [[nodiscard]] std::vector<double> flatten() const;
  void assign(std::span<const double> flat);

  static WlrParams zeros(std::size_t hidden, std::size_t inputs);
  /// Uniform(+-1/sqrt(fan_in)) weights, zero biases.
  static WlrParams random(std::size_t hidden, std::size_t inputs, std::uint64_t seed);
};

/// Scalar expert output for one location. Throws DimensionMismatch.
double wlr_forward(const WlrParams& params, std::span<const double> x);

enum class ElevationTransform { Raw, FlooredNormalized };

std::string_view to_string(ElevationTransform t) noexcept;
ElevationTransform parse_elevation_transform(std::string_view s);

struct ElevationWeighting {
  ElevationTransform kind = ElevationTransform::FlooredNormalized;
  double floor_m = 1.0;
};

/// raw: h; floored_normalized: max(h, floor) / mean(max(h, floor)).
std::vector<double> transform_elevation(std::span<const double> profile, const ElevationWeighting& w);

/// Elementwise xhat_j * transform(h)_j. Throws LengthMismatch.
std::vector<double> elevation_weight(std::span<const double> xhat, std::span<const double> profile,
                                     const ElevationWeighting& w);

/// Row-major l x T bank of weighted expert outputs (one column per training epoch).
using Bank = Eigen::MatrixXd;

struct KernelEstimate {
  double value;
  bool fallback_nearest;  // every kernel weight underflowed; value is the nearest column's target
};

/// Anisotropic Gaussian kernel regression over the bank, max-exponent stabilised.
/// Throws EmptyBank and DimensionMismatch.
KernelEstimate agrnn_predict(std::span<const double> query, const Bank& bank, std::span<const double> y,
                             std::span<const double> sigmas);

struct SigmaSelection {
  std::vector<double> sigmas;
  std::vector<double> row_sd;  // floored per-row sample sd
  double scale;                // c in sigma_j = c * sd_j
  double loo_wrss;
  std::size_t degenerate_rows;
};

/// Leave-out rule for training-time kernel estimates. Column s is excluded from the estimate of
/// column t when |hours[t] - hours[s]| <= window; with no hours only s == t is excluded.
struct LooExclusion {
  std::span<const std::int64_t> hours{};
  std::int64_t window = 0;
};

inline constexpr double kSigmaScaleMin = 0.1;
inline constexpr double kSigmaScaleMax = 3.0;

/// Per-row sample sd of the bank, floored at 1e-6 |mean| + 1e-12 for constant rows.
std::vector<double> bank_row_sd(const Bank& bank, std::size_t* degenerate_rows = nullptr);

/// Leave-one-out WRSS of the kernel estimate with sigma_j = scale * row_sd_j.
double loo_wrss(const Bank& bank, std::span<const double> y, std::span<const double> weights,
                std::span<const double> row_sd, double scale, const LooExclusion& exclusion = {});

/// sigma_j = c * sd_j with c chosen by golden-section search on [c_min, c_max] minimising LOO WRSS.
/// Throws DegenerateBank when the bank has fewer than 2 columns.
SigmaSelection select_sigmas(const Bank& bank, std::span<const double> y, std::span<const double> weights,
                             double c_min = kSigmaScaleMin, double c_max = kSigmaScaleMax,
                             const LooExclusion& exclusion = {});

enum class WeightScheme { Uniform, InverseResidual };

std::string_view to_string(WeightScheme s) noexcept;
WeightScheme parse_weight_scheme(std::string_view s);

struct TrainConfig {
  double learning_rate = 0.001;
  std::size_t max_iterations = 500;
  double tolerance = 1e-6;  // relative WRSS change over the last 5 iterations
  std::size_t hidden = 8;
  ElevationWeighting elevation{};
  WeightScheme weights = WeightScheme::Uniform;
  double weight_epsilon_ns = 1.0;
  std::size_t weight_refresh = 50;
  std::uint64_t seed = 42;
  /// Temporal half-window (hours) of the leave-out rule; 0 is plain leave-one-out.
  std::int64_t loo_exclusion_hours = kDefaultLooExclusionHours;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
};

/// Standardised inputs for one training run: T epochs x l locations x n factors.
struct Problem {
  std::vector<Eigen::MatrixXd> x;  // one (l x n) matrix per epoch
  std::vector<double> h_weight;    // transformed elevation weights, length l
  std::vector<double> y;
  std::vector<double> w;           // WRSS weights
  std::vector<std::int64_t> hours; // epoch hours for the leave-out rule (may be empty)
  std::int64_t exclusion_hours = 0;

  [[nodiscard]] LooExclusion exclusion() const noexcept { return {hours, exclusion_hours}; }

  [[nodiscard]] std::size_t epochs() const noexcept { return y.size(); }
  [[nodiscard]] std::size_t locations() const noexcept { return h_weight.size(); }
};

/// Bank U (l x T) produced by the WLR expert and elevation weighting.
Bank build_bank(const WlrParams& params, const Problem& problem);

struct Objective {
  double wrss;
  std::vector<double> yhat;
  WlrParams gradient;
};

/// Leave-one-out WRSS for fixed sigmas and its analytic gradient with respect to every WLR parameter.
Objective wrss_and_gradient(const WlrParams& params, const Problem& problem, std::span<const double> sigmas);

class Model {
public:
  Model(WlrParams params, ElevationWeighting elevation, std::vector<double> h_weight, std::vector<double> sigmas,
        Bank bank, std::vector<double> y, WeightScheme weights, std::vector<double> epoch_weights, Standardizer scaler,
        ModelAxes axes);

  /// One epoch slab (locations x factors) in raw units.
  [[nodiscard]] KernelEstimate predict_detail(std::span<const double> slab) const;
  [[nodiscard]] double predict(std::span<const double> slab) const { return predict_detail(slab).value; }
  [[nodiscard]] std::vector<double> predict_all(const PathFeatureTensor& x) const;
  /// Weighted expert outputs for one slab.
  [[nodiscard]] std::vector<double> query_vector(std::span<const double> slab) const;

  [[nodiscard]] const WlrParams& params() const noexcept { return params_; }
  [[nodiscard]] const ElevationWeighting& elevation() const noexcept { return elevation_; }
  [[nodiscard]] const std::vector<double>& h_weight() const noexcept { return h_weight_; }
  [[nodiscard]] const std::vector<double>& sigmas() const noexcept { return sigmas_; }
  [[nodiscard]] const Bank& bank() const noexcept { return bank_; }
  [[nodiscard]] const std::vector<double>& targets() const noexcept { return y_; }
  [[nodiscard]] WeightScheme weight_scheme() const noexcept { return weights_; }
  [[nodiscard]] const std::vector<double>& epoch_weights() const noexcept { return epoch_weights_; }
  [[nodiscard]] const Standardizer& scaler() const noexcept { return scaler_; }
  [[nodiscard]] const ModelAxes& axes() const noexcept { return axes_; }
  void set_train_ranges(std::vector<std::string> r) { axes_.train_ranges = std::move(r); }
  /// Leave-out half-window used for the training-time estimates (recorded, not used by predict).
  [[nodiscard]] std::int64_t loo_exclusion_hours() const noexcept { return loo_exclusion_hours_; }
  void set_loo_exclusion_hours(std::int64_t h) noexcept { loo_exclusion_hours_ = h; }

private:
  WlrParams params_;
  ElevationWeighting elevation_;
  std::vector<double> h_weight_;
  std::vector<double> sigmas_;
  Bank bank_;
  std::vector<double> y_;
  WeightScheme weights_;
  std::vector<double> epoch_weights_;
  Standardizer scaler_;
  ModelAxes axes_;
  std::int64_t loo_exclusion_hours_ = 0;
};

struct TrainResult {
  Model model;
  TrainingTrace trace;
};

/// Per-factor standardisation pooled across locations and epochs.
Standardizer fit_factor_scaler(const PathFeatureTensor& x);

Problem make_problem(const TrainingData& data, std::span<const double> profile, const ElevationWeighting& elevation,
                     const Standardizer& scaler);

/// Full-batch Adam on leave-one-out WRSS with sigmas re-selected every iteration (held fixed for the gradient).
/// Throws NonFiniteLoss, DegenerateBank, LengthMismatch.
TrainResult train(const TrainingData& data, std::span<const double> profile, const TrainConfig& cfg);

}  // namespace eltd::wlr_agrnn
