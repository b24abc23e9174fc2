#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eltd/core_types.hpp"
#include "eltd/dataset.hpp"
#include "eltd/gridmap.hpp"

namespace eltd {

/// Per-iteration training loss. Non-iterative models record a single entry.
struct TrainingTrace {
  std::vector<double> loss;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Axis metadata every artifact carries so predictions can refuse incompatible corpora.
struct ModelAxes {
  FactorSet factors;
  LocationMode location_mode = LocationMode::Path;
  std::size_t locations = 0;
  std::vector<std::string> train_ranges;

  friend bool operator==(const ModelAxes&, const ModelAxes&) = default;
};

/// Axes of a tensor; ranges are left for the caller to fill.
inline ModelAxes axes_of(const PathFeatureTensor& x) {
  return {x.factors, x.locations.mode, x.location_count(), {}};
}

/// Throws AxisMismatch when a query tensor does not match a model's training axes.
void check_axes(const ModelAxes& model, const PathFeatureTensor& query);

/// Hourly targets are strongly autocorrelated, so the kernel models' training-time estimate of
/// epoch t also leaves out every epoch within this many hours of t.
inline constexpr std::int64_t kDefaultLooExclusionHours = 24;

/// Leave-out mask for kernel estimates on an epoch-by-epoch distance matrix: d(s, t) = +inf when
/// s == t or |hours[s] - hours[t]| <= window. A target with no column outside the window keeps
/// plain leave-one-out. Empty hours or window 0 masks only the diagonal. Throws LengthMismatch.
void mask_leave_out(Eigen::MatrixXd& d, std::span<const std::int64_t> hours, std::int64_t window);

}  // namespace eltd
