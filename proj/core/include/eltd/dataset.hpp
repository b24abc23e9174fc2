#pragma once

#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "eltd/gridmap.hpp"

namespace eltd {

/// Feature tensor paired with the hourly TD target for the same epochs.
struct TrainingData {
  PathFeatureTensor x;
  std::vector<double> y;

  [[nodiscard]] std::size_t size() const noexcept { return y.size(); }
  /// Rows whose epochs fall in any of the given ranges, in epoch order.
  [[nodiscard]] TrainingData select(std::span<const std::size_t> indices) const;
};

/// Pairs a tensor with an hourly series; epochs without TD are dropped.
TrainingData join_target(const PathFeatureTensor& x, const HourlyTdSeries& td);

/// Indices of epochs that fall in any of the ranges.
std::vector<std::size_t> indices_in_ranges(std::span<const EpochHour> epochs, std::span<const EpochRange> ranges);

/// How a flat-vector model sees one epoch of the tensor.
enum class FeatureLayout {
  Flatten,       // all locations x factors, location-major
  LocationMean,  // per-factor mean over locations
};

std::string_view to_string(FeatureLayout layout) noexcept;
FeatureLayout parse_feature_layout(std::string_view s);

[[nodiscard]] std::size_t feature_width(FeatureLayout layout, std::size_t locations, std::size_t factors) noexcept;

/// Writes one epoch's features (locations x factors slab) in the requested layout.
void layout_row(std::span<const double> slab, std::size_t locations, std::size_t factors, FeatureLayout layout,
                std::span<double> out);

/// T x width design matrix.
Eigen::MatrixXd design_matrix(const PathFeatureTensor& x, FeatureLayout layout);

/// Contiguous 7-day folds over the given epochs; returns index lists, each non-empty.
std::vector<std::vector<std::size_t>> weekly_folds(std::span<const EpochHour> epochs);

}  // namespace eltd
