#include "eltd/dataset.hpp"

#include <algorithm>
#include <string>

namespace eltd {

TrainingData TrainingData::select(std::span<const std::size_t> indices) const {
  TrainingData out{x.select(indices), {}};
  out.y.reserve(indices.size());
  for (auto i : indices) out.y.push_back(y.at(i));
  return out;
}

TrainingData join_target(const PathFeatureTensor& x, const HourlyTdSeries& td) {
  if (!std::is_sorted(x.epochs.begin(), x.epochs.end())) {
    throw Error(ErrorCode::InvalidArgument, "feature tensor epochs must be sorted");
  }
  std::vector<std::size_t> keep;
  std::vector<double> y;
  std::size_t k = 0;
  for (std::size_t t = 0; t < x.epochs.size(); ++t) {
    while (k < td.size() && td[k].epoch < x.epochs[t]) ++k;
    if (k < td.size() && td[k].epoch == x.epochs[t]) {
      keep.push_back(t);
      y.push_back(td[k].mean_ns);
    }
  }
  return {x.select(keep), std::move(y)};
}

std::vector<std::size_t> indices_in_ranges(std::span<const EpochHour> epochs, std::span<const EpochRange> ranges) {
  std::vector<std::size_t> out;
  for (std::size_t t = 0; t < epochs.size(); ++t) {
    if (std::any_of(ranges.begin(), ranges.end(), [&](const EpochRange& r) { return r.contains(epochs[t]); })) {
      out.push_back(t);
    }
  }
  return out;
}

std::string_view to_string(FeatureLayout layout) noexcept {
  return layout == FeatureLayout::Flatten ? "flatten" : "location_mean";
}

FeatureLayout parse_feature_layout(std::string_view s) {
  if (s == "flatten") return FeatureLayout::Flatten;
  if (s == "location_mean") return FeatureLayout::LocationMean;
  throw Error(ErrorCode::ConfigError, "unknown feature layout '" + std::string(s) + "'");
}

std::size_t feature_width(FeatureLayout layout, std::size_t locations, std::size_t factors) noexcept {
  return layout == FeatureLayout::Flatten ? locations * factors : factors;
}

void layout_row(std::span<const double> slab, std::size_t locations, std::size_t factors, FeatureLayout layout,
                std::span<double> out) {
  if (slab.size() != locations * factors || out.size() != feature_width(layout, locations, factors)) {
    throw Error(ErrorCode::DimensionMismatch, "feature row has the wrong shape");
  }
  if (layout == FeatureLayout::Flatten) {
    std::copy(slab.begin(), slab.end(), out.begin());
    return;
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t j = 0; j < locations; ++j) {
    for (std::size_t i = 0; i < factors; ++i) out[i] += slab[j * factors + i];
  }
  for (auto& v : out) v /= static_cast<double>(locations);
}

Eigen::MatrixXd design_matrix(const PathFeatureTensor& x, FeatureLayout layout) {
  const auto l = x.location_count(), n = x.factor_count();
  const auto width = feature_width(layout, l, n);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(x.epoch_count()), static_cast<Eigen::Index>(width));
  std::vector<double> row(width);
  for (std::size_t t = 0; t < x.epoch_count(); ++t) {
    layout_row(x.epoch_row(t), l, n, layout, row);
    for (std::size_t c = 0; c < width; ++c) m(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c)) = row[c];
  }
  return m;
}

std::vector<std::vector<std::size_t>> weekly_folds(std::span<const EpochHour> epochs) {
  std::vector<std::vector<std::size_t>> folds;
  if (epochs.empty()) return folds;
  const auto start = epochs.front().hours_since_epoch();
  for (std::size_t t = 0; t < epochs.size(); ++t) {
    const auto week = static_cast<std::size_t>((epochs[t].hours_since_epoch() - start) / (24 * 7));
    if (folds.size() <= week) folds.resize(week + 1);
    folds[week].push_back(t);
  }
  std::erase_if(folds, [](const auto& f) { return f.empty(); });
  return folds;
}

}  // namespace eltd
