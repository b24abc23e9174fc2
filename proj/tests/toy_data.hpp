#pragma once

#include <cstdint>
#include <functional>
#include <random>

#include "eltd/dataset.hpp"
#include "eltd/gridmap.hpp"

namespace eltd_test {

/// T epochs `step_hours` apart, l locations on a short meridian segment, the first n canonical factors.
/// Inputs are standard normal around each factor's midrange; y = f(tensor, t) + N(0, noise_sd).
inline eltd::TrainingData toy_data(std::size_t T, std::size_t l, std::size_t n, std::uint64_t seed,
                                   const std::function<double(const eltd::PathFeatureTensor&, std::size_t)>& f,
                                   double noise_sd = 0.0, std::int64_t step_hours = 1) {
  using namespace eltd;
  std::vector<MetFactor> fs(all_factors().begin(), all_factors().begin() + static_cast<std::ptrdiff_t>(n));
  PathFeatureTensor x;
  x.factors = FactorSet(fs);
  x.locations.mode = l == 1 ? LocationMode::ReceiverOnly : LocationMode::Path;
  for (std::size_t j = 0; j < l; ++j) x.locations.points.emplace_back(36.0 + 0.01 * static_cast<double>(j), 127.0);
  const auto start = EpochHour::exact(parse_utc("2023-10-01"));
  for (std::size_t t = 0; t < T; ++t) {
    x.epochs.emplace_back(start.time() + std::chrono::hours(step_hours * static_cast<std::int64_t>(t)));
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  x.data.resize(T * l * n);
  for (auto& v : x.data) v = g(rng);
  TrainingData d{x, {}};
  for (std::size_t t = 0; t < T; ++t) d.y.push_back(f(d.x, t) + noise_sd * g(rng));
  return d;
}

}  // namespace eltd_test
