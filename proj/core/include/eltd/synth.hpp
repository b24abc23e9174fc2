#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eltd/core_types.hpp"
#include "eltd/gridmap.hpp"
#include "eltd/ingest.hpp"

namespace eltd::synth {

/// Synthetic transmitter and receiver; their haversine separation is 179.28 km within 1 km.
inline const GeoPoint kTx{36.193, 129.338};
inline const GeoPoint kRx{36.36, 127.3488};

/// coef * z_a * z_b * z_c over path-weighted factor means.
struct Interaction {
  MetFactor a, b, c;
  double coef;
};

/// TD(t) = bias + sum_i a_i m_i(t) + sum coef m_a m_b m_c, where m_i is the omega-weighted path mean of
/// z_i = (x_i - center_i) / scale_i and omega_j = 1 + gain * (htilde_j - 1).
struct Recipe {
  std::string name;
  double bias_ns = 0.0;
  std::vector<std::pair<MetFactor, double>> linear;
  std::vector<Interaction> interactions;
  double elevation_gain = 0.0;

  /// Every factor the recipe reads, canonical order.
  [[nodiscard]] FactorSet factors() const;
};

Recipe linear_elevation_recipe();
Recipe cubic_recipe();
Recipe zero_recipe();
/// "linear_elevation", "cubic" or "zero". Throws ConfigError.
Recipe recipe_by_name(std::string_view name);

/// Fixed normalisation constants shared by the generator and the recipe.
double factor_center(MetFactor f) noexcept;
double factor_scale(MetFactor f) noexcept;

struct ScenarioConfig {
  std::uint64_t seed = 42;
  EpochHour start = EpochHour::exact(parse_utc("2023-10-01T00:00:00Z"));
  std::size_t duration_hours = 121 * 24;
  std::size_t station_count = 10;
  GeoPoint tx = kTx;
  GeoPoint rx = kRx;
  std::size_t path_points = kDefaultPathPoints;
  Recipe recipe = linear_elevation_recipe();
  double noise_sd_ns = 10.0;
  double jitter_sd_ns = 20.0;   // per 1 Hz reading
  std::size_t block_seconds = 60;  // readings averaged per td.csv row
  double dropout_rate = 0.01;   // hours with too few readings to aggregate
  double blank_rate = 0.002;    // weather cells left blank
  double correlation_km = 50.0;
  double dem_cell_deg = 0.005;
  double grid_cell_deg = kDefaultCellSizeDeg;
  double grid_padding_deg = kDefaultPaddingDeg;
};

struct SyntheticScenario {
  ScenarioConfig config;
  StationRegistry registry;
  WeatherSeries weather;
  TdSeries1Hz td;
  ElevationGrid dem;
  std::vector<EpochHour> epochs;  // every generated hour
  std::vector<double> truth_ns;   // noise-free TD per epoch
  ElevationProfile profile;       // path elevations (m)
};

/// Deterministic per seed.
SyntheticScenario generate_scenario(const ScenarioConfig& cfg);

/// Noise-free TD at an epoch. Throws OutOfRange outside the scenario.
double ground_truth_td(const SyntheticScenario& s, EpochHour epoch);

/// omega_j for a path profile under the floored-normalised elevation transform.
std::vector<double> recipe_weights(std::span<const double> profile, double gain);

/// Direct recipe evaluation on one epoch slab (locations x recipe factors, canonical order).
double evaluate_recipe(const Recipe& r, std::span<const double> slab, std::span<const double> omega);

/// stations.csv, weather.csv, td.csv, dem.asc and scenario.meta.
void write_corpus(const SyntheticScenario& s, const std::filesystem::path& dir);
std::string scenario_meta_json(const SyntheticScenario& s);

// ---------------------------------------------------------------------------
// Independent oracles (slow by design)

/// Normal equations solved by a hand-rolled Cholesky. Throws RankDeficient when X'X is not
/// numerically positive definite.
std::vector<double> ols_oracle(const Eigen::MatrixXd& x, std::span<const double> y);

/// Unstabilised anisotropic kernel regression by nested loops. `bank` is l x T.
double kernel_oracle(std::span<const double> query, const Eigen::MatrixXd& bank, std::span<const double> y,
                     std::span<const double> sigmas);

}  // namespace eltd::synth
