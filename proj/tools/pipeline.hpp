#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "config.hpp"
#include "eltd/dataset.hpp"
#include "eltd/gridmap.hpp"
#include "eltd/ingest.hpp"

namespace eltd::cli {

struct Corpus {
  std::filesystem::path dir;
  StationRegistry registry;
  WeatherSeries weather;
  TdSeries1Hz td;
  ElevationGrid dem;
  GeoPoint tx;
  GeoPoint rx;
};

/// Reads stations.csv, weather.csv, td.csv and dem.asc. Endpoints come from the config, else from
/// scenario.meta. Throws ConfigError when no corpus is configured or no endpoints are known.
Corpus load_corpus(const RunConfig& cfg);

/// Which tensor to build.
struct FeatureAxes {
  FactorSet factors;
  LocationMode mode = LocationMode::Path;
  std::size_t locations = kDefaultPathPoints;
};

FeatureAxes config_axes(const RunConfig& cfg);

struct Prepared {
  GridSpec spec;
  LocationSet locations;
  ElevationProfile profile;
  HourlyTdSeries hourly;
  TrainingData data;  // every aligned epoch
};

Prepared prepare(const Corpus& corpus, const RunConfig& cfg, const FeatureAxes& axes);

/// Rows of `data` whose epochs fall in `ranges`.
TrainingData select_ranges(const TrainingData& data, const std::vector<EpochRange>& ranges);

/// Epochs in `ranges` where every factor is present at every station (TD not needed).
std::vector<EpochHour> complete_weather_epochs(const WeatherSeries& weather, const FactorSet& factors,
                                               const std::vector<EpochRange>& ranges);

}  // namespace eltd::cli
