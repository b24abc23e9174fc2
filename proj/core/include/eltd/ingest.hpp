#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eltd/core_types.hpp"

namespace eltd {

// ---------------------------------------------------------------------------
// Station registry
// ---------------------------------------------------------------------------

struct Station {
  std::string id;
  GeoPoint location;
};

class StationRegistry {
public:
  /// Throws DuplicateStation on repeated ids and Empty when no entries are given.
  explicit StationRegistry(std::vector<Station> entries);

  [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
  [[nodiscard]] const Station& operator[](std::size_t i) const { return entries_.at(i); }
  [[nodiscard]] const std::vector<Station>& entries() const noexcept { return entries_; }
  [[nodiscard]] std::optional<std::size_t> find(std::string_view id) const noexcept;

private:
  std::vector<Station> entries_;
};

StationRegistry parse_station_registry(const std::filesystem::path& path);
StationRegistry parse_station_registry_text(std::string_view text);
std::string serialize_station_registry(const StationRegistry& reg);

// ---------------------------------------------------------------------------
// Weather
// ---------------------------------------------------------------------------

/// One station's observations at one hour; absent factors are std::nullopt.
using WeatherRecord = std::array<std::optional<double>, kFactorCount>;

class WeatherSeries {
public:
  WeatherSeries(std::size_t station_count, FactorSet columns);

  /// Stores a validated value; throws OutOfRange via validate_factor_value.
  void set(std::size_t station, EpochHour epoch, MetFactor f, double value);
  /// Marks the (station, epoch) record as present even if every value is blank.
  WeatherRecord& record(std::size_t station, EpochHour epoch);

  [[nodiscard]] std::optional<double> get(std::size_t station, EpochHour epoch, MetFactor f) const;
  [[nodiscard]] const WeatherRecord* find(std::size_t station, EpochHour epoch) const;
  [[nodiscard]] std::vector<EpochHour> epochs() const;
  [[nodiscard]] std::size_t station_count() const noexcept { return station_count_; }
  [[nodiscard]] const FactorSet& columns() const noexcept { return columns_; }
  [[nodiscard]] const std::map<EpochHour, std::vector<std::optional<WeatherRecord>>>& by_epoch() const noexcept {
    return by_epoch_;
  }

  friend bool operator==(const WeatherSeries&, const WeatherSeries&) = default;

private:
  std::size_t station_count_;
  FactorSet columns_;
  std::map<EpochHour, std::vector<std::optional<WeatherRecord>>> by_epoch_;
};

WeatherSeries parse_weather_csv(const std::filesystem::path& path, const StationRegistry& registry);
WeatherSeries parse_weather_text(std::string_view text, const StationRegistry& registry);
std::string serialize_weather(const WeatherSeries& weather, const StationRegistry& registry);

// ---------------------------------------------------------------------------
// Time difference logs
// ---------------------------------------------------------------------------

/// A TIC log entry. `samples` > 1 means the row is the mean of that many
/// consecutive 1 Hz readings starting at `time`.
struct TdSample {
  SysSeconds time;
  double td_ns;
  std::uint32_t samples = 1;

  friend bool operator==(const TdSample&, const TdSample&) = default;
};

class TdSeries1Hz {
public:
  TdSeries1Hz() = default;
  /// Throws ParseError unless timestamps are strictly increasing and values are valid TDs.
  explicit TdSeries1Hz(std::vector<TdSample> samples);

  [[nodiscard]] const std::vector<TdSample>& samples() const noexcept { return samples_; }
  [[nodiscard]] std::size_t size() const noexcept { return samples_.size(); }

  friend bool operator==(const TdSeries1Hz&, const TdSeries1Hz&) = default;

private:
  std::vector<TdSample> samples_;
};

TdSeries1Hz parse_td_csv(const std::filesystem::path& path);
TdSeries1Hz parse_td_text(std::string_view text);
std::string serialize_td(const TdSeries1Hz& td);

struct HourlyTd {
  EpochHour epoch;
  double mean_ns;
  std::size_t sample_count;

  friend bool operator==(const HourlyTd&, const HourlyTd&) = default;
};

inline constexpr std::size_t kDefaultMinSamplesPerHour = 1800;

/// Sorted by epoch; every entry has sample_count >= the threshold used to build it.
using HourlyTdSeries = std::vector<HourlyTd>;

/// Arithmetic mean per hour of the 1 Hz readings; hours below `min_samples` are dropped.
HourlyTdSeries aggregate_hourly(const TdSeries1Hz& td, std::size_t min_samples = kDefaultMinSamplesPerHour);

/// Same aggregation for samples in arbitrary order.
HourlyTdSeries aggregate_hourly_unsorted(std::vector<TdSample> samples, std::size_t min_samples);

std::string serialize_hourly(const HourlyTdSeries& hourly);
HourlyTdSeries parse_hourly_text(std::string_view text);

// ---------------------------------------------------------------------------
// Alignment
// ---------------------------------------------------------------------------

/// Epochs where TD exists and every requested factor is present at every requested station.
struct AlignedDataset {
  FactorSet factors;
  std::vector<std::size_t> stations;
  std::vector<EpochHour> epochs;
  std::vector<double> td_ns;
  /// epochs x stations x factors, row-major.
  std::vector<double> weather;

  [[nodiscard]] double value(std::size_t t, std::size_t s, std::size_t i) const {
    return weather[(t * stations.size() + s) * factors.size() + i];
  }
  [[nodiscard]] std::size_t size() const noexcept { return epochs.size(); }
};

/// Throws EmptyIntersection when no epoch survives.
AlignedDataset align_epochs(const WeatherSeries& weather, const HourlyTdSeries& td, const FactorSet& factors,
                            const std::vector<std::size_t>& stations);

// ---------------------------------------------------------------------------
// Elevation
// ---------------------------------------------------------------------------

/// ESRI ASCII raster. Row 0 is the northernmost row.
class ElevationGrid {
public:
  ElevationGrid(std::size_t ncols, std::size_t nrows, double xll, double yll, double cell_size,
                std::vector<std::optional<double>> values, double nodata_value = -9999.0);

  [[nodiscard]] std::size_t cols() const noexcept { return ncols_; }
  [[nodiscard]] std::size_t rows() const noexcept { return nrows_; }
  [[nodiscard]] double xll() const noexcept { return xll_; }
  [[nodiscard]] double yll() const noexcept { return yll_; }
  [[nodiscard]] double cell_size() const noexcept { return cell_; }
  [[nodiscard]] double nodata_value() const noexcept { return nodata_; }
  [[nodiscard]] GeoPoint origin() const { return GeoPoint(yll_, xll_); }
  [[nodiscard]] std::optional<double> at(std::size_t row, std::size_t col) const {
    return values_.at(row * ncols_ + col);
  }
  [[nodiscard]] const std::vector<std::optional<double>>& values() const noexcept { return values_; }

  /// Centre of a cell in geographic coordinates.
  [[nodiscard]] double center_lon(std::size_t col) const noexcept { return xll_ + (static_cast<double>(col) + 0.5) * cell_; }
  [[nodiscard]] double center_lat(std::size_t row) const noexcept {
    return yll_ + (static_cast<double>(nrows_ - row) - 0.5) * cell_;
  }

  friend bool operator==(const ElevationGrid&, const ElevationGrid&) = default;

private:
  std::size_t ncols_;
  std::size_t nrows_;
  double xll_;
  double yll_;
  double cell_;
  std::vector<std::optional<double>> values_;
  double nodata_;
};

ElevationGrid parse_dem(const std::filesystem::path& path);
ElevationGrid parse_dem_text(std::string_view text);
std::string serialize_dem(const ElevationGrid& dem);

}  // namespace eltd
