#pragma once

#include <array>
#include <chrono>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eltd/error.hpp"

namespace eltd {

inline constexpr double kEarthRadiusKm = 6371.0088;

// ---------------------------------------------------------------------------
// Geodesy
// ---------------------------------------------------------------------------

/// WGS-84 latitude/longitude in degrees. Construction validates bounds.
class GeoPoint {
public:
  GeoPoint(double lat_deg, double lon_deg);

  [[nodiscard]] double lat() const noexcept { return lat_; }
  [[nodiscard]] double lon() const noexcept { return lon_; }

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;

private:
  double lat_;
  double lon_;
};

/// Great-circle distance on a sphere of radius kEarthRadiusKm.
[[nodiscard]] double haversine_km(const GeoPoint& a, const GeoPoint& b) noexcept;

// ---------------------------------------------------------------------------
// Time
// ---------------------------------------------------------------------------

using SysSeconds = std::chrono::sys_seconds;
using SysHours = std::chrono::sys_time<std::chrono::hours>;

/// A UTC instant truncated to the whole hour.
class EpochHour {
public:
  constexpr EpochHour() = default;
  constexpr explicit EpochHour(SysHours t) : t_(t) {}

  /// Truncates toward the start of the containing hour.
  static EpochHour containing(SysSeconds s) noexcept;
  /// Throws InvalidArgument when minutes/seconds are non-zero.
  static EpochHour exact(SysSeconds s);

  [[nodiscard]] constexpr SysHours time() const noexcept { return t_; }
  [[nodiscard]] constexpr std::int64_t hours_since_epoch() const noexcept {
    return t_.time_since_epoch().count();
  }
  [[nodiscard]] SysSeconds seconds() const noexcept { return std::chrono::time_point_cast<std::chrono::seconds>(t_); }

  friend constexpr auto operator<=>(const EpochHour&, const EpochHour&) = default;

private:
  SysHours t_{};
};

/// Parses `YYYY-MM-DDTHH:MM:SS` with optional trailing `Z`, or `YYYY-MM-DD` (midnight).
SysSeconds parse_utc(std::string_view text);
/// Formats as `YYYY-MM-DDTHH:MM:SSZ`.
std::string format_utc(SysSeconds t);
inline std::string format_utc(EpochHour e) { return format_utc(e.seconds()); }

/// Inclusive range of epoch hours.
struct EpochRange {
  EpochHour first;
  EpochHour last;

  [[nodiscard]] bool contains(EpochHour e) const noexcept { return first <= e && e <= last; }
  [[nodiscard]] bool overlaps(const EpochRange& o) const noexcept { return first <= o.last && o.first <= last; }
};

/// Parses `start..end`; either bound may be a date or full timestamp. A bare end
/// date covers the whole day.
EpochRange parse_epoch_range(std::string_view text);

// ---------------------------------------------------------------------------
// Meteorological factors
// ---------------------------------------------------------------------------

enum class MetFactor : std::uint8_t {
  PressureHpa,
  CloudCover,
  HumidityPct,
  PrecipitationMm,
  SnowDepthCm,
  SunshineHr,
  TemperatureC,
  VaporPressureHpa,
  VisibilityM,
  WindDirDeg,
  WindSpeedMs,
};

inline constexpr std::size_t kFactorCount = 11;

struct FactorInfo {
  MetFactor factor;
  std::string_view name;   // column name used in CSV files
  std::string_view unit;
  double min;
  double max;
  bool integer;
};

[[nodiscard]] const FactorInfo& info(MetFactor f) noexcept;
[[nodiscard]] const std::array<MetFactor, kFactorCount>& all_factors() noexcept;
[[nodiscard]] std::string_view to_string(MetFactor f) noexcept;
[[nodiscard]] std::optional<MetFactor> parse_factor(std::string_view name) noexcept;
[[nodiscard]] constexpr std::size_t index_of(MetFactor f) noexcept { return static_cast<std::size_t>(f); }

/// Returns `v` when it lies in the physical validity range of `f`; throws OutOfRange otherwise.
double validate_factor_value(MetFactor f, double v);

/// Ordered, duplicate-free subset of MetFactor in declaration order.
class FactorSet {
public:
  FactorSet() = default;
  /// Sorts into canonical order; throws InvalidArgument on duplicates.
  explicit FactorSet(std::vector<MetFactor> factors);

  static FactorSet all();
  /// Parses a comma-separated list of factor names.
  static FactorSet parse(std::string_view csv);

  [[nodiscard]] std::size_t size() const noexcept { return factors_.size(); }
  [[nodiscard]] bool empty() const noexcept { return factors_.empty(); }
  [[nodiscard]] bool contains(MetFactor f) const noexcept;
  [[nodiscard]] std::span<const MetFactor> factors() const noexcept { return factors_; }
  [[nodiscard]] MetFactor operator[](std::size_t i) const { return factors_.at(i); }
  [[nodiscard]] auto begin() const noexcept { return factors_.begin(); }
  [[nodiscard]] auto end() const noexcept { return factors_.end(); }
  [[nodiscard]] std::string to_string() const;

  friend bool operator==(const FactorSet&, const FactorSet&) = default;

private:
  std::vector<MetFactor> factors_;
};

/// Named factor combinations used in comparisons (3, 5 and 7 factors).
FactorSet preset_factor_set(std::string_view name);

// ---------------------------------------------------------------------------
// Time difference
// ---------------------------------------------------------------------------

/// eLoran-minus-GPS PPS offset in nanoseconds.
class TdNanoseconds {
public:
  constexpr TdNanoseconds() = default;
  explicit TdNanoseconds(double ns);

  [[nodiscard]] constexpr double value() const noexcept { return ns_; }

  friend constexpr auto operator<=>(const TdNanoseconds&, const TdNanoseconds&) = default;

private:
  double ns_ = 0.0;
};

// ---------------------------------------------------------------------------
// Number formatting
// ---------------------------------------------------------------------------

/// Shortest round-trip decimal representation; deterministic across runs.
std::string format_double(double v);
/// Strict full-string parse; throws ParseError.
double parse_double(std::string_view text);

}  // namespace eltd
