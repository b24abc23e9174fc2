#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eltd/core_types.hpp"
#include "eltd/ingest.hpp"

namespace eltd {

inline constexpr double kDefaultCellSizeDeg = 0.01;
inline constexpr double kDefaultPaddingDeg = 0.05;
inline constexpr std::size_t kDefaultPathPoints = 198;

struct CellIndex {
  std::size_t row;
  std::size_t col;
  friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

/// Regular lat/lon raster. Row 0 is the northern edge, column 0 the western edge.
class GridSpec {
public:
  GridSpec(double lat_min, double lat_max, double lon_min, double lon_max, double cell_size = kDefaultCellSizeDeg);

  /// Box spanning both endpoints, padded on every side.
  static GridSpec around(const GeoPoint& tx, const GeoPoint& rx, double cell_size = kDefaultCellSizeDeg,
                         double padding = kDefaultPaddingDeg);

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
  [[nodiscard]] std::size_t cell_count() const noexcept { return rows_ * cols_; }
  [[nodiscard]] double cell_size() const noexcept { return cell_; }
  [[nodiscard]] double lat_min() const noexcept { return lat_min_; }
  [[nodiscard]] double lat_max() const noexcept { return lat_max_; }
  [[nodiscard]] double lon_min() const noexcept { return lon_min_; }
  [[nodiscard]] double lon_max() const noexcept { return lon_max_; }

  [[nodiscard]] bool contains(const GeoPoint& p) const noexcept;
  [[nodiscard]] GeoPoint center(CellIndex c) const;
  [[nodiscard]] GeoPoint center(std::size_t flat) const { return center({flat / cols_, flat % cols_}); }
  [[nodiscard]] std::size_t flat(CellIndex c) const noexcept { return c.row * cols_ + c.col; }
  /// Cell whose centre is nearest in lat/lon; nullopt when outside the box.
  [[nodiscard]] std::optional<CellIndex> nearest_cell(const GeoPoint& p) const noexcept;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

private:
  double lat_min_, lat_max_, lon_min_, lon_max_, cell_;
  std::size_t rows_, cols_;
};

/// One factor at one epoch over a GridSpec.
struct GridMap {
  GridSpec spec;
  MetFactor factor;
  EpochHour epoch;
  std::vector<double> values;          // NaN where unassigned and not yet filled
  std::vector<std::uint8_t> assigned;  // 1 where a station value was placed

  [[nodiscard]] double at(CellIndex c) const { return values.at(spec.flat(c)); }
  [[nodiscard]] bool is_complete() const noexcept;
};

/// Places each reporting station's value at its nearest cell; collisions are averaged.
/// Throws NoObservations when no station inside the box reports the factor.
GridMap assign_observations(const GridSpec& spec, const StationRegistry& registry, const WeatherSeries& weather,
                            EpochHour epoch, MetFactor factor);

/// Shepard inverse-distance fill (weights 1/d, great-circle km between cell centres).
/// Assigned cells keep their value bit-for-bit.
GridMap idw_fill(GridMap partial);

/// Precomputed Shepard weights from a fixed set of assigned cells to a set of target cells.
/// Produces exactly the same arithmetic as idw_fill for those targets.
class IdwStencil {
public:
  IdwStencil(const GridSpec& spec, std::vector<std::size_t> assigned_cells, std::vector<std::size_t> target_cells);

  /// `assigned_values[k]` belongs to `assigned_cells()[k]`; writes one value per target.
  void apply(std::span<const double> assigned_values, std::span<double> out) const;

  [[nodiscard]] const std::vector<std::size_t>& assigned_cells() const noexcept { return assigned_; }
  [[nodiscard]] const std::vector<std::size_t>& target_cells() const noexcept { return targets_; }

private:
  std::vector<std::size_t> assigned_;
  std::vector<std::size_t> targets_;
  std::vector<std::ptrdiff_t> exact_;  // assigned index when target coincides, else -1
  std::vector<double> weights_;        // targets x assigned
};

/// CSV raster `lat,lon,value`, rows north-to-south then west-to-east.
std::string export_grid_csv(const GridMap& map);

// ---------------------------------------------------------------------------
// Propagation path
// ---------------------------------------------------------------------------

/// Evenly spaced great-circle points; first is TX, last is RX.
using PathPoints = std::vector<GeoPoint>;

/// Spherical linear interpolation at fractions k/(l-1). Throws DegeneratePath when tx == rx
/// and InvalidArgument when l < 2.
PathPoints sample_path(const GeoPoint& tx, const GeoPoint& rx, std::size_t l);

using ElevationProfile = std::vector<double>;

/// Bilinear interpolation between DEM cell centres, skipping NODATA neighbours with renormalised
/// weights. Throws OutOfExtent(j) or NoElevationData(j).
ElevationProfile elevation_profile(const ElevationGrid& dem, std::span<const GeoPoint> points);

// ---------------------------------------------------------------------------
// Feature tensors
// ---------------------------------------------------------------------------

enum class LocationMode { ReceiverOnly, Stations, Path };

std::string_view to_string(LocationMode m) noexcept;
LocationMode parse_location_mode(std::string_view s);

/// Locations whose weather feeds the models, in a fixed order.
struct LocationSet {
  LocationMode mode = LocationMode::Path;
  std::vector<GeoPoint> points;

  [[nodiscard]] std::size_t size() const noexcept { return points.size(); }
};

/// receiver_only -> [rx]; stations -> registry order; path -> sample_path(tx, rx, l).
LocationSet make_locations(LocationMode mode, const GeoPoint& tx, const GeoPoint& rx, std::size_t l,
                           const StationRegistry& registry);

/// epochs x locations x factors.
struct PathFeatureTensor {
  std::vector<EpochHour> epochs;
  LocationSet locations;
  FactorSet factors;
  std::vector<double> data;

  [[nodiscard]] std::size_t epoch_count() const noexcept { return epochs.size(); }
  [[nodiscard]] std::size_t location_count() const noexcept { return locations.size(); }
  [[nodiscard]] std::size_t factor_count() const noexcept { return factors.size(); }
  [[nodiscard]] double at(std::size_t t, std::size_t j, std::size_t i) const {
    return data[(t * location_count() + j) * factor_count() + i];
  }
  [[nodiscard]] double& at(std::size_t t, std::size_t j, std::size_t i) {
    return data[(t * location_count() + j) * factor_count() + i];
  }
  /// One epoch's slab (locations x factors).
  [[nodiscard]] std::span<const double> epoch_row(std::size_t t) const {
    const auto stride = location_count() * factor_count();
    return std::span<const double>(data).subspan(t * stride, stride);
  }
  /// Keeps only the listed epoch indices, in the given order.
  [[nodiscard]] PathFeatureTensor select(std::span<const std::size_t> epoch_indices) const;
};

using MapKey = std::pair<MetFactor, EpochHour>;

/// tensor[t][j][i] = value of the (factor i, epoch t) map at the cell nearest to point j.
/// Throws MissingMap when a required map is absent or incomplete.
PathFeatureTensor extract_path_features(const std::map<MapKey, GridMap>& maps, const std::vector<EpochHour>& epochs,
                                        const FactorSet& factors, const LocationSet& locations);

/// Streams assign + fill + extract per (factor, epoch) without materialising full maps.
/// Bit-identical to extract_path_features over idw_fill'ed maps.
PathFeatureTensor build_feature_tensor(const GridSpec& spec, const StationRegistry& registry,
                                       const WeatherSeries& weather, const std::vector<EpochHour>& epochs,
                                       const FactorSet& factors, const LocationSet& locations);

}  // namespace eltd
