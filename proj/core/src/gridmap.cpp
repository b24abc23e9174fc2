#include "eltd/gridmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace eltd {

// ---------------------------------------------------------------------------
// GridSpec
// ---------------------------------------------------------------------------

GridSpec::GridSpec(double lat_min, double lat_max, double lon_min, double lon_max, double cell_size)
    : lat_min_(lat_min), lat_max_(lat_max), lon_min_(lon_min), lon_max_(lon_max), cell_(cell_size) {
  if (!(cell_size > 0.0) || !std::isfinite(cell_size)) {
    throw Error(ErrorCode::InvalidArgument, "grid cell size must be > 0");
  }
  if (!(lat_max > lat_min) || !(lon_max > lon_min)) {
    throw Error(ErrorCode::InvalidArgument, "grid bounding box is empty");
  }
  (void)GeoPoint(lat_min, lon_min);
  (void)GeoPoint(lat_max, lon_max);
  rows_ = static_cast<std::size_t>(std::max(1.0, std::ceil((lat_max - lat_min) / cell_size - 1e-9)));
  cols_ = static_cast<std::size_t>(std::max(1.0, std::ceil((lon_max - lon_min) / cell_size - 1e-9)));
  lat_min_ = lat_max_ - static_cast<double>(rows_) * cell_;
  lon_max_ = lon_min_ + static_cast<double>(cols_) * cell_;
}

GridSpec GridSpec::around(const GeoPoint& tx, const GeoPoint& rx, double cell_size, double padding) {
  if (padding < 0.0) throw Error(ErrorCode::InvalidArgument, "grid padding must be >= 0");
  return GridSpec(std::max(-90.0, std::min(tx.lat(), rx.lat()) - padding),
                  std::min(90.0, std::max(tx.lat(), rx.lat()) + padding),
                  std::max(-180.0, std::min(tx.lon(), rx.lon()) - padding),
                  std::min(180.0, std::max(tx.lon(), rx.lon()) + padding), cell_size);
}

bool GridSpec::contains(const GeoPoint& p) const noexcept {
  return p.lat() >= lat_min_ && p.lat() <= lat_max_ && p.lon() >= lon_min_ && p.lon() <= lon_max_;
}

GeoPoint GridSpec::center(CellIndex c) const {
  return GeoPoint(lat_max_ - (static_cast<double>(c.row) + 0.5) * cell_,
                  lon_min_ + (static_cast<double>(c.col) + 0.5) * cell_);
}

std::optional<CellIndex> GridSpec::nearest_cell(const GeoPoint& p) const noexcept {
  if (!contains(p)) return std::nullopt;
  auto r = static_cast<std::size_t>(std::floor((lat_max_ - p.lat()) / cell_));
  auto c = static_cast<std::size_t>(std::floor((p.lon() - lon_min_) / cell_));
  return CellIndex{std::min(r, rows_ - 1), std::min(c, cols_ - 1)};
}

bool GridMap::is_complete() const noexcept {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

// ---------------------------------------------------------------------------
// Assignment and Shepard interpolation
// ---------------------------------------------------------------------------

namespace {

struct CellGroup {
  std::size_t cell;
  std::vector<std::size_t> stations;  // registry order
};

/// Groups reporting stations by nearest cell; result sorted by flat cell index.
std::vector<CellGroup> group_by_cell(const GridSpec& spec, const StationRegistry& registry,
                                     std::span<const std::size_t> reporting) {
  std::map<std::size_t, std::vector<std::size_t>> cells;
  for (auto s : reporting) {
    auto c = spec.nearest_cell(registry[s].location);
    if (!c) continue;
    cells[spec.flat(*c)].push_back(s);
  }
  std::vector<CellGroup> out;
  out.reserve(cells.size());
  for (auto& [cell, st] : cells) out.push_back({cell, std::move(st)});
  return out;
}

double group_value(const CellGroup& g, std::span<const double> station_values) {
  double sum = 0.0;
  for (auto s : g.stations) sum += station_values[s];
  return sum / static_cast<double>(g.stations.size());
}

}  // namespace

GridMap assign_observations(const GridSpec& spec, const StationRegistry& registry, const WeatherSeries& weather,
                            EpochHour epoch, MetFactor factor) {
  std::vector<std::size_t> reporting;
  std::vector<double> station_values(registry.size(), 0.0);
  for (std::size_t s = 0; s < registry.size(); ++s) {
    if (auto v = weather.get(s, epoch, factor)) {
      reporting.push_back(s);
      station_values[s] = *v;
    }
  }
  const auto groups = group_by_cell(spec, registry, reporting);
  if (groups.empty()) {
    throw Error(ErrorCode::NoObservations, std::string(to_string(factor)) + " has no station inside the grid at " +
                                               format_utc(epoch));
  }
  GridMap map{spec, factor, epoch, std::vector<double>(spec.cell_count(), std::numeric_limits<double>::quiet_NaN()),
              std::vector<std::uint8_t>(spec.cell_count(), 0)};
  for (const auto& g : groups) {
    map.values[g.cell] = group_value(g, station_values);
    map.assigned[g.cell] = 1;
  }
  return map;
}

IdwStencil::IdwStencil(const GridSpec& spec, std::vector<std::size_t> assigned_cells,
                       std::vector<std::size_t> target_cells)
    : assigned_(std::move(assigned_cells)), targets_(std::move(target_cells)) {
  if (assigned_.empty()) throw Error(ErrorCode::NoObservations, "IDW needs at least one assigned cell");
  std::vector<GeoPoint> anchors;
  anchors.reserve(assigned_.size());
  for (auto a : assigned_) anchors.push_back(spec.center(a));
  exact_.assign(targets_.size(), -1);
  weights_.resize(targets_.size() * assigned_.size());
  for (std::size_t t = 0; t < targets_.size(); ++t) {
    const auto p = spec.center(targets_[t]);
    for (std::size_t k = 0; k < assigned_.size(); ++k) {
      if (assigned_[k] == targets_[t]) {
        exact_[t] = static_cast<std::ptrdiff_t>(k);
        weights_[t * assigned_.size() + k] = 0.0;
        continue;
      }
      weights_[t * assigned_.size() + k] = 1.0 / haversine_km(p, anchors[k]);
    }
  }
}

void IdwStencil::apply(std::span<const double> assigned_values, std::span<double> out) const {
  if (assigned_values.size() != assigned_.size() || out.size() != targets_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "IDW stencil size mismatch");
  }
  const auto n = assigned_.size();
  for (std::size_t t = 0; t < targets_.size(); ++t) {
    if (exact_[t] >= 0) {
      out[t] = assigned_values[static_cast<std::size_t>(exact_[t])];
      continue;
    }
    double num = 0.0, den = 0.0;
    const double* w = weights_.data() + t * n;
    for (std::size_t k = 0; k < n; ++k) {
      num += w[k] * assigned_values[k];
      den += w[k];
    }
    out[t] = num / den;
  }
}

GridMap idw_fill(GridMap partial) {
  std::vector<std::size_t> assigned, targets;
  std::vector<double> assigned_values;
  for (std::size_t c = 0; c < partial.values.size(); ++c) {
    if (partial.assigned[c]) {
      assigned.push_back(c);
      assigned_values.push_back(partial.values[c]);
    } else {
      targets.push_back(c);
    }
  }
  if (assigned.empty()) throw Error(ErrorCode::NoObservations, "grid map has no assigned cells");
  if (targets.empty()) return partial;
  IdwStencil stencil(partial.spec, std::move(assigned), targets);
  std::vector<double> filled(targets.size());
  stencil.apply(assigned_values, filled);
  for (std::size_t t = 0; t < targets.size(); ++t) partial.values[targets[t]] = filled[t];
  return partial;
}

std::string export_grid_csv(const GridMap& map) {
  std::string out = "lat,lon,value\n";
  for (std::size_t r = 0; r < map.spec.rows(); ++r) {
    for (std::size_t c = 0; c < map.spec.cols(); ++c) {
      const auto p = map.spec.center(CellIndex{r, c});
      out += format_double(p.lat());
      out += ',';
      out += format_double(p.lon());
      out += ',';
      out += format_double(map.values[map.spec.flat({r, c})]);
      out += '\n';
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Path sampling and elevation
// ---------------------------------------------------------------------------

namespace {

struct Vec3 {
  double x, y, z;
};

Vec3 to_unit(const GeoPoint& p) {
  constexpr double deg = std::numbers::pi / 180.0;
  const double la = p.lat() * deg, lo = p.lon() * deg;
  return {std::cos(la) * std::cos(lo), std::cos(la) * std::sin(lo), std::sin(la)};
}

GeoPoint from_unit(const Vec3& v) {
  constexpr double rad = 180.0 / std::numbers::pi;
  const double norm = std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z);
  const double lat = std::asin(std::clamp(v.z / norm, -1.0, 1.0)) * rad;
  const double lon = std::atan2(v.y, v.x) * rad;
  return GeoPoint(std::clamp(lat, -90.0, 90.0), std::clamp(lon, -180.0, 180.0));
}

}  // namespace

PathPoints sample_path(const GeoPoint& tx, const GeoPoint& rx, std::size_t l) {
  if (l < 2) throw Error(ErrorCode::InvalidArgument, "path needs at least 2 points");
  if (tx == rx) throw Error(ErrorCode::DegeneratePath, "transmitter and receiver coincide");
  const auto a = to_unit(tx), b = to_unit(rx);
  const double dot = std::clamp(a.x * b.x + a.y * b.y + a.z * b.z, -1.0, 1.0);
  const double omega = std::acos(dot);
  const double so = std::sin(omega);
  if (!(so > 1e-15)) throw Error(ErrorCode::DegeneratePath, "transmitter and receiver are coincident or antipodal");
  PathPoints out;
  out.reserve(l);
  out.push_back(tx);
  for (std::size_t k = 1; k + 1 < l; ++k) {
    const double f = static_cast<double>(k) / static_cast<double>(l - 1);
    const double wa = std::sin((1.0 - f) * omega) / so;
    const double wb = std::sin(f * omega) / so;
    out.push_back(from_unit({wa * a.x + wb * b.x, wa * a.y + wb * b.y, wa * a.z + wb * b.z}));
  }
  out.push_back(rx);
  return out;
}

ElevationProfile elevation_profile(const ElevationGrid& dem, std::span<const GeoPoint> points) {
  ElevationProfile out;
  out.reserve(points.size());
  const double cs = dem.cell_size();
  const double top = dem.yll() + static_cast<double>(dem.rows()) * cs;
  const double right = dem.xll() + static_cast<double>(dem.cols()) * cs;
  for (std::size_t j = 0; j < points.size(); ++j) {
    const auto& p = points[j];
    if (p.lon() < dem.xll() || p.lon() > right || p.lat() < dem.yll() || p.lat() > top) {
      throw Error(ErrorCode::OutOfExtent, "path point " + std::to_string(j) + " lies outside the DEM");
    }
    // fractional position relative to cell centres
    const double fx = std::clamp((p.lon() - dem.xll()) / cs - 0.5, 0.0, static_cast<double>(dem.cols() - 1));
    const double fy = std::clamp((top - p.lat()) / cs - 0.5, 0.0, static_cast<double>(dem.rows() - 1));
    std::size_t c0 = static_cast<std::size_t>(std::floor(fx));
    std::size_t r0 = static_cast<std::size_t>(std::floor(fy));
    if (dem.cols() > 1) c0 = std::min(c0, dem.cols() - 2);
    if (dem.rows() > 1) r0 = std::min(r0, dem.rows() - 2);
    const double tx = fx - static_cast<double>(c0);
    const double ty = fy - static_cast<double>(r0);
    const std::size_t c1 = std::min(c0 + 1, dem.cols() - 1);
    const std::size_t r1 = std::min(r0 + 1, dem.rows() - 1);
    const std::array<std::pair<double, std::optional<double>>, 4> corners{{
        {(1.0 - tx) * (1.0 - ty), dem.at(r0, c0)},
        {tx * (1.0 - ty), dem.at(r0, c1)},
        {(1.0 - tx) * ty, dem.at(r1, c0)},
        {tx * ty, dem.at(r1, c1)},
    }};
    double num = 0.0, den = 0.0;
    for (const auto& [w, v] : corners) {
      if (!v || w == 0.0) continue;
      num += w * *v;
      den += w;
    }
    if (!(den > 0.0)) {
      throw Error(ErrorCode::NoElevationData, "no elevation data around path point " + std::to_string(j));
    }
    out.push_back(num / den);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Locations and tensors
// ---------------------------------------------------------------------------

std::string_view to_string(LocationMode m) noexcept {
  switch (m) {
    case LocationMode::ReceiverOnly: return "receiver_only";
    case LocationMode::Stations: return "stations";
    case LocationMode::Path: return "path";
  }
  return "path";
}

LocationMode parse_location_mode(std::string_view s) {
  if (s == "receiver_only" || s == "receiver") return LocationMode::ReceiverOnly;
  if (s == "stations") return LocationMode::Stations;
  if (s == "path") return LocationMode::Path;
  throw Error(ErrorCode::ConfigError, "unknown location mode '" + std::string(s) +
                                          "' (expected receiver_only, stations or path)");
}

LocationSet make_locations(LocationMode mode, const GeoPoint& tx, const GeoPoint& rx, std::size_t l,
                           const StationRegistry& registry) {
  LocationSet set;
  set.mode = mode;
  switch (mode) {
    case LocationMode::ReceiverOnly:
      set.points = {rx};
      break;
    case LocationMode::Stations:
      for (const auto& s : registry.entries()) set.points.push_back(s.location);
      break;
    case LocationMode::Path:
      set.points = sample_path(tx, rx, l);
      break;
  }
  return set;
}

PathFeatureTensor PathFeatureTensor::select(std::span<const std::size_t> epoch_indices) const {
  PathFeatureTensor out;
  out.locations = locations;
  out.factors = factors;
  const auto stride = location_count() * factor_count();
  out.data.reserve(epoch_indices.size() * stride);
  for (auto t : epoch_indices) {
    if (t >= epochs.size()) throw Error(ErrorCode::InvalidArgument, "epoch index out of range");
    out.epochs.push_back(epochs[t]);
    auto row = epoch_row(t);
    out.data.insert(out.data.end(), row.begin(), row.end());
  }
  return out;
}

namespace {

std::vector<std::size_t> location_cells(const GridSpec& spec, const LocationSet& locations) {
  std::vector<std::size_t> cells;
  cells.reserve(locations.size());
  for (std::size_t j = 0; j < locations.size(); ++j) {
    auto c = spec.nearest_cell(locations.points[j]);
    if (!c) throw Error(ErrorCode::OutOfExtent, "location " + std::to_string(j) + " lies outside the grid");
    cells.push_back(spec.flat(*c));
  }
  return cells;
}

}  // namespace

PathFeatureTensor extract_path_features(const std::map<MapKey, GridMap>& maps, const std::vector<EpochHour>& epochs,
                                        const FactorSet& factors, const LocationSet& locations) {
  PathFeatureTensor out{epochs, locations, factors, {}};
  out.data.resize(epochs.size() * locations.size() * factors.size());
  std::vector<std::size_t> cells;
  for (std::size_t t = 0; t < epochs.size(); ++t) {
    for (std::size_t i = 0; i < factors.size(); ++i) {
      auto it = maps.find({factors[i], epochs[t]});
      if (it == maps.end() || !it->second.is_complete()) {
        throw Error(ErrorCode::MissingMap, "no filled map for " + std::string(to_string(factors[i])) + " at " +
                                               format_utc(epochs[t]));
      }
      if (cells.empty()) cells = location_cells(it->second.spec, locations);
      for (std::size_t j = 0; j < locations.size(); ++j) out.at(t, j, i) = it->second.values[cells[j]];
    }
  }
  return out;
}

PathFeatureTensor build_feature_tensor(const GridSpec& spec, const StationRegistry& registry,
                                       const WeatherSeries& weather, const std::vector<EpochHour>& epochs,
                                       const FactorSet& factors, const LocationSet& locations) {
  const auto cells = location_cells(spec, locations);
  struct Cached {
    std::vector<CellGroup> groups;
    IdwStencil stencil;
  };
  std::map<std::vector<std::uint8_t>, Cached> cache;

  PathFeatureTensor out{epochs, locations, factors, {}};
  out.data.resize(epochs.size() * locations.size() * factors.size());
  std::vector<std::uint8_t> mask(registry.size());
  std::vector<double> station_values(registry.size());
  std::vector<std::size_t> reporting;
  std::vector<double> assigned_values, column(locations.size());
  for (std::size_t t = 0; t < epochs.size(); ++t) {
    for (std::size_t i = 0; i < factors.size(); ++i) {
      reporting.clear();
      for (std::size_t s = 0; s < registry.size(); ++s) {
        const auto v = weather.get(s, epochs[t], factors[i]);
        mask[s] = v.has_value() && spec.contains(registry[s].location);
        station_values[s] = v.value_or(0.0);
        if (mask[s]) reporting.push_back(s);
      }
      auto it = cache.find(mask);
      if (it == cache.end()) {
        auto groups = group_by_cell(spec, registry, reporting);
        if (groups.empty()) {
          throw Error(ErrorCode::NoObservations, std::string(to_string(factors[i])) +
                                                     " has no station inside the grid at " + format_utc(epochs[t]));
        }
        std::vector<std::size_t> assigned;
        for (const auto& g : groups) assigned.push_back(g.cell);
        IdwStencil stencil(spec, std::move(assigned), cells);
        it = cache.emplace(mask, Cached{std::move(groups), std::move(stencil)}).first;
      }
      assigned_values.clear();
      for (const auto& g : it->second.groups) assigned_values.push_back(group_value(g, station_values));
      it->second.stencil.apply(assigned_values, column);
      for (std::size_t j = 0; j < locations.size(); ++j) out.at(t, j, i) = column[j];
    }
  }
  return out;
}

}  // namespace eltd
