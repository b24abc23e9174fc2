#include "eltd/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_set>

#include "eltd/csv.hpp"

namespace eltd {

namespace {

std::string at_line(std::string_view source, std::size_t line) {
  return std::string(source) + ":" + std::to_string(line);
}

/// Neumaier-compensated running sum.
struct CompensatedSum {
  double sum = 0.0;
  double c = 0.0;
  void add(double v) noexcept {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      c += (sum - t) + v;
    } else {
      c += (v - t) + sum;
    }
    sum = t;
  }
  [[nodiscard]] double value() const noexcept { return sum + c; }
};

}  // namespace

// ---------------------------------------------------------------------------
// Station registry
// ---------------------------------------------------------------------------

StationRegistry::StationRegistry(std::vector<Station> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw Error(ErrorCode::ParseError, "station registry has no entries");
  std::unordered_set<std::string> seen;
  for (const auto& e : entries_) {
    if (e.id.empty()) throw Error(ErrorCode::ParseError, "empty station id");
    if (!seen.insert(e.id).second) throw Error(ErrorCode::DuplicateStation, "station '" + e.id + "' listed twice");
  }
}

std::optional<std::size_t> StationRegistry::find(std::string_view id) const noexcept {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].id == id) return i;
  }
  return std::nullopt;
}

StationRegistry parse_station_registry_text(std::string_view text) {
  const auto table = csv::parse(text, "stations.csv");
  if (table.header != std::vector<std::string>{"station_id", "lat", "lon"}) {
    throw Error(ErrorCode::ParseError, "stations.csv:1: header must be 'station_id,lat,lon'");
  }
  if (table.rows.empty()) throw Error(ErrorCode::ParseError, "stations.csv: no data rows");
  std::vector<Station> entries;
  std::unordered_set<std::string> seen;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto where = at_line("stations.csv", table.line_numbers[r]);
    if (row.size() != 3) throw Error(ErrorCode::ParseError, where + ": expected 3 fields");
    if (!seen.insert(row[0]).second) throw Error(ErrorCode::DuplicateStation, where + ": station '" + row[0] + "'");
    try {
      entries.push_back({row[0], GeoPoint(parse_double(row[1]), parse_double(row[2]))});
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, where + ": " + e.what());
    }
  }
  return StationRegistry(std::move(entries));
}

StationRegistry parse_station_registry(const std::filesystem::path& path) {
  return parse_station_registry_text(csv::read_file(path));
}

std::string serialize_station_registry(const StationRegistry& reg) {
  std::string out = "station_id,lat,lon\n";
  for (const auto& s : reg.entries()) {
    out += csv::join_row({s.id, format_double(s.location.lat()), format_double(s.location.lon())});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Weather
// ---------------------------------------------------------------------------

WeatherSeries::WeatherSeries(std::size_t station_count, FactorSet columns)
    : station_count_(station_count), columns_(std::move(columns)) {}

WeatherRecord& WeatherSeries::record(std::size_t station, EpochHour epoch) {
  if (station >= station_count_) throw Error(ErrorCode::UnknownStation, "station index out of range");
  auto& slot = by_epoch_[epoch];
  if (slot.empty()) slot.resize(station_count_);
  if (!slot[station]) slot[station].emplace();
  return *slot[station];
}

void WeatherSeries::set(std::size_t station, EpochHour epoch, MetFactor f, double value) {
  record(station, epoch)[index_of(f)] = validate_factor_value(f, value);
}

const WeatherRecord* WeatherSeries::find(std::size_t station, EpochHour epoch) const {
  auto it = by_epoch_.find(epoch);
  if (it == by_epoch_.end() || station >= it->second.size() || !it->second[station]) return nullptr;
  return &*it->second[station];
}

std::optional<double> WeatherSeries::get(std::size_t station, EpochHour epoch, MetFactor f) const {
  const auto* rec = find(station, epoch);
  if (!rec) return std::nullopt;
  return (*rec)[index_of(f)];
}

std::vector<EpochHour> WeatherSeries::epochs() const {
  std::vector<EpochHour> out;
  out.reserve(by_epoch_.size());
  for (const auto& [e, _] : by_epoch_) out.push_back(e);
  return out;
}

WeatherSeries parse_weather_text(std::string_view text, const StationRegistry& registry) {
  const auto table = csv::parse(text, "weather.csv");
  if (table.header.size() < 3 || table.header[0] != "station_id" || table.header[1] != "timestamp") {
    throw Error(ErrorCode::ParseError, "weather.csv:1: header must start with 'station_id,timestamp'");
  }
  std::vector<MetFactor> cols;
  for (std::size_t c = 2; c < table.header.size(); ++c) {
    auto f = parse_factor(table.header[c]);
    if (!f) throw Error(ErrorCode::ParseError, "weather.csv:1: unknown factor column '" + table.header[c] + "'");
    cols.push_back(*f);
  }
  WeatherSeries series(registry.size(), FactorSet(cols));
  std::set<std::pair<std::size_t, EpochHour>> seen;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto where = at_line("weather.csv", table.line_numbers[r]);
    if (row.size() != table.header.size()) {
      throw Error(ErrorCode::ParseError, where + ": expected " + std::to_string(table.header.size()) + " fields");
    }
    auto station = registry.find(row[0]);
    if (!station) throw Error(ErrorCode::UnknownStation, where + ": station '" + row[0] + "' not in registry");
    EpochHour epoch;
    try {
      epoch = EpochHour::exact(parse_utc(row[1]));
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, where + ": " + e.what());
    }
    if (!seen.emplace(*station, epoch).second) {
      throw Error(ErrorCode::ParseError, where + ": duplicate record for station '" + row[0] + "' at " + row[1]);
    }
    series.record(*station, epoch);
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const auto& cell = row[c + 2];
      if (cell.empty()) continue;
      double v;
      try {
        v = parse_double(cell);
      } catch (const Error& e) {
        throw Error(ErrorCode::ParseError, where + ": " + e.what());
      }
      try {
        series.set(*station, epoch, cols[c], v);
      } catch (const Error& e) {
        throw Error(ErrorCode::OutOfRange, where + ": " + e.what());
      }
    }
  }
  return series;
}

WeatherSeries parse_weather_csv(const std::filesystem::path& path, const StationRegistry& registry) {
  return parse_weather_text(csv::read_file(path), registry);
}

std::string serialize_weather(const WeatherSeries& weather, const StationRegistry& registry) {
  std::vector<std::string> header{"station_id", "timestamp"};
  for (auto f : weather.columns()) header.emplace_back(to_string(f));
  std::string out = csv::join_row(header);
  for (const auto& [epoch, recs] : weather.by_epoch()) {
    const auto ts = format_utc(epoch);
    for (std::size_t s = 0; s < recs.size(); ++s) {
      if (!recs[s]) continue;
      std::vector<std::string> row{registry[s].id, ts};
      for (auto f : weather.columns()) {
        const auto& v = (*recs[s])[index_of(f)];
        row.push_back(v ? format_double(*v) : std::string{});
      }
      out += csv::join_row(row);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// TD logs
// ---------------------------------------------------------------------------

TdSeries1Hz::TdSeries1Hz(std::vector<TdSample> samples) : samples_(std::move(samples)) {
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto& s = samples_[i];
    if (i > 0 && !(samples_[i - 1].time < s.time)) {
      throw Error(ErrorCode::ParseError, "TD timestamps not strictly increasing at " + format_utc(s.time));
    }
    if (s.samples == 0) throw Error(ErrorCode::ParseError, "TD row with zero samples at " + format_utc(s.time));
    (void)TdNanoseconds(s.td_ns);
  }
}

TdSeries1Hz parse_td_text(std::string_view text) {
  const auto table = csv::parse(text, "td.csv");
  const bool with_counts = table.header == std::vector<std::string>{"timestamp", "td_ns", "samples"};
  if (!with_counts && table.header != std::vector<std::string>{"timestamp", "td_ns"}) {
    throw Error(ErrorCode::ParseError, "td.csv:1: header must be 'timestamp,td_ns' or 'timestamp,td_ns,samples'");
  }
  std::vector<TdSample> samples;
  samples.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto where = at_line("td.csv", table.line_numbers[r]);
    if (row.size() != table.header.size()) throw Error(ErrorCode::ParseError, where + ": wrong field count");
    try {
      TdSample s{parse_utc(row[0]), parse_double(row[1]), 1};
      if (with_counts) {
        std::uint32_t n = 0;
        auto [p, ec] = std::from_chars(row[2].data(), row[2].data() + row[2].size(), n);
        if (ec != std::errc{} || p != row[2].data() + row[2].size() || n == 0) {
          throw Error(ErrorCode::ParseError, "bad sample count '" + row[2] + "'");
        }
        s.samples = n;
      }
      (void)TdNanoseconds(s.td_ns);
      if (!samples.empty() && !(samples.back().time < s.time)) {
        throw Error(ErrorCode::ParseError, "timestamps not strictly increasing");
      }
      samples.push_back(s);
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, where + ": " + e.what());
    }
  }
  return TdSeries1Hz(std::move(samples));
}

TdSeries1Hz parse_td_csv(const std::filesystem::path& path) { return parse_td_text(csv::read_file(path)); }

std::string serialize_td(const TdSeries1Hz& td) {
  const bool with_counts =
      std::any_of(td.samples().begin(), td.samples().end(), [](const TdSample& s) { return s.samples != 1; });
  std::string out = with_counts ? "timestamp,td_ns,samples\n" : "timestamp,td_ns\n";
  for (const auto& s : td.samples()) {
    out += format_utc(s.time);
    out += ',';
    out += format_double(s.td_ns);
    if (with_counts) {
      out += ',';
      out += std::to_string(s.samples);
    }
    out += '\n';
  }
  return out;
}

HourlyTdSeries aggregate_hourly_unsorted(std::vector<TdSample> samples, std::size_t min_samples) {
  struct Acc {
    CompensatedSum sum;
    std::size_t count = 0;
  };
  std::map<EpochHour, Acc> acc;
  for (const auto& s : samples) {
    auto& a = acc[EpochHour::containing(s.time)];
    a.sum.add(s.td_ns * static_cast<double>(s.samples));
    a.count += s.samples;
  }
  HourlyTdSeries out;
  for (const auto& [epoch, a] : acc) {
    if (a.count < min_samples || a.count == 0) continue;
    out.push_back({epoch, a.sum.value() / static_cast<double>(a.count), a.count});
  }
  return out;
}

HourlyTdSeries aggregate_hourly(const TdSeries1Hz& td, std::size_t min_samples) {
  return aggregate_hourly_unsorted(td.samples(), min_samples);
}

std::string serialize_hourly(const HourlyTdSeries& hourly) {
  std::string out = "timestamp,td_ns,samples\n";
  for (const auto& h : hourly) {
    out += csv::join_row({format_utc(h.epoch), format_double(h.mean_ns), std::to_string(h.sample_count)});
  }
  return out;
}

HourlyTdSeries parse_hourly_text(std::string_view text) {
  const auto table = csv::parse(text, "hourly_td.csv");
  if (table.header != std::vector<std::string>{"timestamp", "td_ns", "samples"}) {
    throw Error(ErrorCode::ParseError, "hourly_td.csv:1: header must be 'timestamp,td_ns,samples'");
  }
  HourlyTdSeries out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto where = at_line("hourly_td.csv", table.line_numbers[r]);
    if (row.size() != 3) throw Error(ErrorCode::ParseError, where + ": wrong field count");
    try {
      HourlyTd h{EpochHour::exact(parse_utc(row[0])), parse_double(row[1]),
                 static_cast<std::size_t>(std::stoull(row[2]))};
      if (!out.empty() && !(out.back().epoch < h.epoch)) throw Error(ErrorCode::ParseError, "epochs not increasing");
      out.push_back(h);
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, where + ": " + e.what());
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, where + ": bad sample count");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Alignment
// ---------------------------------------------------------------------------

AlignedDataset align_epochs(const WeatherSeries& weather, const HourlyTdSeries& td, const FactorSet& factors,
                            const std::vector<std::size_t>& stations) {
  AlignedDataset out;
  out.factors = factors;
  out.stations = stations;
  for (auto s : stations) {
    if (s >= weather.station_count()) throw Error(ErrorCode::UnknownStation, "station index out of range");
  }
  std::vector<double> row(stations.size() * factors.size());
  for (const auto& h : td) {
    bool complete = true;
    for (std::size_t si = 0; si < stations.size() && complete; ++si) {
      const auto* rec = weather.find(stations[si], h.epoch);
      if (!rec) {
        complete = false;
        break;
      }
      for (std::size_t i = 0; i < factors.size(); ++i) {
        const auto& v = (*rec)[index_of(factors[i])];
        if (!v) {
          complete = false;
          break;
        }
        row[si * factors.size() + i] = *v;
      }
    }
    if (!complete) continue;
    out.epochs.push_back(h.epoch);
    out.td_ns.push_back(h.mean_ns);
    out.weather.insert(out.weather.end(), row.begin(), row.end());
  }
  if (out.epochs.empty()) {
    throw Error(ErrorCode::EmptyIntersection, "no epoch has both TD and complete weather for the requested factors");
  }
  return out;
}

// ---------------------------------------------------------------------------
// DEM
// ---------------------------------------------------------------------------

ElevationGrid::ElevationGrid(std::size_t ncols, std::size_t nrows, double xll, double yll, double cell_size,
                             std::vector<std::optional<double>> values, double nodata_value)
    : ncols_(ncols), nrows_(nrows), xll_(xll), yll_(yll), cell_(cell_size), values_(std::move(values)),
      nodata_(nodata_value) {
  if (ncols == 0 || nrows == 0) throw Error(ErrorCode::InconsistentDimensions, "DEM must have at least one cell");
  if (!(cell_size > 0.0) || !std::isfinite(cell_size)) throw Error(ErrorCode::ParseError, "DEM cell size must be > 0");
  if (values_.size() != ncols * nrows) {
    throw Error(ErrorCode::InconsistentDimensions, "DEM value count does not match ncols x nrows");
  }
  for (const auto& v : values_) {
    if (v && !std::isfinite(*v)) throw Error(ErrorCode::ParseError, "DEM elevation not finite");
  }
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' || line[pos] == '\r')) ++pos;
    if (pos >= line.size()) break;
    auto end = pos;
    while (end < line.size() && line[end] != ' ' && line[end] != '\t' && line[end] != '\r') ++end;
    out.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return out;
}

}  // namespace

ElevationGrid parse_dem_text(std::string_view text) {
  std::vector<std::string_view> lines;
  {
    std::size_t pos = 0;
    while (pos < text.size()) {
      auto end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      lines.push_back(text.substr(pos, end - pos));
      pos = end + 1;
    }
  }
  std::optional<double> ncols, nrows, xll, yll, cell;
  double nodata = -9999.0;
  bool x_center = false, y_center = false;
  std::size_t li = 0;
  for (; li < lines.size(); ++li) {
    auto tok = tokens(lines[li]);
    if (tok.empty()) continue;
    const auto key = lower(tok[0]);
    const bool is_header = key == "ncols" || key == "nrows" || key == "xllcorner" || key == "yllcorner" ||
                           key == "xllcenter" || key == "yllcenter" || key == "cellsize" || key == "nodata_value";
    if (!is_header) break;
    if (tok.size() != 2) throw Error(ErrorCode::ParseError, "dem.asc:" + std::to_string(li + 1) + ": malformed header");
    double v;
    try {
      v = parse_double(tok[1]);
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, "dem.asc:" + std::to_string(li + 1) + ": " + e.what());
    }
    if (key == "ncols") ncols = v;
    else if (key == "nrows") nrows = v;
    else if (key == "xllcorner") xll = v;
    else if (key == "yllcorner") yll = v;
    else if (key == "xllcenter") { xll = v; x_center = true; }
    else if (key == "yllcenter") { yll = v; y_center = true; }
    else if (key == "cellsize") cell = v;
    else nodata = v;
  }
  if (!ncols || !nrows || !xll || !yll || !cell) {
    throw Error(ErrorCode::ParseError, "dem.asc: header must define ncols, nrows, xllcorner, yllcorner, cellsize");
  }
  if (*ncols < 1 || *nrows < 1 || std::floor(*ncols) != *ncols || std::floor(*nrows) != *nrows) {
    throw Error(ErrorCode::InconsistentDimensions, "dem.asc: ncols/nrows must be positive integers");
  }
  if (!(*cell > 0.0)) throw Error(ErrorCode::ParseError, "dem.asc: cellsize must be > 0");
  if (x_center) *xll -= *cell / 2.0;
  if (y_center) *yll -= *cell / 2.0;
  const auto nc = static_cast<std::size_t>(*ncols);
  const auto nr = static_cast<std::size_t>(*nrows);
  std::vector<std::optional<double>> values;
  values.reserve(nc * nr);
  std::size_t data_rows = 0;
  for (; li < lines.size(); ++li) {
    auto tok = tokens(lines[li]);
    if (tok.empty()) continue;
    ++data_rows;
    if (data_rows > nr) {
      throw Error(ErrorCode::InconsistentDimensions, "dem.asc:" + std::to_string(li + 1) + ": more rows than nrows");
    }
    if (tok.size() != nc) {
      throw Error(ErrorCode::InconsistentDimensions, "dem.asc:" + std::to_string(li + 1) + ": row has " +
                                                          std::to_string(tok.size()) + " values, expected " +
                                                          std::to_string(nc));
    }
    for (auto t : tok) {
      double v;
      try {
        v = parse_double(t);
      } catch (const Error& e) {
        throw Error(ErrorCode::ParseError, "dem.asc:" + std::to_string(li + 1) + ": " + e.what());
      }
      if (v == nodata) values.emplace_back(std::nullopt);
      else values.emplace_back(v);
    }
  }
  if (data_rows != nr) {
    throw Error(ErrorCode::InconsistentDimensions,
                "dem.asc: found " + std::to_string(data_rows) + " rows, expected " + std::to_string(nr));
  }
  return ElevationGrid(nc, nr, *xll, *yll, *cell, std::move(values), nodata);
}

ElevationGrid parse_dem(const std::filesystem::path& path) { return parse_dem_text(csv::read_file(path)); }

std::string serialize_dem(const ElevationGrid& dem) {
  std::string out;
  out += "ncols " + std::to_string(dem.cols()) + "\n";
  out += "nrows " + std::to_string(dem.rows()) + "\n";
  out += "xllcorner " + format_double(dem.xll()) + "\n";
  out += "yllcorner " + format_double(dem.yll()) + "\n";
  out += "cellsize " + format_double(dem.cell_size()) + "\n";
  out += "NODATA_value " + format_double(dem.nodata_value()) + "\n";
  for (std::size_t r = 0; r < dem.rows(); ++r) {
    for (std::size_t c = 0; c < dem.cols(); ++c) {
      if (c) out += ' ';
      const auto v = dem.at(r, c);
      out += format_double(v ? *v : dem.nodata_value());
    }
    out += '\n';
  }
  return out;
}

}  // namespace eltd
