#include "eltd/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <string>

#include <json.hpp>

#include "eltd/error.hpp"

namespace eltd::synth {

using F = MetFactor;

FactorSet Recipe::factors() const {
  std::vector<MetFactor> fs;
  auto add = [&](MetFactor f) {
    if (std::find(fs.begin(), fs.end(), f) == fs.end()) fs.push_back(f);
  };
  for (const auto& [f, a] : linear) add(f);
  for (const auto& it : interactions) {
    add(it.a);
    add(it.b);
    add(it.c);
  }
  return FactorSet(std::move(fs));
}

Recipe linear_elevation_recipe() {
  Recipe r;
  r.name = "linear_elevation";
  r.bias_ns = 120.0;
  r.linear = {{F::PressureHpa, -12.0}, {F::CloudCover, 6.0},    {F::HumidityPct, 8.0}, {F::TemperatureC, 10.0},
              {F::VaporPressureHpa, 10.0}, {F::VisibilityM, -6.0}, {F::WindSpeedMs, -5.0}};
  r.elevation_gain = 1.0;
  return r;
}

Recipe cubic_recipe() {
  Recipe r;
  r.name = "cubic";
  r.bias_ns = 120.0;
  r.linear = {{F::PressureHpa, -10.0}, {F::HumidityPct, 6.0}, {F::TemperatureC, 8.0}};
  r.interactions = {{F::TemperatureC, F::TemperatureC, F::TemperatureC, 4.0},
                    {F::PressureHpa, F::HumidityPct, F::TemperatureC, 6.0},
                    {F::HumidityPct, F::HumidityPct, F::PressureHpa, -5.0}};
  r.elevation_gain = 0.0;
  return r;
}

Recipe zero_recipe() {
  Recipe r;
  r.name = "zero";
  return r;
}

Recipe recipe_by_name(std::string_view name) {
  if (name == "linear_elevation") return linear_elevation_recipe();
  if (name == "cubic") return cubic_recipe();
  if (name == "zero") return zero_recipe();
  throw Error(ErrorCode::ConfigError, "unknown recipe '" + std::string(name) + "' (expected linear_elevation, cubic or zero)");
}

double factor_center(MetFactor f) noexcept {
  switch (f) {
    case F::PressureHpa: return 1018.0;
    case F::CloudCover: return 5.0;
    case F::HumidityPct: return 65.0;
    case F::PrecipitationMm: return 0.3;
    case F::SnowDepthCm: return 0.5;
    case F::SunshineHr: return 0.3;
    case F::TemperatureC: return 8.0;
    case F::VaporPressureHpa: return 10.0;
    case F::VisibilityM: return 20000.0;
    case F::WindDirDeg: return 180.0;
    case F::WindSpeedMs: return 3.0;
  }
  return 0.0;
}

double factor_scale(MetFactor f) noexcept {
  switch (f) {
    case F::PressureHpa: return 7.0;
    case F::CloudCover: return 3.0;
    case F::HumidityPct: return 15.0;
    case F::PrecipitationMm: return 1.0;
    case F::SnowDepthCm: return 2.0;
    case F::SunshineHr: return 0.4;
    case F::TemperatureC: return 8.0;
    case F::VaporPressureHpa: return 5.0;
    case F::VisibilityM: return 5000.0;
    case F::WindDirDeg: return 100.0;
    case F::WindSpeedMs: return 1.5;
  }
  return 1.0;
}

std::vector<double> recipe_weights(std::span<const double> profile, double gain) {
  if (profile.empty()) throw Error(ErrorCode::Empty, "empty elevation profile");
  std::vector<double> h(profile.size());
  double sum = 0.0;
  for (std::size_t j = 0; j < h.size(); ++j) {
    h[j] = std::max(profile[j], 1.0);
    sum += h[j];
  }
  const double mean = sum / static_cast<double>(h.size());
  for (auto& v : h) v = 1.0 + gain * (v / mean - 1.0);
  return h;
}

double evaluate_recipe(const Recipe& r, std::span<const double> slab, std::span<const double> omega) {
  const FactorSet fs = r.factors();
  const auto n = fs.size(), l = omega.size();
  if (n == 0) return r.bias_ns;
  if (slab.size() != l * n) throw Error(ErrorCode::DimensionMismatch, "slab does not match locations x recipe factors");
  std::array<double, kFactorCount> m{};
  double wsum = 0.0;
  for (std::size_t j = 0; j < l; ++j) wsum += omega[j];
  for (std::size_t i = 0; i < n; ++i) {
    const MetFactor f = fs[i];
    double acc = 0.0;
    for (std::size_t j = 0; j < l; ++j) acc += omega[j] * (slab[j * n + i] - factor_center(f)) / factor_scale(f);
    m[index_of(f)] = acc / wsum;
  }
  double g = r.bias_ns;
  for (const auto& [f, a] : r.linear) g += a * m[index_of(f)];
  for (const auto& it : r.interactions) g += it.coef * m[index_of(it.a)] * m[index_of(it.b)] * m[index_of(it.c)];
  return g;
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double round_to(double v, double step) { return std::round(v / step) * step; }
double round_dec(double v, int decimals) {
  const double p = std::pow(10.0, decimals);
  return std::round(v * p) / p;
}

struct Climate {
  double mean;
  double seasonal;     // amplitude
  double seasonal_doy; // day of peak
  double diurnal;
  double diurnal_hour; // local hour of peak
  double ar_sd;
  double phi;
};

// Latent drivers; derived factors are built from these.
enum Driver { kTemp, kHum, kPres, kCloud, kVis, kWindDir, kWindSpd, kDriverCount };

constexpr std::array<Climate, kDriverCount> kClimate{{
    {12.0, 14.0, 205.0, 5.0, 15.0, 2.5, 0.97},    // temperature
    {65.0, 10.0, 200.0, 12.0, 4.0, 10.0, 0.95},   // humidity
    {1016.0, 8.0, 15.0, 1.0, 10.0, 5.0, 0.99},    // pressure
    {5.0, 0.0, 0.0, 0.0, 0.0, 3.0, 0.95},         // cloud latent
    {0.0, 0.0, 0.0, 0.0, 0.0, 3000.0, 0.95},      // visibility perturbation
    {270.0, 0.0, 0.0, 0.0, 0.0, 60.0, 0.98},      // wind direction
    {2.5, 1.0, 30.0, 1.0, 14.0, 1.2, 0.9},        // wind speed
}};

StationRegistry make_stations(const ScenarioConfig& cfg, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> offset(0.015, 0.04);
  std::vector<Station> st;
  for (std::size_t k = 0; k < cfg.station_count; ++k) {
    const double f = (static_cast<double>(k) + 0.5) / static_cast<double>(cfg.station_count);
    const double lat = cfg.tx.lat() + f * (cfg.rx.lat() - cfg.tx.lat());
    const double lon = cfg.tx.lon() + f * (cfg.rx.lon() - cfg.tx.lon());
    const double side = (k % 2 == 0) ? 1.0 : -1.0;
    char id[16];
    std::snprintf(id, sizeof id, "STN%02zu", k + 1);
    st.push_back({id, GeoPoint(round_dec(lat + side * offset(rng), 4), round_dec(lon, 4))});
  }
  return StationRegistry(std::move(st));
}

// Continuous terrain; the DEM is a raster of it. Station heights read the function directly so the
// weather does not depend on the raster resolution.
class Terrain {
public:
  Terrain(const ScenarioConfig& cfg, std::mt19937_64& rng) {
    const double pad = 0.1;
    lat0 = std::min(cfg.tx.lat(), cfg.rx.lat()) - pad;
    lat1 = std::max(cfg.tx.lat(), cfg.rx.lat()) + pad;
    lon0 = std::min(cfg.tx.lon(), cfg.rx.lon()) - pad;
    lon1 = std::max(cfg.tx.lon(), cfg.rx.lon()) + pad;
    std::uniform_real_distribution<double> ulat(lat0, lat1), ulon(lon0 + 0.2, lon1 - 0.3), uh(100.0, 400.0),
        uw(0.05, 0.15);
    for (int k = 0; k < 8; ++k) hills_.push_back({ulat(rng), ulon(rng), uh(rng), uw(rng)});
    // coastline just east of the transmitter; open sea beyond it carries no data
    coast_ = cfg.tx.lon() + 0.02;
    nodata_from_ = cfg.tx.lon() + 0.08;
  }

  [[nodiscard]] std::optional<double> height(double lat, double lon) const {
    if (lon >= nodata_from_) return std::nullopt;
    if (lon >= coast_) return 0.0;
    double h = 60.0 + 40.0 * std::sin(9.0 * lat) * std::cos(5.0 * lon);
    h += 850.0 * std::exp(-std::pow((lon - 128.85) / 0.15, 2.0));
    h += 650.0 * std::exp(-std::pow((lon - 127.95) / 0.2, 2.0));
    for (const auto& hl : hills_) {
      h += hl.height * std::exp(-(std::pow(lat - hl.lat, 2.0) + std::pow(lon - hl.lon, 2.0)) / (hl.width * hl.width));
    }
    const double shore = std::clamp((coast_ - lon) / 0.1, 0.0, 1.0);
    return round_dec(std::max(0.0, h * shore), 1);
  }

  double lat0, lat1, lon0, lon1;

private:
  struct Hill {
    double lat, lon, height, width;
  };
  std::vector<Hill> hills_;
  double coast_, nodata_from_;
};

ElevationGrid make_dem(const ScenarioConfig& cfg, const Terrain& terrain) {
  const double cell = cfg.dem_cell_deg;
  const auto ncols = static_cast<std::size_t>(std::ceil((terrain.lon1 - terrain.lon0) / cell));
  const auto nrows = static_cast<std::size_t>(std::ceil((terrain.lat1 - terrain.lat0) / cell));
  const double xll = round_dec(terrain.lon0, 6), yll = round_dec(terrain.lat0, 6);
  std::vector<std::optional<double>> values(ncols * nrows);
  for (std::size_t r = 0; r < nrows; ++r) {
    const double lat = yll + (static_cast<double>(nrows - r) - 0.5) * cell;
    for (std::size_t c = 0; c < ncols; ++c) {
      values[r * ncols + c] = terrain.height(lat, xll + (static_cast<double>(c) + 0.5) * cell);
    }
  }
  return ElevationGrid(ncols, nrows, xll, yll, cell, std::move(values));
}

Eigen::MatrixXd spatial_cholesky(const StationRegistry& reg, double corr_km) {
  const auto s = static_cast<Eigen::Index>(reg.size());
  Eigen::MatrixXd c(s, s);
  for (Eigen::Index a = 0; a < s; ++a) {
    for (Eigen::Index b = 0; b < s; ++b) {
      c(a, b) = std::exp(-haversine_km(reg[static_cast<std::size_t>(a)].location, reg[static_cast<std::size_t>(b)].location) /
                         corr_km);
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(c);
  return llt.matrixL();
}

double magnus_hpa(double t_c) { return 6.112 * std::exp(17.67 * t_c / (t_c + 243.5)); }

}  // namespace

SyntheticScenario generate_scenario(const ScenarioConfig& cfg) {
  if (cfg.station_count < 1) throw Error(ErrorCode::ConfigError, "station_count must be >= 1");
  if (cfg.duration_hours < 1) throw Error(ErrorCode::ConfigError, "duration_hours must be >= 1");
  if (!(cfg.noise_sd_ns >= 0.0) || !(cfg.jitter_sd_ns >= 0.0)) throw Error(ErrorCode::ConfigError, "noise sd must be >= 0");
  if (cfg.block_seconds < 1 || 3600 % cfg.block_seconds != 0) {
    throw Error(ErrorCode::ConfigError, "block_seconds must divide 3600");
  }
  if (!(cfg.dropout_rate >= 0.0 && cfg.dropout_rate < 1.0) || !(cfg.blank_rate >= 0.0 && cfg.blank_rate < 1.0)) {
    throw Error(ErrorCode::ConfigError, "dropout_rate and blank_rate must be in [0, 1)");
  }
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  StationRegistry registry = make_stations(cfg, rng);
  const Terrain terrain(cfg, rng);
  ElevationGrid dem = make_dem(cfg, terrain);
  const auto S = registry.size();
  std::vector<double> station_h(S);
  for (std::size_t s = 0; s < S; ++s) {
    station_h[s] = terrain.height(registry[s].location.lat(), registry[s].location.lon()).value_or(0.0);
  }
  const Eigen::MatrixXd chol = spatial_cholesky(registry, cfg.correlation_km);

  std::vector<double> temp_offset(S);
  for (std::size_t s = 0; s < S; ++s) temp_offset[s] = -0.0065 * station_h[s] + 0.5 * normal(rng);

  WeatherSeries complete(S, FactorSet::all());
  std::vector<EpochHour> epochs;
  std::array<Eigen::VectorXd, kDriverCount> ar;
  for (auto& a : ar) a = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(S));
  std::vector<double> snow(S, 0.0);
  Eigen::VectorXd eps(static_cast<Eigen::Index>(S));

  for (std::size_t k = 0; k < cfg.duration_hours; ++k) {
    const EpochHour e(cfg.start.time() + std::chrono::hours(static_cast<long>(k)));
    epochs.push_back(e);
    const auto days = std::chrono::floor<std::chrono::days>(e.time());
    const std::chrono::year_month_day ymd{days};
    const auto jan1 = std::chrono::sys_days{ymd.year() / std::chrono::January / 1};
    const double doy = static_cast<double>((days - jan1).count()) + 1.0;
    const double local_hour = static_cast<double>((e.hours_since_epoch() + 9) % 24);

    std::array<Eigen::VectorXd, kDriverCount> v;
    for (int d = 0; d < kDriverCount; ++d) {
      const auto& c = kClimate[static_cast<std::size_t>(d)];
      for (auto& x : eps) x = normal(rng);
      ar[static_cast<std::size_t>(d)] =
          c.phi * ar[static_cast<std::size_t>(d)] + std::sqrt(1.0 - c.phi * c.phi) * c.ar_sd * (chol * eps);
      const double base = c.mean + c.seasonal * std::cos(kTwoPi * (doy - c.seasonal_doy) / 365.25) +
                          c.diurnal * std::cos(kTwoPi * (local_hour - c.diurnal_hour) / 24.0);
      v[static_cast<std::size_t>(d)] = ar[static_cast<std::size_t>(d)].array() + base;
    }
    const bool daylight = local_hour >= 7.0 && local_hour <= 17.0;
    for (std::size_t s = 0; s < S; ++s) {
      const auto si = static_cast<Eigen::Index>(s);
      const double temp = std::clamp(round_dec(v[kTemp](si) + temp_offset[s], 1), -40.0, 45.0);
      const double hum = std::clamp(round_dec(v[kHum](si), 1), 5.0, 100.0);
      const double pres = round_dec(v[kPres](si), 1);
      const double cloud_latent = v[kCloud](si) + 0.05 * (hum - 65.0);
      const double cloud = std::clamp(std::round(cloud_latent), 0.0, 10.0);
      const double precip = round_dec(std::max(0.0, cloud_latent - 8.5) * 1.5, 1);
      if (precip > 0.0 && temp < 0.5) snow[s] += precip * 1.2;
      if (temp > 2.0) snow[s] = std::max(0.0, snow[s] - 0.1 * (temp - 2.0));
      const double snow_cm = round_dec(snow[s], 1);
      const double sun = daylight ? std::clamp(round_dec(1.0 - cloud / 10.0 + 0.1 * normal(rng), 1), 0.0, 1.0) : 0.0;
      const double vapor = std::clamp(round_dec(hum / 100.0 * magnus_hpa(temp), 1), 0.0, 100.0);
      const double vis = std::clamp(round_to(20000.0 - 150.0 * (hum - 65.0) - 3000.0 * precip + v[kVis](si), 10.0), 100.0,
                                    100000.0);
      double wdir = std::fmod(v[kWindDir](si), 360.0);
      if (wdir < 0.0) wdir += 360.0;
      wdir = round_dec(wdir, 0);
      if (wdir >= 360.0) wdir = 0.0;
      const double wspd = std::clamp(round_dec(std::abs(v[kWindSpd](si)), 1), 0.0, 30.0);
      complete.set(s, e, F::PressureHpa, pres);
      complete.set(s, e, F::CloudCover, cloud);
      complete.set(s, e, F::HumidityPct, hum);
      complete.set(s, e, F::PrecipitationMm, precip);
      complete.set(s, e, F::SnowDepthCm, snow_cm);
      complete.set(s, e, F::SunshineHr, sun);
      complete.set(s, e, F::TemperatureC, temp);
      complete.set(s, e, F::VaporPressureHpa, vapor);
      complete.set(s, e, F::VisibilityM, vis);
      complete.set(s, e, F::WindDirDeg, wdir);
      complete.set(s, e, F::WindSpeedMs, wspd);
    }
  }

  // noise-free TD from path features built exactly as the ingest pipeline builds them
  const auto spec = GridSpec::around(cfg.tx, cfg.rx, cfg.grid_cell_deg, cfg.grid_padding_deg);
  const auto locations = make_locations(LocationMode::Path, cfg.tx, cfg.rx, cfg.path_points, registry);
  const auto profile = elevation_profile(dem, locations.points);
  const auto omega = recipe_weights(profile, cfg.recipe.elevation_gain);
  std::vector<double> truth(epochs.size(), cfg.recipe.bias_ns);
  const FactorSet rf = cfg.recipe.factors();
  if (!rf.empty()) {
    const auto tensor = build_feature_tensor(spec, registry, complete, epochs, rf, locations);
    for (std::size_t t = 0; t < epochs.size(); ++t) truth[t] = evaluate_recipe(cfg.recipe, tensor.epoch_row(t), omega);
  }

  // blank cells are written to the corpus only; truth uses the complete record
  WeatherSeries weather(S, FactorSet::all());
  for (const auto& e : epochs) {
    for (std::size_t s = 0; s < S; ++s) {
      auto& rec = weather.record(s, e);
      const auto* src = complete.find(s, e);
      for (auto f : all_factors()) {
        const bool blank = unif(rng) < cfg.blank_rate;
        if (!blank) rec[index_of(f)] = (*src)[index_of(f)];
      }
    }
  }

  std::vector<TdSample> samples;
  const std::size_t blocks = 3600 / cfg.block_seconds;
  const double block_sd = cfg.jitter_sd_ns / std::sqrt(static_cast<double>(cfg.block_seconds));
  for (std::size_t t = 0; t < epochs.size(); ++t) {
    const double hour_noise = cfg.noise_sd_ns * normal(rng);
    const bool dropout = unif(rng) < cfg.dropout_rate;
    const std::size_t emitted = dropout ? blocks / 3 : blocks;
    for (std::size_t b = 0; b < emitted; ++b) {
      const double v = round_dec(truth[t] + hour_noise + block_sd * normal(rng), 2);
      samples.push_back({epochs[t].seconds() + std::chrono::seconds(static_cast<long>(b * cfg.block_seconds)), v,
                         static_cast<std::uint32_t>(cfg.block_seconds)});
    }
  }

  return {cfg, std::move(registry), std::move(weather), TdSeries1Hz(std::move(samples)), std::move(dem),
          std::move(epochs), std::move(truth), profile};
}

double ground_truth_td(const SyntheticScenario& s, EpochHour epoch) {
  if (s.epochs.empty() || epoch < s.epochs.front() || s.epochs.back() < epoch) {
    throw Error(ErrorCode::OutOfRange, "epoch " + format_utc(epoch) + " is outside the scenario");
  }
  const auto k = static_cast<std::size_t>(epoch.hours_since_epoch() - s.epochs.front().hours_since_epoch());
  return s.truth_ns.at(k);
}

std::string scenario_meta_json(const SyntheticScenario& s) {
  const auto& c = s.config;
  nlohmann::json linear = nlohmann::json::object();
  for (const auto& [f, a] : c.recipe.linear) linear[std::string(to_string(f))] = a;
  nlohmann::json inter = nlohmann::json::array();
  for (const auto& it : c.recipe.interactions) {
    inter.push_back({std::string(to_string(it.a)), std::string(to_string(it.b)), std::string(to_string(it.c)), it.coef});
  }
  nlohmann::json doc = {
      {"seed", c.seed},
      {"start", format_utc(c.start)},
      {"duration_hours", c.duration_hours},
      {"stations", c.station_count},
      {"tx", {c.tx.lat(), c.tx.lon()}},
      {"rx", {c.rx.lat(), c.rx.lon()}},
      {"path_length_km", haversine_km(c.tx, c.rx)},
      {"path_points", c.path_points},
      {"recipe",
       {{"name", c.recipe.name},
        {"bias_ns", c.recipe.bias_ns},
        {"linear", linear},
        {"interactions", inter},
        {"elevation_gain", c.recipe.elevation_gain}}},
      {"noise_sd_ns", c.noise_sd_ns},
      {"jitter_sd_ns", c.jitter_sd_ns},
      {"block_seconds", c.block_seconds},
      {"dropout_rate", c.dropout_rate},
      {"blank_rate", c.blank_rate},
      {"correlation_km", c.correlation_km},
      {"dem_cell_deg", c.dem_cell_deg},
      {"grid_cell_deg", c.grid_cell_deg},
      {"grid_padding_deg", c.grid_padding_deg},
  };
  return doc.dump(1) + "\n";
}

namespace {

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorCode::ConfigError, "cannot write " + p.string());
  out << text;
  if (!out) throw Error(ErrorCode::ConfigError, "failed writing " + p.string());
}

}  // namespace

void write_corpus(const SyntheticScenario& s, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::ConfigError, "cannot create corpus directory " + dir.string() + ": " + ec.message());
  write_text(dir / "stations.csv", serialize_station_registry(s.registry));
  write_text(dir / "weather.csv", serialize_weather(s.weather, s.registry));
  write_text(dir / "td.csv", serialize_td(s.td));
  write_text(dir / "dem.asc", serialize_dem(s.dem));
  write_text(dir / "scenario.meta", scenario_meta_json(s));
}

// ---------------------------------------------------------------------------

std::vector<double> ols_oracle(const Eigen::MatrixXd& x, std::span<const double> y) {
  const auto n = static_cast<std::size_t>(x.rows()), p = static_cast<std::size_t>(x.cols());
  if (y.size() != n) throw Error(ErrorCode::LengthMismatch, "X rows and y differ");
  std::vector<std::vector<double>> a(p, std::vector<double>(p, 0.0));
  std::vector<double> b(p, 0.0);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < n; ++r) s += x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) *
                                             x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j));
      a[i][j] = s;
    }
    double s = 0.0;
    for (std::size_t r = 0; r < n; ++r) s += x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) * y[r];
    b[i] = s;
  }
  double max_diag = 0.0;
  for (std::size_t i = 0; i < p; ++i) max_diag = std::max(max_diag, a[i][i]);
  std::vector<std::vector<double>> l(p, std::vector<double>(p, 0.0));
  for (std::size_t j = 0; j < p; ++j) {
    double d = a[j][j];
    for (std::size_t k = 0; k < j; ++k) d -= l[j][k] * l[j][k];
    if (!(d > 1e-10 * max_diag)) throw Error(ErrorCode::RankDeficient, "X'X is not positive definite");
    l[j][j] = std::sqrt(d);
    for (std::size_t i = j + 1; i < p; ++i) {
      double s = a[i][j];
      for (std::size_t k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
      l[i][j] = s / l[j][j];
    }
  }
  std::vector<double> z(p), w(p);
  for (std::size_t i = 0; i < p; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l[i][k] * z[k];
    z[i] = s / l[i][i];
  }
  for (std::size_t i = p; i-- > 0;) {
    double s = z[i];
    for (std::size_t k = i + 1; k < p; ++k) s -= l[k][i] * w[k];
    w[i] = s / l[i][i];
  }
  return w;
}

double kernel_oracle(std::span<const double> query, const Eigen::MatrixXd& bank, std::span<const double> y,
                     std::span<const double> sigmas) {
  double num = 0.0, den = 0.0;
  for (Eigen::Index t = 0; t < bank.cols(); ++t) {
    double e = 0.0;
    for (Eigen::Index i = 0; i < bank.rows(); ++i) {
      const double d = query[static_cast<std::size_t>(i)] - bank(i, t);
      e += d * d / (2.0 * sigmas[static_cast<std::size_t>(i)] * sigmas[static_cast<std::size_t>(i)]);
    }
    const double k = std::exp(-e);
    num += y[static_cast<std::size_t>(t)] * k;
    den += k;
  }
  return num / den;
}

}  // namespace eltd::synth
