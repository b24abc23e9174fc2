#include "pipeline.hpp"

#include <json.hpp>

#include "eltd/csv.hpp"
#include "eltd/error.hpp"

namespace eltd::cli {

namespace {

std::optional<std::pair<GeoPoint, GeoPoint>> meta_endpoints(const std::filesystem::path& dir) {
  const auto path = dir / "scenario.meta";
  if (!std::filesystem::is_regular_file(path)) return std::nullopt;
  const auto doc = nlohmann::json::parse(csv::read_file(path), nullptr, false);
  if (doc.is_discarded() || !doc.contains("tx") || !doc.contains("rx")) {
    throw Error(ErrorCode::ParseError, "scenario.meta: missing tx/rx");
  }
  try {
    return std::pair{GeoPoint(doc["tx"].at(0).get<double>(), doc["tx"].at(1).get<double>()),
                     GeoPoint(doc["rx"].at(0).get<double>(), doc["rx"].at(1).get<double>())};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("scenario.meta: ") + e.what());
  }
}

}  // namespace

Corpus load_corpus(const RunConfig& cfg) {
  if (cfg.corpus.empty()) throw Error(ErrorCode::ConfigError, "corpus.dir: no corpus directory configured");
  if (!std::filesystem::is_directory(cfg.corpus)) {
    throw Error(ErrorCode::ConfigError, "corpus.dir: directory '" + cfg.corpus.string() + "' does not exist");
  }
  const auto& dir = cfg.corpus;
  auto registry = parse_station_registry(dir / "stations.csv");
  auto weather = parse_weather_csv(dir / "weather.csv", registry);
  auto td = parse_td_csv(dir / "td.csv");
  auto dem = parse_dem(dir / "dem.asc");
  std::optional<GeoPoint> tx = cfg.tx, rx = cfg.rx;
  if (!tx || !rx) {
    const auto meta = meta_endpoints(dir);
    if (!meta) throw Error(ErrorCode::ConfigError, "path: tx/rx not configured and corpus has no scenario.meta");
    if (!tx) tx = meta->first;
    if (!rx) rx = meta->second;
  }
  return {dir, std::move(registry), std::move(weather), std::move(td), std::move(dem), *tx, *rx};
}

FeatureAxes config_axes(const RunConfig& cfg) { return {cfg.factor_set(), cfg.mode, cfg.locations}; }

Prepared prepare(const Corpus& corpus, const RunConfig& cfg, const FeatureAxes& axes) {
  auto spec = GridSpec::around(corpus.tx, corpus.rx, cfg.cell_deg, cfg.padding_deg);
  auto locations = make_locations(axes.mode, corpus.tx, corpus.rx, axes.locations, corpus.registry);
  auto profile = elevation_profile(corpus.dem, locations.points);
  auto hourly = aggregate_hourly(corpus.td, cfg.min_samples);
  std::vector<std::size_t> stations(corpus.registry.size());
  for (std::size_t i = 0; i < stations.size(); ++i) stations[i] = i;
  const auto aligned = align_epochs(corpus.weather, hourly, axes.factors, stations);
  auto tensor = build_feature_tensor(spec, corpus.registry, corpus.weather, aligned.epochs, axes.factors, locations);
  auto data = join_target(tensor, hourly);
  return {std::move(spec), std::move(locations), std::move(profile), std::move(hourly), std::move(data)};
}

TrainingData select_ranges(const TrainingData& data, const std::vector<EpochRange>& ranges) {
  return data.select(indices_in_ranges(data.x.epochs, ranges));
}

std::vector<EpochHour> complete_weather_epochs(const WeatherSeries& weather, const FactorSet& factors,
                                               const std::vector<EpochRange>& ranges) {
  std::vector<EpochHour> out;
  for (const auto& [epoch, records] : weather.by_epoch()) {
    bool wanted = false;
    for (const auto& r : ranges) wanted = wanted || r.contains(epoch);
    if (!wanted) continue;
    bool complete = records.size() == weather.station_count();
    for (const auto& rec : records) {
      if (!complete) break;
      if (!rec) {
        complete = false;
        break;
      }
      for (auto f : factors) complete = complete && (*rec)[static_cast<std::size_t>(f)].has_value();
    }
    if (complete) out.push_back(epoch);
  }
  return out;
}

}  // namespace eltd::cli
