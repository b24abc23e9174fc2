#include "config.hpp"

#include <charconv>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "eltd/csv.hpp"
#include "eltd/error.hpp"

namespace eltd::cli {

namespace {

namespace pt = boost::property_tree;

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw Error(ErrorCode::ConfigError, key + ": " + why);
}

std::string trim(std::string s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

double as_double(const std::string& key, const std::string& v) {
  try {
    return parse_double(v);
  } catch (const Error&) {
    bad(key, "expected a number, got '" + v + "'");
  }
}

double as_positive(const std::string& key, const std::string& v) {
  const double d = as_double(key, v);
  if (!(d > 0.0)) bad(key, "must be positive");
  return d;
}

std::uint64_t as_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || p != end) bad(key, "expected a non-negative integer, got '" + v + "'");
  return out;
}

std::size_t as_count(const std::string& key, const std::string& v) {
  const auto n = as_u64(key, v);
  if (n == 0) bad(key, "must be at least 1");
  return static_cast<std::size_t>(n);
}

bool as_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad(key, "expected true/false, got '" + v + "'");
}

// Library parsers throw their own codes; re-label them as configuration errors.
template <class F>
auto relabel(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    bad(key, e.what());
  }
}

struct Pending {
  std::optional<double> tx_lat, tx_lon, rx_lat, rx_lon;
};

using Setter = std::function<void(RunConfig&, Pending&, const std::string& key, const std::string& v)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> m;
    m["run.seed"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) { c.seed = as_u64(k, v); };
    m["run.out"] = [](RunConfig& c, Pending&, const std::string&, const std::string& v) { c.out = v; };
    m["corpus.dir"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) {
      if (!std::filesystem::is_directory(v)) bad(k, "directory '" + v + "' does not exist");
      c.corpus = v;
    };
    m["path.tx_lat"] = [](RunConfig&, Pending& p, const std::string& k, const std::string& v) { p.tx_lat = as_double(k, v); };
    m["path.tx_lon"] = [](RunConfig&, Pending& p, const std::string& k, const std::string& v) { p.tx_lon = as_double(k, v); };
    m["path.rx_lat"] = [](RunConfig&, Pending& p, const std::string& k, const std::string& v) { p.rx_lat = as_double(k, v); };
    m["path.rx_lon"] = [](RunConfig&, Pending& p, const std::string& k, const std::string& v) { p.rx_lon = as_double(k, v); };
    m["grid.cell_deg"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) { c.cell_deg = as_positive(k, v); };
    m["grid.padding_deg"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) {
      c.padding_deg = as_double(k, v);
      if (c.padding_deg < 0.0) bad(k, "must be non-negative");
    };
    m["ingest.min_samples"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) { c.min_samples = as_count(k, v); };
    m["features.factors"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) {
      c.factors = v;
      relabel(k, [&] { return c.factor_set(); });
    };
    m["features.locations"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) {
      c.mode = relabel(k, [&] { return parse_location_mode(v); });
    };
    m["features.l"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) { c.locations = as_count(k, v); };
    m["split.train"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) {
      c.train_ranges = parse_ranges(k, v, &c.train_range_text);
    };
    m["split.test"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) {
      c.test_ranges = parse_ranges(k, v, &c.test_range_text);
    };
    m["model.name"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) {
      if (!known_model(v)) bad(k, "unknown model '" + v + "'");
      c.model = v;
    };

    m["lasso_mpr.degree"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) { c.lasso.degree = as_count(k, v); };
    m["lasso_mpr.alpha"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) {
      c.lasso.alpha = as_double(k, v);
      if (c.lasso.alpha < 0.0) bad(k, "must be non-negative");
    };
    m["lasso_mpr.tolerance"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) { c.lasso.tolerance = as_positive(k, v); };
    m["lasso_mpr.max_sweeps"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) { c.lasso.max_sweeps = as_count(k, v); };
    m["lasso_mpr.layout"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) {
      c.lasso.layout = relabel(k, [&] { return parse_feature_layout(v); });
    };

    m["wlr_agrnn.learning_rate"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) { c.wlr.learning_rate = as_positive(k, v); };
    m["wlr_agrnn.max_iterations"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) { c.wlr.max_iterations = as_count(k, v); };
    m["wlr_agrnn.tolerance"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) { c.wlr.tolerance = as_double(k, v); };
    m["wlr_agrnn.hidden"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) { c.wlr.hidden = as_count(k, v); };
    m["wlr_agrnn.elevation_transform"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) {
      c.wlr.elevation.kind = relabel(k, [&] { return wlr_agrnn::parse_elevation_transform(v); });
    };
    m["wlr_agrnn.elevation_floor_m"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) { c.wlr.elevation.floor_m = as_positive(k, v); };
    m["wlr_agrnn.weights"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) {
      c.wlr.weights = relabel(k, [&] { return wlr_agrnn::parse_weight_scheme(v); });
    };
    m["wlr_agrnn.weight_epsilon_ns"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) { c.wlr.weight_epsilon_ns = as_positive(k, v); };
    m["wlr_agrnn.weight_refresh"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) { c.wlr.weight_refresh = as_count(k, v); };
    m["wlr_agrnn.loo_exclusion_hours"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) {
      c.wlr.loo_exclusion_hours = static_cast<std::int64_t>(as_u64(k, v));
    };

    m["bpnn.hidden"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) { c.bpnn.hidden = as_count(k, v); };
    m["bpnn.learning_rate"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) { c.bpnn.learning_rate = as_positive(k, v); };
    m["bpnn.max_iterations"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) { c.bpnn.max_iterations = as_count(k, v); };
    m["bpnn.tolerance"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) { c.bpnn.tolerance = as_double(k, v); };
    m["bpnn.layout"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) {
      c.bpnn.layout = relabel(k, [&] { return parse_feature_layout(v); });
    };

    m["grnn.sigma"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) { c.grnn.sigma = as_double(k, v); };
    m["grnn.layout"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) {
      c.grnn.layout = relabel(k, [&] { return parse_feature_layout(v); });
    };
    m["grnn.loo_exclusion_hours"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) {
      c.grnn.loo_exclusion_hours = static_cast<std::int64_t>(as_u64(k, v));
    };

    m["moe.experts"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) { c.moe.experts = as_count(k, v); };
    m["moe.hidden"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) { c.moe.hidden = as_count(k, v); };
    m["moe.temperature"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) { c.moe.temperature = as_positive(k, v); };
    m["moe.learning_rate"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) { c.moe.learning_rate = as_positive(k, v); };
    m["moe.max_iterations"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) { c.moe.max_iterations = as_count(k, v); };
    m["moe.tolerance"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) { c.moe.tolerance = as_double(k, v); };

    m["synth.recipe"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) {
      c.synth.recipe = relabel(k, [&] { return synth::recipe_by_name(v); });
    };
    m["synth.start"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) {
      c.synth.start = relabel(k, [&] { return EpochHour::exact(parse_utc(v)); });
    };
    m["synth.duration_hours"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) { c.synth.duration_hours = as_count(k, v); };
    m["synth.stations"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) { c.synth.station_count = as_count(k, v); };
    m["synth.path_points"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) { c.synth.path_points = as_count(k, v); };
    m["synth.noise_sd_ns"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) {
      c.synth.noise_sd_ns = as_double(k, v);
      if (c.synth.noise_sd_ns < 0.0) bad(k, "must be non-negative");
    };
    m["synth.jitter_sd_ns"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) {
      c.synth.jitter_sd_ns = as_double(k, v);
      if (c.synth.jitter_sd_ns < 0.0) bad(k, "must be non-negative");
    };
    m["synth.block_seconds"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) { c.synth.block_seconds = as_count(k, v); };
    m["synth.dropout_rate"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) {
      c.synth.dropout_rate = as_double(k, v);
      if (!(c.synth.dropout_rate >= 0.0 && c.synth.dropout_rate < 1.0)) bad(k, "must lie in [0, 1)");
    };
    m["synth.blank_rate"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) {
      c.synth.blank_rate = as_double(k, v);
      if (!(c.synth.blank_rate >= 0.0 && c.synth.blank_rate < 1.0)) bad(k, "must lie in [0, 1)");
    };
    m["synth.correlation_km"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) { c.synth.correlation_km = as_positive(k, v); };
    m["synth.dem_cell_deg"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) { c.synth.dem_cell_deg = as_positive(k, v); };

    m["correlate.r_min"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) { c.r_min = as_double(k, v); };
    m["correlate.p_max"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) { c.p_max = as_double(k, v); };

    m["sweep.kind"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) {
      if (v == "alpha") c.sweep.kind = SweepKind::Alpha;
      else if (v == "degree") c.sweep.kind = SweepKind::Degree;
      else bad(k, "expected alpha or degree, got '" + v + "'");
    };
    m["sweep.alphas"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) {
      c.sweep.alphas.clear();
      for (const auto& s : split_list(v, ',')) {
        c.sweep.alphas.push_back(as_double(k, s));
        if (c.sweep.alphas.back() < 0.0) bad(k, "alphas must be non-negative");
      }
      if (c.sweep.alphas.empty()) bad(k, "empty list");
    };
    m["sweep.degrees"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) {
      c.sweep.degrees.clear();
      for (const auto& s : split_list(v, ',')) c.sweep.degrees.push_back(as_count(k, s));
      if (c.sweep.degrees.empty()) bad(k, "empty list");
    };
    m["sweep.validation_fraction"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) {
      c.sweep.validation_fraction = as_double(k, v);
      if (!(c.sweep.validation_fraction > 0.0 && c.sweep.validation_fraction < 1.0)) bad(k, "must lie in (0, 1)");
    };
    m["sweep.svg"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v) { c.sweep.svg = as_bool(k, v); };
    return m;
  }();
  return table;
}

RunConfig defaults() {
  RunConfig c;
  c.train_ranges = parse_ranges("split.train", kDefaultTrainRanges, &c.train_range_text);
  c.test_ranges = parse_ranges("split.test", kDefaultTestRanges, &c.test_range_text);
  return c;
}

std::optional<GeoPoint> endpoint(const std::string& name, const std::optional<double>& lat,
                                 const std::optional<double>& lon) {
  if (!lat && !lon) return std::nullopt;
  if (!lat || !lon) bad("path." + name, "latitude and longitude must be given together");
  return relabel("path." + name, [&] { return GeoPoint(*lat, *lon); });
}

RunConfig from_tree(const pt::ptree& tree) {
  RunConfig c = defaults();
  Pending pending;
  for (const auto& [section, body] : tree) {
    if (body.empty()) bad(section, "keys must live inside a [section]");
    for (const auto& [key, node] : body) {
      const std::string full = section + "." + key;
      const auto it = setters().find(full);
      if (it == setters().end()) bad(full, "unknown key");
      it->second(c, pending, full, trim(node.get_value<std::string>()));
    }
  }
  c.tx = endpoint("tx", pending.tx_lat, pending.tx_lon);
  c.rx = endpoint("rx", pending.rx_lat, pending.rx_lon);
  for (const auto& a : c.train_ranges) {
    for (const auto& b : c.test_ranges) {
      if (a.overlaps(b)) bad("split", "train and test ranges overlap");
    }
  }
  c.apply_seed(c.seed);
  return c;
}

}  // namespace

FactorSet RunConfig::factor_set() const {
  if (factors == "3" || factors == "5" || factors == "7") return preset_factor_set(factors);
  return FactorSet::parse(factors);
}

void RunConfig::apply_seed(std::uint64_t s) {
  seed = s;
  synth.seed = s;
  wlr.seed = s;
  bpnn.seed = s;
  moe.seed = s;
}

bool known_model(const std::string& name) noexcept {
  return name == "lasso_mpr" || name == "wlr_agrnn" || name == "bpnn" || name == "grnn" || name == "moe";
}

std::vector<EpochRange> parse_ranges(const std::string& key, const std::string& text, std::vector<std::string>* raw) {
  std::vector<EpochRange> out;
  if (raw) raw->clear();
  for (const auto& part : split_list(text, ';')) {
    out.push_back(relabel(key, [&] { return parse_epoch_range(part); }));
    if (raw) raw->push_back(part);
  }
  if (out.empty()) bad(key, "no date range given");
  return out;
}

RunConfig parse_config_text(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::ConfigError, std::string("config: ") + e.what());
  }
  return from_tree(tree);
}

RunConfig load_config(const std::optional<std::filesystem::path>& path) {
  if (!path) return from_tree({});
  if (!std::filesystem::is_regular_file(*path)) bad("--config", "file '" + path->string() + "' does not exist");
  std::string text;
  try {
    text = csv::read_file(*path);
  } catch (const Error& e) {
    bad("--config", e.what());
  }
  return parse_config_text(text);
}

}  // namespace eltd::cli
