#include "eltd/core_types.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace eltd {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DuplicateStation: return "DuplicateStation";
    case ErrorCode::UnknownStation: return "UnknownStation";
    case ErrorCode::EmptyIntersection: return "EmptyIntersection";
    case ErrorCode::InconsistentDimensions: return "InconsistentDimensions";
    case ErrorCode::NoObservations: return "NoObservations";
    case ErrorCode::DegeneratePath: return "DegeneratePath";
    case ErrorCode::OutOfExtent: return "OutOfExtent";
    case ErrorCode::NoElevationData: return "NoElevationData";
    case ErrorCode::MissingMap: return "MissingMap";
    case ErrorCode::ConstantSeries: return "ConstantSeries";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::Empty: return "Empty";
    case ErrorCode::InsufficientGroups: return "InsufficientGroups";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ConstantColumn: return "ConstantColumn";
    case ErrorCode::DegenerateDesign: return "DegenerateDesign";
    case ErrorCode::DegenerateBank: return "DegenerateBank";
    case ErrorCode::EmptyBank: return "EmptyBank";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::AxisMismatch: return "AxisMismatch";
    case ErrorCode::SchemaError: return "SchemaError";
  }
  return "Unknown";
}

ErrorKind kind_of(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ConfigError:
      return ErrorKind::Config;
    case ErrorCode::NonFiniteLoss:
      return ErrorKind::Numeric;
    case ErrorCode::AxisMismatch:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::SchemaError:
      return ErrorKind::Compatibility;
    case ErrorCode::InvalidArgument:
      return ErrorKind::Usage;
    default:
      return ErrorKind::Data;
  }
}

// ---------------------------------------------------------------------------

GeoPoint::GeoPoint(double lat_deg, double lon_deg) : lat_(lat_deg), lon_(lon_deg) {
  if (!(lat_deg >= -90.0 && lat_deg <= 90.0) || !(lon_deg >= -180.0 && lon_deg <= 180.0)) {
    throw Error(ErrorCode::OutOfRange,
                "geographic coordinate out of bounds (" + format_double(lat_deg) + ", " + format_double(lon_deg) + ")");
  }
}

double haversine_km(const GeoPoint& a, const GeoPoint& b) noexcept {
  constexpr double deg = std::numbers::pi / 180.0;
  const double dlat = (b.lat() - a.lat()) * deg;
  const double dlon = (b.lon() - a.lon()) * deg;
  const double s1 = std::sin(dlat / 2.0);
  const double s2 = std::sin(dlon / 2.0);
  double h = s1 * s1 + std::cos(a.lat() * deg) * std::cos(b.lat() * deg) * s2 * s2;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

// ---------------------------------------------------------------------------

EpochHour EpochHour::containing(SysSeconds s) noexcept {
  return EpochHour(std::chrono::floor<std::chrono::hours>(s));
}

EpochHour EpochHour::exact(SysSeconds s) {
  auto e = containing(s);
  if (e.seconds() != s) {
    throw Error(ErrorCode::InvalidArgument, "timestamp " + format_utc(s) + " is not on a whole hour");
  }
  return e;
}

namespace {

int parse_int(std::string_view text, std::size_t pos, std::size_t len, std::string_view whole) {
  int v = 0;
  if (pos + len > text.size()) {
    throw Error(ErrorCode::ParseError, "malformed timestamp '" + std::string(whole) + "'");
  }
  auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, v);
  if (ec != std::errc{} || ptr != text.data() + pos + len) {
    throw Error(ErrorCode::ParseError, "malformed timestamp '" + std::string(whole) + "'");
  }
  return v;
}

}  // namespace

SysSeconds parse_utc(std::string_view text) {
  using namespace std::chrono;
  std::string_view s = text;
  if (!s.empty() && (s.back() == 'Z' || s.back() == 'z')) s.remove_suffix(1);
  if (s.size() != 10 && s.size() != 19) {
    throw Error(ErrorCode::ParseError, "malformed timestamp '" + std::string(text) + "'");
  }
  if (s[4] != '-' || s[7] != '-') throw Error(ErrorCode::ParseError, "malformed timestamp '" + std::string(text) + "'");
  const int y = parse_int(s, 0, 4, text);
  const int mo = parse_int(s, 5, 2, text);
  const int d = parse_int(s, 8, 2, text);
  int hh = 0, mm = 0, ss = 0;
  if (s.size() == 19) {
    if ((s[10] != 'T' && s[10] != ' ') || s[13] != ':' || s[16] != ':') {
      throw Error(ErrorCode::ParseError, "malformed timestamp '" + std::string(text) + "'");
    }
    hh = parse_int(s, 11, 2, text);
    mm = parse_int(s, 14, 2, text);
    ss = parse_int(s, 17, 2, text);
  }
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 59) {
    throw Error(ErrorCode::ParseError, "invalid calendar timestamp '" + std::string(text) + "'");
  }
  return sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss};
}

std::string format_utc(SysSeconds t) {
  using namespace std::chrono;
  const auto day_start = floor<days>(t);
  const year_month_day ymd{day_start};
  const hh_mm_ss hms{t - day_start};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

EpochRange parse_epoch_range(std::string_view text) {
  const auto sep = text.find("..");
  if (sep == std::string_view::npos) {
    throw Error(ErrorCode::ParseError, "epoch range '" + std::string(text) + "' must look like start..end");
  }
  auto trim = [](std::string_view v) {
    while (!v.empty() && v.front() == ' ') v.remove_prefix(1);
    while (!v.empty() && v.back() == ' ') v.remove_suffix(1);
    return v;
  };
  const auto lo = trim(text.substr(0, sep));
  const auto hi = trim(text.substr(sep + 2));
  EpochRange r{EpochHour::containing(parse_utc(lo)), EpochHour::containing(parse_utc(hi))};
  if (hi.size() == 10) r.last = EpochHour(r.last.time() + std::chrono::hours{23});
  if (r.last < r.first) throw Error(ErrorCode::ParseError, "epoch range '" + std::string(text) + "' is reversed");
  return r;
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::array<FactorInfo, kFactorCount> kFactorTable{{
    {MetFactor::PressureHpa, "pressure_hpa", "hPa", 800.0, 1100.0, false},
    {MetFactor::CloudCover, "cloud_cover_unitless", "-", 0.0, 10.0, true},
    {MetFactor::HumidityPct, "humidity_pct", "%", 0.0, 100.0, false},
    {MetFactor::PrecipitationMm, "precipitation_mm", "mm", 0.0, 500.0, false},
    {MetFactor::SnowDepthCm, "snow_depth_cm", "cm", 0.0, 1000.0, false},
    {MetFactor::SunshineHr, "sunshine_hr", "hr", 0.0, 1.0, false},
    {MetFactor::TemperatureC, "temperature_c", "degC", -60.0, 60.0, false},
    {MetFactor::VaporPressureHpa, "vapor_pressure_hpa", "hPa", 0.0, 100.0, false},
    {MetFactor::VisibilityM, "visibility_m", "m", 0.0, 100000.0, false},
    {MetFactor::WindDirDeg, "wind_dir_deg", "deg", 0.0, 360.0, false},
    {MetFactor::WindSpeedMs, "wind_speed_ms", "m/s", 0.0, 100.0, false},
}};

constexpr std::array<MetFactor, kFactorCount> kAllFactors{
    MetFactor::PressureHpa,   MetFactor::CloudCover,       MetFactor::HumidityPct, MetFactor::PrecipitationMm,
    MetFactor::SnowDepthCm,   MetFactor::SunshineHr,       MetFactor::TemperatureC, MetFactor::VaporPressureHpa,
    MetFactor::VisibilityM,   MetFactor::WindDirDeg,       MetFactor::WindSpeedMs};

}  // namespace

const FactorInfo& info(MetFactor f) noexcept { return kFactorTable[index_of(f)]; }
const std::array<MetFactor, kFactorCount>& all_factors() noexcept { return kAllFactors; }
std::string_view to_string(MetFactor f) noexcept { return info(f).name; }

std::optional<MetFactor> parse_factor(std::string_view name) noexcept {
  for (const auto& fi : kFactorTable) {
    if (fi.name == name) return fi.factor;
  }
  return std::nullopt;
}

double validate_factor_value(MetFactor f, double v) {
  const auto& fi = info(f);
  const bool ok = std::isfinite(v) && v >= fi.min && v <= fi.max && (!fi.integer || std::floor(v) == v);
  if (!ok) {
    throw Error(ErrorCode::OutOfRange, std::string(fi.name) + " value " + format_double(v) + " outside [" +
                                           format_double(fi.min) + ", " + format_double(fi.max) + "]" +
                                           (fi.integer ? " (integer)" : ""));
  }
  return v;
}

FactorSet::FactorSet(std::vector<MetFactor> factors) : factors_(std::move(factors)) {
  std::sort(factors_.begin(), factors_.end());
  if (std::adjacent_find(factors_.begin(), factors_.end()) != factors_.end()) {
    throw Error(ErrorCode::InvalidArgument, "duplicate factor in factor set");
  }
}

FactorSet FactorSet::all() { return FactorSet({kAllFactors.begin(), kAllFactors.end()}); }

FactorSet FactorSet::parse(std::string_view csv) {
  std::vector<MetFactor> out;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    auto next = csv.find(',', pos);
    if (next == std::string_view::npos) next = csv.size();
    auto tok = csv.substr(pos, next - pos);
    while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
    while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
    if (!tok.empty()) {
      auto f = parse_factor(tok);
      if (!f) throw Error(ErrorCode::ParseError, "unknown meteorological factor '" + std::string(tok) + "'");
      out.push_back(*f);
    }
    pos = next + 1;
  }
  if (out.empty()) throw Error(ErrorCode::ParseError, "empty factor list");
  return FactorSet(std::move(out));
}

bool FactorSet::contains(MetFactor f) const noexcept {
  return std::binary_search(factors_.begin(), factors_.end(), f);
}

std::string FactorSet::to_string() const {
  std::string s;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (i) s += ',';
    s += eltd::to_string(factors_[i]);
  }
  return s;
}

FactorSet preset_factor_set(std::string_view name) {
  using F = MetFactor;
  if (name == "3") return FactorSet({F::TemperatureC, F::HumidityPct, F::PressureHpa});
  if (name == "5") return FactorSet({F::TemperatureC, F::HumidityPct, F::VaporPressureHpa, F::VisibilityM, F::WindSpeedMs});
  if (name == "7") {
    return FactorSet({F::PressureHpa, F::CloudCover, F::HumidityPct, F::TemperatureC, F::VaporPressureHpa,
                      F::VisibilityM, F::WindSpeedMs});
  }
  if (name == "all" || name == "11") return FactorSet::all();
  throw Error(ErrorCode::ConfigError, "unknown factor preset '" + std::string(name) + "' (expected 3, 5, 7 or all)");
}

TdNanoseconds::TdNanoseconds(double ns) : ns_(ns) {
  if (!std::isfinite(ns) || std::abs(ns) >= 1e9) {
    throw Error(ErrorCode::OutOfRange, "TD value " + format_double(ns) + " ns is not a plausible PPS offset");
  }
}

// ---------------------------------------------------------------------------

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::ParseError, "not a number: '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace eltd
