#include <doctest.h>

#include <vector>

#include "eltd/ingest.hpp"
#include "support.hpp"

using namespace eltd;
using eltd_test::code_of;

namespace {

const char* kStations =
    "station_id,lat,lon\n"
    "A,36.0,127.0\n"
    "B,36.1,127.1\n";

SysSeconds at(const char* s) { return parse_utc(s); }

}  // namespace

TEST_CASE("station registry") {
  std::string ten = "station_id,lat,lon\n";
  for (int i = 0; i < 10; ++i) ten += "S" + std::to_string(i) + ",36." + std::to_string(i) + ",127.5\n";
  CHECK(parse_station_registry_text(ten).size() == 10);
  CHECK(code_of([] { parse_station_registry_text("station_id,lat,lon\n"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_station_registry_text("station_id,lat,lon\nA,1,1\nA,2,2\n"); }) ==
        ErrorCode::DuplicateStation);
  const auto reg = parse_station_registry_text(kStations);
  CHECK(parse_station_registry_text(serialize_station_registry(reg)).entries().size() == 2);
  CHECK(reg.find("B") == 1u);
}

TEST_CASE("weather parsing") {
  const auto reg = parse_station_registry_text(kStations);
  const auto w = parse_weather_text(
      "station_id,timestamp,humidity_pct,cloud_cover_unitless\n"
      "A,2023-10-01T00:00:00Z,55,10\n"
      "B,2023-10-01T00:00:00Z,,3\n",
      reg);
  const auto e = EpochHour::exact(at("2023-10-01"));
  CHECK(w.get(0, e, MetFactor::HumidityPct) == 55.0);
  CHECK(w.get(0, e, MetFactor::CloudCover) == 10.0);
  CHECK_FALSE(w.get(1, e, MetFactor::HumidityPct).has_value());
  CHECK(parse_weather_text(serialize_weather(w, reg), reg) == w);

  CHECK(code_of([&] {
          parse_weather_text("station_id,timestamp,humidity_pct\nZ,2023-10-01T00:00:00Z,55\n", reg);
        }) == ErrorCode::UnknownStation);
  CHECK(code_of([&] {
          parse_weather_text("station_id,timestamp,cloud_cover_unitless\nA,2023-10-01T00:00:00Z,11\n", reg);
        }) == ErrorCode::OutOfRange);
}

TEST_CASE("hourly aggregation") {
  const auto t0 = at("2023-10-01T03:00:00Z");
  std::vector<TdSample> flat, ramp;
  for (int s = 0; s < 3600; ++s) {
    flat.push_back({t0 + std::chrono::seconds(s), 100.0});
    ramp.push_back({t0 + std::chrono::seconds(s), static_cast<double>(s)});
  }
  const auto a = aggregate_hourly(TdSeries1Hz(flat));
  REQUIRE(a.size() == 1);
  CHECK(a[0] == HourlyTd{EpochHour::exact(t0), 100.0, 3600});
  const auto b = aggregate_hourly(TdSeries1Hz(ramp));
  REQUIRE(b.size() == 1);
  CHECK(b[0].mean_ns == doctest::Approx(1799.5).epsilon(1e-15));

  std::vector<TdSample> sparse(flat.begin(), flat.begin() + 10);
  CHECK(aggregate_hourly(TdSeries1Hz(sparse), 1800).empty());

  // block rows count as their sample total
  const auto blocks = aggregate_hourly(TdSeries1Hz({{t0, 10.0, 1800}, {t0 + std::chrono::seconds(1800), 20.0, 1800}}));
  REQUIRE(blocks.size() == 1);
  CHECK(blocks[0].mean_ns == 15.0);
  CHECK(blocks[0].sample_count == 3600);

  CHECK(code_of([&] { TdSeries1Hz({{t0, 1.0}, {t0, 2.0}}); }) == ErrorCode::ParseError);
  CHECK(parse_hourly_text(serialize_hourly(b)) == b);
}

TEST_CASE("epoch alignment") {
  const auto reg = parse_station_registry_text(kStations);
  WeatherSeries w(2, FactorSet({MetFactor::HumidityPct, MetFactor::TemperatureC}));
  HourlyTdSeries td;
  const auto start = EpochHour::exact(at("2023-10-01"));
  for (int h = 0; h < 48; ++h) {
    const EpochHour e(start.time() + std::chrono::hours(h));
    for (std::size_t s = 0; s < 2; ++s) {
      w.set(s, e, MetFactor::TemperatureC, 10.0 + h);
      if (!(s == 1 && h == 30)) w.set(s, e, MetFactor::HumidityPct, 50.0);
    }
    if (h >= 24) td.push_back({e, 1.0 * h, 3600});
  }
  const auto hum = align_epochs(w, td, FactorSet({MetFactor::HumidityPct}), {0, 1});
  CHECK(hum.size() == 23);  // second day minus the hour missing humidity
  const auto temp = align_epochs(w, td, FactorSet({MetFactor::TemperatureC}), {0, 1});
  CHECK(temp.size() == 24);
  CHECK(temp.value(0, 1, 0) == 34.0);

  HourlyTdSeries later{{EpochHour(start.time() + std::chrono::hours(1000)), 1.0, 3600}};
  CHECK(code_of([&] { align_epochs(w, later, FactorSet({MetFactor::TemperatureC}), {0, 1}); }) ==
        ErrorCode::EmptyIntersection);
}

TEST_CASE("dem parsing") {
  const char* two =
      "ncols 2\nnrows 2\nxllcorner 127\nyllcorner 36\ncellsize 0.5\nNODATA_value -9999\n"
      "1 2\n3 -9999\n";
  const auto dem = parse_dem_text(two);
  CHECK(dem.values().size() == 4);
  CHECK(dem.at(0, 1) == 2.0);
  CHECK_FALSE(dem.at(1, 1).has_value());
  CHECK(parse_dem_text(serialize_dem(dem)) == dem);
  CHECK(code_of([] {
          parse_dem_text("ncols 3\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2\n");
        }) == ErrorCode::InconsistentDimensions);
}
