#include <doctest.h>

#include <cmath>
#include <numbers>

#include "eltd/core_types.hpp"
#include "eltd/synth.hpp"
#include "support.hpp"

using namespace eltd;
using eltd_test::code_of;

TEST_CASE("haversine") {
  const GeoPoint a(36.0, 127.0);
  CHECK(haversine_km(a, a) == 0.0);
  const double half = haversine_km(GeoPoint(0, 0), GeoPoint(0, 180));
  CHECK(half == doctest::Approx(std::numbers::pi * kEarthRadiusKm).epsilon(1e-12));
  CHECK(std::abs(half - 20015.115) < 0.01);
  CHECK(std::abs(haversine_km(synth::kTx, synth::kRx) - 179.28) < 1.0);
}

TEST_CASE("geo point bounds") {
  CHECK(code_of([] { GeoPoint(91, 0); }) == ErrorCode::OutOfRange);
  CHECK(code_of([] { GeoPoint(0, std::nan("")); }) == ErrorCode::OutOfRange);
}

TEST_CASE("factor validation") {
  CHECK(validate_factor_value(MetFactor::HumidityPct, 55.0) == 55.0);
  CHECK(validate_factor_value(MetFactor::CloudCover, 10) == 10);
  CHECK(code_of([] { validate_factor_value(MetFactor::CloudCover, 11); }) == ErrorCode::OutOfRange);
  CHECK(code_of([] { validate_factor_value(MetFactor::CloudCover, 2.5); }) == ErrorCode::OutOfRange);
  CHECK(code_of([] { validate_factor_value(MetFactor::TemperatureC, std::nan("")); }) == ErrorCode::OutOfRange);
  CHECK(all_factors().size() == 11);
  for (auto f : all_factors()) CHECK(parse_factor(to_string(f)) == f);
}

TEST_CASE("factor sets are canonical") {
  FactorSet s({MetFactor::WindSpeedMs, MetFactor::PressureHpa});
  CHECK(s[0] == MetFactor::PressureHpa);
  CHECK(code_of([] { FactorSet({MetFactor::PressureHpa, MetFactor::PressureHpa}); }) == ErrorCode::InvalidArgument);
  CHECK(preset_factor_set("7").size() == 7);
  CHECK(preset_factor_set("5").size() == 5);
  CHECK(preset_factor_set("3").size() == 3);
  CHECK(FactorSet::parse(s.to_string()) == s);
}

TEST_CASE("epoch hours") {
  const auto t = parse_utc("2023-10-01T05:30:00Z");
  CHECK(format_utc(EpochHour::containing(t)) == "2023-10-01T05:00:00Z");
  CHECK(code_of([&] { EpochHour::exact(t); }) == ErrorCode::InvalidArgument);
  const auto r = parse_epoch_range("2023-10-01..2023-10-02");
  CHECK(r.contains(EpochHour::exact(parse_utc("2023-10-02T23:00:00"))));
  CHECK_FALSE(r.contains(EpochHour::exact(parse_utc("2023-10-03"))));
}

TEST_CASE("td sanity bound") {
  CHECK(TdNanoseconds(120.5).value() == 120.5);
  CHECK_THROWS_AS(TdNanoseconds(2e9), Error);
}

TEST_CASE("double formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, -1e-300, 179.27738117396626}) CHECK(parse_double(format_double(v)) == v);
  CHECK(code_of([] { parse_double("1.5x"); }) == ErrorCode::ParseError);
}
