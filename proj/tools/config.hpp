#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "eltd/baselines.hpp"
#include "eltd/core_types.hpp"
#include "eltd/gridmap.hpp"
#include "eltd/ingest.hpp"
#include "eltd/lasso_mpr.hpp"
#include "eltd/stats.hpp"
#include "eltd/synth.hpp"
#include "eltd/wlr_agrnn.hpp"

namespace eltd::cli {

inline constexpr const char* kDefaultTrainRanges = "2023-10-01..2023-11-30;2024-01-16..2024-01-29";
inline constexpr const char* kDefaultTestRanges = "2023-12-01..2024-01-15";

enum class SweepKind { Alpha, Degree };

struct SweepConfig {
  std::optional<SweepKind> kind;
  std::vector<double> alphas;  // empty: library default grid
  std::vector<std::size_t> degrees{1, 2, 3, 4, 5};
  double validation_fraction = 0.25;
  bool svg = true;
};

/// Everything a command needs. Defaults reproduce the synthetic reference run.
struct RunConfig {
  std::uint64_t seed = 42;
  std::filesystem::path out = ".";
  std::filesystem::path corpus;  // empty: not configured

  std::optional<GeoPoint> tx, rx;  // fall back to the corpus scenario.meta
  double cell_deg = kDefaultCellSizeDeg;
  double padding_deg = kDefaultPaddingDeg;
  std::size_t min_samples = kDefaultMinSamplesPerHour;

  std::string factors = "7";  // preset name or comma-separated factor list
  LocationMode mode = LocationMode::Path;
  std::size_t locations = kDefaultPathPoints;

  std::vector<EpochRange> train_ranges;
  std::vector<EpochRange> test_ranges;
  std::vector<std::string> train_range_text;
  std::vector<std::string> test_range_text;

  std::string model = "wlr_agrnn";
  lasso::Config lasso{};
  wlr_agrnn::TrainConfig wlr{};
  bpnn::Config bpnn{};
  grnn::Config grnn{};
  moe::Config moe{};

  synth::ScenarioConfig synth{};

  double r_min = stats::kDefaultMinAbsR;
  double p_max = stats::kDefaultMaxP;

  SweepConfig sweep{};

  [[nodiscard]] FactorSet factor_set() const;
  /// Pushes the run seed into every seeded component.
  void apply_seed(std::uint64_t s);
};

/// Flat INI document with sections. Unknown sections or keys, unparsable values, missing
/// referenced paths and overlapping train/test ranges all throw ConfigError naming the key.
RunConfig load_config(const std::optional<std::filesystem::path>& path);
RunConfig parse_config_text(const std::string& text);

/// Model names accepted by train.
bool known_model(const std::string& name) noexcept;

std::vector<EpochRange> parse_ranges(const std::string& key, const std::string& text, std::vector<std::string>* raw);

}  // namespace eltd::cli
