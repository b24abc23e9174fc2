#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "eltd/error.hpp"

namespace eltd::cli {

void cmd_synth(const RunConfig& cfg, std::ostream& log);
void cmd_ingest(const RunConfig& cfg, std::ostream& log);
/// `epoch` additionally dumps the filled grid map of every factor at that hour.
void cmd_gridmap(const RunConfig& cfg, const std::optional<std::string>& epoch, std::ostream& log);
void cmd_correlate(const RunConfig& cfg, std::ostream& log);
void cmd_train(const RunConfig& cfg, std::ostream& log);
/// `ranges` overrides the configured test ranges ("a..b;c..d").
void cmd_predict(const RunConfig& cfg, const std::filesystem::path& artifact, const std::optional<std::string>& ranges,
                 std::ostream& log);
void cmd_evaluate(const RunConfig& cfg, const std::vector<std::filesystem::path>& artifacts, std::ostream& log);
void cmd_sweep(const RunConfig& cfg, std::ostream& log);

/// 0 ok, 2 config, 3 data, 4 numeric, 5 compatibility.
int exit_code(ErrorKind kind) noexcept;

/// Full command line entry point; never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Self-contained SVG polyline chart.
std::string line_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<double>& xs, const std::vector<double>& ys, bool log_x);

}  // namespace eltd::cli
