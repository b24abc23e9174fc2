#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>

#include "eltd/baselines.hpp"
#include "eltd/lasso_mpr.hpp"
#include "eltd/wlr_agrnn.hpp"

namespace eltd {

inline constexpr int kArtifactSchemaVersion = 1;

using AnyModel = std::variant<lasso::Model, wlr_agrnn::Model, bpnn::Model, grnn::Model, moe::Model>;

/// "lasso_mpr", "wlr_agrnn", "bpnn", "grnn" or "moe".
std::string_view model_kind(const AnyModel& m) noexcept;
const ModelAxes& model_axes(const AnyModel& m) noexcept;

/// Throws AxisMismatch (via check_axes) for incompatible tensors.
std::vector<double> predict_all(const AnyModel& m, const PathFeatureTensor& x);

/// Serialised JSON text. Formatting is deterministic for equal models.
std::string serialize_model(const AnyModel& m);
/// Throws SchemaError on malformed documents or unsupported schema versions.
AnyModel deserialize_model(std::string_view text);

void save_model(const std::filesystem::path& path, const AnyModel& m);
AnyModel load_model(const std::filesystem::path& path);

}  // namespace eltd
