#include "eltd/artifact.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "eltd/error.hpp"

namespace eltd {

using nlohmann::json;

void check_axes(const ModelAxes& model, const PathFeatureTensor& query) {
  if (!(model.factors == query.factors)) {
    throw Error(ErrorCode::AxisMismatch, "model factors {" + model.factors.to_string() + "} but corpus has {" +
                                             query.factors.to_string() + "}");
  }
  if (model.location_mode != query.locations.mode) {
    throw Error(ErrorCode::AxisMismatch, "model location mode " + std::string(to_string(model.location_mode)) +
                                             " but query uses " + std::string(to_string(query.locations.mode)));
  }
  if (model.locations != query.location_count()) {
    throw Error(ErrorCode::AxisMismatch, "model has " + std::to_string(model.locations) + " locations, query has " +
                                             std::to_string(query.location_count()));
  }
}

std::string_view model_kind(const AnyModel& m) noexcept {
  switch (m.index()) {
    case 0: return "lasso_mpr";
    case 1: return "wlr_agrnn";
    case 2: return "bpnn";
    case 3: return "grnn";
    default: return "moe";
  }
}

const ModelAxes& model_axes(const AnyModel& m) noexcept {
  return std::visit([](const auto& x) -> const ModelAxes& { return x.axes(); }, m);
}

std::vector<double> predict_all(const AnyModel& m, const PathFeatureTensor& x) {
  return std::visit([&](const auto& model) { return model.predict_all(x); }, m);
}

namespace {

[[noreturn]] void schema_fail(const std::string& what) { throw Error(ErrorCode::SchemaError, what); }

json matrix_json(const Eigen::MatrixXd& m) {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", flat}};
}

Eigen::MatrixXd matrix_from(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>(), cols = j.at("cols").get<Eigen::Index>();
  const auto flat = j.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 || static_cast<std::size_t>(rows * cols) != flat.size()) schema_fail("matrix shape mismatch");
  Eigen::MatrixXd m(rows, cols);
  std::size_t p = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = flat[p++];
  }
  return m;
}

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json axes_json(const ModelAxes& a) {
  return {{"factors", a.factors.to_string()},
          {"location_mode", std::string(to_string(a.location_mode))},
          {"locations", a.locations},
          {"train_ranges", a.train_ranges}};
}

ModelAxes axes_from(const json& j) {
  ModelAxes a;
  a.factors = FactorSet::parse(j.at("factors").get<std::string>());
  a.location_mode = parse_location_mode(j.at("location_mode").get<std::string>());
  a.locations = j.at("locations").get<std::size_t>();
  a.train_ranges = j.at("train_ranges").get<std::vector<std::string>>();
  return a;
}

json scaler_json(const Standardizer& s) { return {{"means", s.means()}, {"sds", s.sds()}}; }

Standardizer scaler_from(const json& j) {
  return Standardizer(j.at("means").get<std::vector<double>>(), j.at("sds").get<std::vector<double>>());
}

json mlp_json(const Mlp& m) {
  return {{"w1", matrix_json(m.w1)}, {"b1", vector_json(m.b1)}, {"w2", vector_json(m.w2)}, {"b2", m.b2}};
}

Mlp mlp_from(const json& j) {
  Mlp m{matrix_from(j.at("w1")), vector_from(j.at("b1")), vector_from(j.at("w2")), j.at("b2").get<double>()};
  if (m.b1.size() != m.w1.rows() || m.w2.size() != m.w1.rows()) schema_fail("MLP layer shapes disagree");
  return m;
}

json payload(const lasso::Model& m) {
  return {{"degree", m.degree()},
          {"alpha", m.alpha()},
          {"layout", std::string(to_string(m.layout()))},
          {"scaler", scaler_json(m.scaler())},
          {"coefficients", m.coefficients()}};
}

json payload(const wlr_agrnn::Model& m) {
  const auto& p = m.params();
  return {{"wlr",
           {{"w1", matrix_json(p.w1)},
            {"b1", vector_json(p.b1)},
            {"w2", vector_json(p.w2.transpose())},
            {"b2", p.b2}}},
          {"elevation_transform", std::string(wlr_agrnn::to_string(m.elevation().kind))},
          {"elevation_floor_m", m.elevation().floor_m},
          {"h_weight", m.h_weight()},
          {"sigmas", m.sigmas()},
          {"bank", matrix_json(m.bank())},
          {"targets", m.targets()},
          {"training_prediction", "leave_out"},
          {"leave_out_hours", m.loo_exclusion_hours()},
          {"weight_scheme", std::string(wlr_agrnn::to_string(m.weight_scheme()))},
          {"epoch_weights", m.epoch_weights()},
          {"scaler", scaler_json(m.scaler())}};
}

json payload(const bpnn::Model& m) {
  return {{"activation", "tanh"},
          {"net", mlp_json(m.net())},
          {"layout", std::string(to_string(m.layout()))},
          {"scaler", scaler_json(m.scaler())},
          {"y_mean", m.y_mean()},
          {"y_sd", m.y_sd()}};
}

json payload(const grnn::Model& m) {
  return {{"sigma", m.sigma()},
          {"sigma_selection", "leave_out"},
          {"leave_out_hours", m.loo_exclusion_hours()},
          {"bank", matrix_json(m.bank())},
          {"targets", m.targets()},
          {"layout", std::string(to_string(m.layout()))},
          {"scaler", scaler_json(m.scaler())}};
}

json payload(const moe::Model& m) {
  json experts = json::array();
  for (const auto& e : m.experts()) experts.push_back(mlp_json(e));
  return {{"experts", experts},
          {"gate_w", matrix_json(m.gate_w())},
          {"gate_b", vector_json(m.gate_b())},
          {"temperature", m.temperature()},
          {"scaler", scaler_json(m.scaler())},
          {"y_mean", m.y_mean()},
          {"y_sd", m.y_sd()}};
}

AnyModel model_from(std::string_view kind, const json& p, ModelAxes axes) {
  if (kind == "lasso_mpr") {
    return lasso::Model(p.at("degree").get<std::size_t>(), p.at("alpha").get<double>(),
                        parse_feature_layout(p.at("layout").get<std::string>()), scaler_from(p.at("scaler")),
                        p.at("coefficients").get<std::vector<double>>(), std::move(axes));
  }
  if (kind == "wlr_agrnn") {
    const auto& w = p.at("wlr");
    wlr_agrnn::WlrParams params{matrix_from(w.at("w1")), vector_from(w.at("b1")), vector_from(w.at("w2")).transpose(),
                                w.at("b2").get<double>()};
    if (params.b1.size() != params.w1.rows() || params.w2.size() != params.w1.rows()) {
      schema_fail("WLR layer shapes disagree");
    }
    wlr_agrnn::ElevationWeighting ew{
        wlr_agrnn::parse_elevation_transform(p.at("elevation_transform").get<std::string>()),
        p.at("elevation_floor_m").get<double>()};
    wlr_agrnn::Model m(std::move(params), ew, p.at("h_weight").get<std::vector<double>>(),
                       p.at("sigmas").get<std::vector<double>>(), matrix_from(p.at("bank")),
                       p.at("targets").get<std::vector<double>>(),
                       wlr_agrnn::parse_weight_scheme(p.at("weight_scheme").get<std::string>()),
                       p.at("epoch_weights").get<std::vector<double>>(), scaler_from(p.at("scaler")), std::move(axes));
    m.set_loo_exclusion_hours(p.at("leave_out_hours").get<std::int64_t>());
    return m;
  }
  if (kind == "bpnn") {
    return bpnn::Model(mlp_from(p.at("net")), scaler_from(p.at("scaler")), p.at("y_mean").get<double>(),
                       p.at("y_sd").get<double>(), parse_feature_layout(p.at("layout").get<std::string>()),
                       std::move(axes));
  }
  if (kind == "grnn") {
    grnn::Model m(matrix_from(p.at("bank")), p.at("targets").get<std::vector<double>>(), p.at("sigma").get<double>(),
                  scaler_from(p.at("scaler")), parse_feature_layout(p.at("layout").get<std::string>()),
                  std::move(axes));
    m.set_loo_exclusion_hours(p.at("leave_out_hours").get<std::int64_t>());
    return m;
  }
  if (kind == "moe") {
    std::vector<Mlp> experts;
    for (const auto& e : p.at("experts")) experts.push_back(mlp_from(e));
    return moe::Model(std::move(experts), matrix_from(p.at("gate_w")), vector_from(p.at("gate_b")),
                      p.at("temperature").get<double>(), scaler_from(p.at("scaler")), p.at("y_mean").get<double>(),
                      p.at("y_sd").get<double>(), std::move(axes));
  }
  schema_fail("unknown model kind '" + std::string(kind) + "'");
}

}  // namespace

std::string serialize_model(const AnyModel& m) {
  json doc;
  doc["schema_version"] = kArtifactSchemaVersion;
  doc["model"] = std::string(model_kind(m));
  doc["axes"] = axes_json(model_axes(m));
  doc["payload"] = std::visit([](const auto& x) { return payload(x); }, m);
  return doc.dump(1) + "\n";
}

AnyModel deserialize_model(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    schema_fail(std::string("artifact is not valid JSON: ") + e.what());
  }
  try {
    if (!doc.is_object() || !doc.contains("schema_version")) schema_fail("artifact has no schema_version");
    const int version = doc.at("schema_version").get<int>();
    if (version != kArtifactSchemaVersion) {
      schema_fail("unsupported artifact schema version " + std::to_string(version));
    }
    return model_from(doc.at("model").get<std::string>(), doc.at("payload"), axes_from(doc.at("axes")));
  } catch (const json::exception& e) {
    schema_fail(std::string("malformed artifact: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SchemaError) throw;
    schema_fail(std::string("invalid artifact contents: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const AnyModel& m) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::ConfigError, "cannot write artifact " + path.string());
  out << serialize_model(m);
  if (!out) throw Error(ErrorCode::ConfigError, "failed writing artifact " + path.string());
}

AnyModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read artifact " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_model(ss.str());
}

}  // namespace eltd
