#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "eltd/artifact.hpp"
#include "eltd/csv.hpp"
#include "eltd/stats.hpp"
#include "eltd/synth.hpp"
#include "pipeline.hpp"

namespace eltd::cli {

namespace {

namespace fs = std::filesystem;

std::string fmt(double v) { return format_double(v); }

void ensure_out_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error(ErrorCode::ConfigError, "run.out: cannot create output directory '" + dir.string() + "'");
  }
}

void write(const fs::path& path, const std::string& text, std::ostream& log) {
  csv::write_file(path, text);
  log << "wrote " << path.string() << "\n";
}

std::string write_trace(const TrainingTrace& trace) {
  std::string s = "iteration,loss\n";
  for (std::size_t i = 0; i < trace.loss.size(); ++i) s += csv::join_row({std::to_string(i + 1), fmt(trace.loss[i])});
  return s;
}

std::string axes_label(const ModelAxes& a) {
  return std::to_string(a.factors.size()) + "f_" + std::string(to_string(a.location_mode)) +
         (a.location_mode == LocationMode::Path ? std::to_string(a.locations) : std::string());
}

struct Trained {
  AnyModel model;
  TrainingTrace trace;
};

Trained train_model(const RunConfig& cfg, const TrainingData& train, const Prepared& prep) {
  if (cfg.model == "lasso_mpr") {
    auto r = lasso::train(train, cfg.lasso);
    return {std::move(r.model), std::move(r.trace)};
  }
  if (cfg.model == "wlr_agrnn") {
    auto r = wlr_agrnn::train(train, prep.profile, cfg.wlr);
    return {std::move(r.model), std::move(r.trace)};
  }
  if (cfg.model == "bpnn") {
    auto r = bpnn::train(train, cfg.bpnn);
    return {std::move(r.model), std::move(r.trace)};
  }
  if (cfg.model == "grnn") {
    auto r = grnn::train(train, cfg.grnn);
    return {std::move(r.model), std::move(r.trace)};
  }
  if (cfg.model == "moe") {
    auto r = moe::train(train, cfg.moe);
    return {std::move(r.model), std::move(r.trace)};
  }
  throw Error(ErrorCode::ConfigError, "model.name: unknown model '" + cfg.model + "'");
}

void set_ranges(AnyModel& m, std::vector<std::string> ranges) {
  std::visit([&](auto& model) { model.set_train_ranges(std::move(ranges)); }, m);
}

}  // namespace

// ---------------------------------------------------------------------------

void cmd_synth(const RunConfig& cfg, std::ostream& log) {
  ensure_out_dir(cfg.out);
  const auto s = synth::generate_scenario(cfg.synth);
  synth::write_corpus(s, cfg.out);
  log << "corpus " << cfg.out.string() << ": " << s.registry.size() << " stations, " << s.epochs.size()
      << " hours, " << s.td.size() << " td rows, recipe " << s.config.recipe.name << ", seed " << s.config.seed << "\n";
}

void cmd_ingest(const RunConfig& cfg, std::ostream& log) {
  const auto corpus = load_corpus(cfg);
  ensure_out_dir(cfg.out);
  const auto hourly = aggregate_hourly(corpus.td, cfg.min_samples);
  std::vector<std::size_t> stations(corpus.registry.size());
  for (std::size_t i = 0; i < stations.size(); ++i) stations[i] = i;
  const auto factors = cfg.factor_set();
  const auto aligned = align_epochs(corpus.weather, hourly, factors, stations);
  const auto train = indices_in_ranges(aligned.epochs, cfg.train_ranges);
  const auto test = indices_in_ranges(aligned.epochs, cfg.test_ranges);

  write(cfg.out / "hourly_td.csv", serialize_hourly(hourly), log);
  std::string s = "key,value\n";
  s += csv::join_row({"stations", std::to_string(corpus.registry.size())});
  s += csv::join_row({"weather_hours", std::to_string(corpus.weather.by_epoch().size())});
  s += csv::join_row({"td_rows", std::to_string(corpus.td.size())});
  s += csv::join_row({"hourly_td", std::to_string(hourly.size())});
  s += csv::join_row({"factors", std::to_string(factors.size())});
  s += csv::join_row({"aligned_epochs", std::to_string(aligned.size())});
  s += csv::join_row({"first_epoch", format_utc(aligned.epochs.front())});
  s += csv::join_row({"last_epoch", format_utc(aligned.epochs.back())});
  s += csv::join_row({"train_epochs", std::to_string(train.size())});
  s += csv::join_row({"test_epochs", std::to_string(test.size())});
  write(cfg.out / "ingest_summary.csv", s, log);
  log << aligned.size() << " aligned epochs (" << train.size() << " train, " << test.size() << " test)\n";
}

void cmd_gridmap(const RunConfig& cfg, const std::optional<std::string>& epoch, std::ostream& log) {
  const auto corpus = load_corpus(cfg);
  ensure_out_dir(cfg.out);
  const auto axes = config_axes(cfg);
  const auto prep = prepare(corpus, cfg, axes);
  const auto& x = prep.data.x;
  const auto n = x.factor_count(), l = x.location_count();

  std::string prof = "location,lat,lon,elevation_m\n";
  for (std::size_t j = 0; j < l; ++j) {
    const auto& p = prep.locations.points[j];
    prof += csv::join_row({std::to_string(j), fmt(p.lat()), fmt(p.lon()), fmt(prep.profile[j])});
  }
  write(cfg.out / "profile.csv", prof, log);

  // per-epoch location means keep the file small; --epoch dumps one full slab
  std::vector<std::string> header{"epoch", "td_ns"};
  for (auto f : x.factors) header.emplace_back(to_string(f));
  std::string feat = csv::join_row(header);
  for (std::size_t t = 0; t < x.epoch_count(); ++t) {
    std::vector<std::string> row{format_utc(x.epochs[t]), fmt(prep.data.y[t])};
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < l; ++j) s += x.at(t, j, i);
      row.push_back(fmt(s / static_cast<double>(l)));
    }
    feat += csv::join_row(row);
  }
  write(cfg.out / "features.csv", feat, log);

  if (epoch) {
    const auto e = EpochHour::containing(parse_utc(*epoch));
    for (auto f : x.factors) {
      const auto map = idw_fill(assign_observations(prep.spec, corpus.registry, corpus.weather, e, f));
      write(cfg.out / ("grid_" + std::string(to_string(f)) + ".csv"), export_grid_csv(map), log);
    }
  }
  log << x.epoch_count() << " epochs x " << l << " locations (" << to_string(axes.mode) << ") x " << n << " factors\n";
}

void cmd_correlate(const RunConfig& cfg, std::ostream& log) {
  const auto corpus = load_corpus(cfg);
  ensure_out_dir(cfg.out);
  std::vector<stats::CorrelationResult> results;
  std::string s = "factor,r,p,n,decision\n";
  for (auto f : corpus.weather.columns()) {
    FeatureAxes axes{FactorSet({f}), cfg.mode, cfg.locations};
    const auto prep = prepare(corpus, cfg, axes);
    const auto& x = prep.data.x;
    std::vector<double> mean(x.epoch_count(), 0.0);
    for (std::size_t t = 0; t < x.epoch_count(); ++t) {
      for (std::size_t j = 0; j < x.location_count(); ++j) mean[t] += x.at(t, j, 0);
      mean[t] /= static_cast<double>(x.location_count());
    }
    try {
      const auto c = stats::pearson(mean, prep.data.y);
      results.push_back({f, c.r, c.p, c.n_samples});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ConstantSeries) throw;
      results.push_back({f, std::nan(""), 1.0, mean.size()});
    }
  }
  const auto selected = stats::select_factors(results, cfg.r_min, cfg.p_max);
  for (const auto& r : results) {
    s += csv::join_row({std::string(to_string(r.factor)), fmt(r.r), fmt(r.p), std::to_string(r.n_samples),
                        selected.contains(r.factor) ? "selected" : "rejected"});
  }
  write(cfg.out / "correlation.csv", s, log);
  log << "selected: " << (selected.empty() ? std::string("(none)") : selected.to_string()) << "\n";
}

void cmd_train(const RunConfig& cfg, std::ostream& log) {
  if (!known_model(cfg.model)) throw Error(ErrorCode::ConfigError, "model.name: unknown model '" + cfg.model + "'");
  const auto corpus = load_corpus(cfg);
  ensure_out_dir(cfg.out);
  const auto prep = prepare(corpus, cfg, config_axes(cfg));
  const auto train = select_ranges(prep.data, cfg.train_ranges);
  if (train.size() == 0) throw Error(ErrorCode::Empty, "train range holds no aligned epochs");
  auto t = train_model(cfg, train, prep);
  set_ranges(t.model, cfg.train_range_text);
  save_model(cfg.out / (cfg.model + ".json"), t.model);
  log << "wrote " << (cfg.out / (cfg.model + ".json")).string() << "\n";
  write(cfg.out / (cfg.model + "_trace.csv"), write_trace(t.trace), log);
  log << cfg.model << ": " << train.size() << " epochs, " << t.trace.iterations << " iterations"
      << (t.trace.converged ? " (converged)" : "") << ", final loss " << fmt(t.trace.loss.back()) << "\n";
}

void cmd_predict(const RunConfig& cfg, const fs::path& artifact, const std::optional<std::string>& ranges,
                 std::ostream& log) {
  const auto model = load_model(artifact);
  const auto corpus = load_corpus(cfg);
  ensure_out_dir(cfg.out);
  const auto axes = config_axes(cfg);
  const auto wanted = ranges ? parse_ranges("--range", *ranges, nullptr) : cfg.test_ranges;
  const auto epochs = complete_weather_epochs(corpus.weather, axes.factors, wanted);
  std::string s = "epoch,td_ns\n";
  if (!epochs.empty()) {
    const auto spec = GridSpec::around(corpus.tx, corpus.rx, cfg.cell_deg, cfg.padding_deg);
    const auto locations = make_locations(axes.mode, corpus.tx, corpus.rx, axes.locations, corpus.registry);
    const auto x = build_feature_tensor(spec, corpus.registry, corpus.weather, epochs, axes.factors, locations);
    const auto yhat = predict_all(model, x);
    for (std::size_t t = 0; t < epochs.size(); ++t) s += csv::join_row({format_utc(epochs[t]), fmt(yhat[t])});
  } else {
    check_axes(model_axes(model), PathFeatureTensor{{}, make_locations(axes.mode, corpus.tx, corpus.rx, axes.locations,
                                                                       corpus.registry),
                                                    axes.factors, {}});
  }
  write(cfg.out / "predictions.csv", s, log);
  log << epochs.size() << " predictions from " << model_kind(model) << "\n";
}

void cmd_evaluate(const RunConfig& cfg, const std::vector<fs::path>& artifacts, std::ostream& log) {
  if (artifacts.empty()) throw Error(ErrorCode::ConfigError, "--artifact: at least one artifact is required");
  const auto corpus = load_corpus(cfg);
  ensure_out_dir(cfg.out);

  struct Row {
    std::string name, kind, axes;
    std::size_t n;
    double rmse, mae;
    std::vector<double> fold_rmse;
    std::vector<std::pair<std::string, std::size_t>> folds;
  };
  std::vector<Row> rows;
  std::map<std::string, std::pair<Prepared, TrainingData>> cache;  // keyed by axes label
  std::set<std::string> names;
  for (const auto& path : artifacts) {
    const auto model = load_model(path);
    const auto& ma = model_axes(model);
    for (const auto& text : ma.train_ranges) {
      const auto r = parse_epoch_range(text);
      for (const auto& t : cfg.test_ranges) {
        if (r.overlaps(t)) throw Error(ErrorCode::ConfigError, "split.test: overlaps the training range of " + path.string());
      }
    }
    const auto label = axes_label(ma);
    auto it = cache.find(label);
    if (it == cache.end()) {
      auto prep = prepare(corpus, cfg, {ma.factors, ma.location_mode, ma.locations});
      auto test = select_ranges(prep.data, cfg.test_ranges);
      it = cache.emplace(label, std::pair{std::move(prep), std::move(test)}).first;
    }
    const auto& test = it->second.second;
    if (test.size() == 0) throw Error(ErrorCode::Empty, "test range holds no aligned epochs");
    const auto yhat = predict_all(model, test.x);

    Row row;
    row.name = path.stem().string();
    for (int k = 2; !names.insert(row.name).second; ++k) row.name = path.stem().string() + "_" + std::to_string(k);
    row.kind = std::string(model_kind(model));
    row.axes = label;
    row.n = test.size();
    row.rmse = stats::rmse(test.y, yhat);
    row.mae = stats::mae(test.y, yhat);
    for (const auto& fold : weekly_folds(test.x.epochs)) {
      std::vector<double> a, p;
      for (auto i : fold) {
        a.push_back(test.y[i]);
        p.push_back(yhat[i]);
      }
      row.fold_rmse.push_back(stats::rmse(a, p));
      row.folds.emplace_back(format_utc(test.x.epochs[fold.front()]), fold.size());
    }
    rows.push_back(std::move(row));
  }

  std::string m = "model,kind,axes,n,rmse,mae\n";
  std::string f = "model,fold,start,n,rmse\n";
  for (const auto& r : rows) {
    m += csv::join_row({r.name, r.kind, r.axes, std::to_string(r.n), fmt(r.rmse), fmt(r.mae)});
    for (std::size_t k = 0; k < r.fold_rmse.size(); ++k) {
      f += csv::join_row({r.name, std::to_string(k + 1), r.folds[k].first, std::to_string(r.folds[k].second),
                          fmt(r.fold_rmse[k])});
    }
  }
  write(cfg.out / "metrics.csv", m, log);
  write(cfg.out / "folds.csv", f, log);

  // rows = model kinds, columns = factor set x location mode
  std::set<std::string> cols;
  std::map<std::string, std::map<std::string, double>> grid;
  for (const auto& r : rows) {
    cols.insert(r.axes);
    if (!grid[r.kind].count(r.axes)) grid[r.kind][r.axes] = r.rmse;
  }
  std::vector<std::string> header{"model"};
  header.insert(header.end(), cols.begin(), cols.end());
  std::string table = csv::join_row(header);
  for (const auto& [kind, cells] : grid) {
    std::vector<std::string> line{kind};
    for (const auto& c : cols) line.push_back(cells.count(c) ? fmt(cells.at(c)) : "");
    table += csv::join_row(line);
  }
  write(cfg.out / "table.csv", table, log);

  bool anova_ok = rows.size() >= 2;
  for (const auto& r : rows) anova_ok = anova_ok && r.fold_rmse.size() >= 2;
  if (anova_ok) {
    std::vector<std::vector<double>> groups;
    for (const auto& r : rows) groups.push_back(r.fold_rmse);
    const auto a = stats::anova_oneway(groups);
    std::string s = "f,p,df_between,df_within\n";
    s += csv::join_row({fmt(a.f), fmt(a.p), std::to_string(a.df_between), std::to_string(a.df_within)});
    write(cfg.out / "anova.csv", s, log);
    log << "anova F " << fmt(a.f) << " p " << fmt(a.p) << "\n";
  } else {
    log << "anova skipped (needs >= 2 models with >= 2 weekly folds)\n";
  }
  for (const auto& r : rows) log << r.name << " rmse " << fmt(r.rmse) << " mae " << fmt(r.mae) << "\n";
}

void cmd_sweep(const RunConfig& cfg, std::ostream& log) {
  if (!cfg.sweep.kind) throw Error(ErrorCode::ConfigError, "sweep.kind: not configured (alpha or degree)");
  const auto corpus = load_corpus(cfg);
  ensure_out_dir(cfg.out);
  const auto prep = prepare(corpus, cfg, config_axes(cfg));
  const auto train = select_ranges(prep.data, cfg.train_ranges);
  if (train.size() == 0) throw Error(ErrorCode::Empty, "train range holds no aligned epochs");
  const auto layout = train.x.location_count() == 1 ? FeatureLayout::Flatten : cfg.lasso.layout;
  const Eigen::MatrixXd rows = design_matrix(train.x, layout);
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(train.y.data(), static_cast<Eigen::Index>(train.y.size()));

  const bool alpha = *cfg.sweep.kind == SweepKind::Alpha;
  lasso::SweepResult res;
  if (alpha) {
    const auto grid = cfg.sweep.alphas.empty() ? lasso::default_alpha_grid() : cfg.sweep.alphas;
    res = lasso::sweep_alpha(rows, y, cfg.lasso.degree, grid, cfg.sweep.validation_fraction, cfg.lasso);
  } else {
    res = lasso::sweep_degree(rows, y, cfg.lasso.alpha, cfg.sweep.degrees, cfg.sweep.validation_fraction, cfg.lasso);
  }
  const std::string name = alpha ? "alpha" : "degree";
  std::string s = name + ",rmse,best\n";
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < res.points.size(); ++i) {
    s += csv::join_row({fmt(res.points[i].value), fmt(res.points[i].rmse), i == res.argmin ? "1" : "0"});
    xs.push_back(res.points[i].value);
    ys.push_back(res.points[i].rmse);
  }
  write(cfg.out / ("sweep_" + name + ".csv"), s, log);
  if (cfg.sweep.svg) {
    write(cfg.out / ("sweep_" + name + ".svg"),
          line_chart_svg("validation RMSE vs " + name, name, "RMSE (ns)", xs, ys, alpha), log);
  }
  log << "best " << name << " " << fmt(res.points[res.argmin].value) << " rmse " << fmt(res.points[res.argmin].rmse)
      << "\n";
}

// ---------------------------------------------------------------------------

std::string line_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<double>& xs, const std::vector<double>& ys, bool log_x) {
  constexpr double W = 480, H = 320, L = 60, R = 20, T = 30, B = 45;
  auto tx = [&](double v) { return log_x ? std::log10(std::max(v, 1e-300)) : v; };
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (!xs.empty()) {
    x0 = x1 = tx(xs[0]);
    y0 = y1 = ys[0];
    for (std::size_t i = 0; i < xs.size(); ++i) {
      x0 = std::min(x0, tx(xs[i]));
      x1 = std::max(x1, tx(xs[i]));
      y0 = std::min(y0, ys[i]);
      y1 = std::max(y1, ys[i]);
    }
  }
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double v) { return L + (tx(v) - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double v) { return H - B - (v - y0) / (y1 - y0) * (H - T - B); };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };
  auto label = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return std::string(buf);
  };
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">" << title << "</text>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    o << "<text x=\"" << num(px(xs[i])) << "\" y=\"" << H - B + 14 << "\" text-anchor=\"middle\">" << label(xs[i])
      << "</text>\n";
  }
  for (int k = 0; k <= 4; ++k) {
    const double v = y0 + (y1 - y0) * k / 4.0;
    o << "<text x=\"" << L - 6 << "\" y=\"" << num(py(v) + 4) << "\" text-anchor=\"end\">" << label(v) << "</text>\n";
  }
  o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 8 << "\" text-anchor=\"middle\">" << x_label
    << (log_x ? " (log scale)" : "") << "</text>\n";
  o << "<text x=\"14\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
    << (T + H - B) / 2 << ")\">" << y_label << "</text>\n";
  o << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < xs.size(); ++i) o << (i ? " " : "") << num(px(xs[i])) << ',' << num(py(ys[i]));
  o << "\"/>\n";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    o << "<circle cx=\"" << num(px(xs[i])) << "\" cy=\"" << num(py(ys[i])) << "\" r=\"3\" fill=\"#1f77b4\"/>\n";
  }
  o << "</svg>\n";
  return o.str();
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::Usage:
      return 2;
    case ErrorKind::Data:
      return 3;
    case ErrorKind::Numeric:
      return 4;
    case ErrorKind::Compatibility:
      return 5;
  }
  return 1;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"eLoran/GPS time-difference estimation from weather grid maps and terrain"};
  app.require_subcommand(1);
  app.fallthrough();
  std::optional<std::uint64_t> seed;
  std::optional<std::string> config_path, out_dir, corpus_dir;
  app.add_option("--seed", seed, "RNG seed for every seeded component");
  app.add_option("--config", config_path, "INI configuration file");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--corpus", corpus_dir, "corpus directory (overrides corpus.dir)");

  auto* synth = app.add_subcommand("synth", "write a synthetic corpus");
  auto* ingest = app.add_subcommand("ingest", "validate a corpus and aggregate TD to hourly means");
  auto* gridmap = app.add_subcommand("gridmap", "build the path feature tensor and elevation profile");
  std::optional<std::string> epoch;
  gridmap->add_option("--epoch", epoch, "also dump the filled grid maps at this UTC hour");
  auto* correlate = app.add_subcommand("correlate", "Pearson screening of every weather factor against TD");
  auto* train = app.add_subcommand("train", "fit one model on the train range");
  std::optional<std::string> model_name;
  train->add_option("--model", model_name, "lasso_mpr | wlr_agrnn | bpnn | grnn | moe");
  auto* predict = app.add_subcommand("predict", "predict TD for an epoch range");
  std::string artifact;
  std::optional<std::string> range;
  predict->add_option("--artifact", artifact, "model artifact")->required();
  predict->add_option("--range", range, "epoch ranges 'a..b;c..d' (default: test ranges)");
  auto* evaluate = app.add_subcommand("evaluate", "RMSE/MAE on the test range with ANOVA over weekly folds");
  std::vector<std::string> artifacts;
  evaluate->add_option("--artifact", artifacts, "model artifacts")->required();
  auto* sweep = app.add_subcommand("sweep", "LASSO-MPR alpha or degree sweep on the train range");
  std::optional<std::string> kind;
  sweep->add_option("--kind", kind, "alpha | degree");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    RunConfig cfg = load_config(config_path ? std::optional<fs::path>(*config_path) : std::nullopt);
    if (seed) cfg.apply_seed(*seed);
    if (out_dir) cfg.out = *out_dir;
    if (corpus_dir) {
      if (!fs::is_directory(*corpus_dir)) {
        throw Error(ErrorCode::ConfigError, "--corpus: directory '" + *corpus_dir + "' does not exist");
      }
      cfg.corpus = *corpus_dir;
    }
    if (model_name) {
      if (!known_model(*model_name)) throw Error(ErrorCode::ConfigError, "--model: unknown model '" + *model_name + "'");
      cfg.model = *model_name;
    }
    if (kind) {
      if (*kind == "alpha") cfg.sweep.kind = SweepKind::Alpha;
      else if (*kind == "degree") cfg.sweep.kind = SweepKind::Degree;
      else throw Error(ErrorCode::ConfigError, "--kind: expected alpha or degree, got '" + *kind + "'");
    }

    if (*synth) cmd_synth(cfg, out);
    else if (*ingest) cmd_ingest(cfg, out);
    else if (*gridmap) cmd_gridmap(cfg, epoch, out);
    else if (*correlate) cmd_correlate(cfg, out);
    else if (*train) cmd_train(cfg, out);
    else if (*predict) cmd_predict(cfg, artifact, range, out);
    else if (*evaluate) cmd_evaluate(cfg, std::vector<fs::path>(artifacts.begin(), artifacts.end()), out);
    else if (*sweep) cmd_sweep(cfg, out);
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace eltd::cli
