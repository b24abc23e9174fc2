#include <doctest.h>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "support.hpp"

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream o(p, std::ios::binary);
  o << text;
}

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "eltd");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = eltd::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// small corpus, 20 days
const char* kBase =
    "[synth]\n"
    "duration_hours = 480\n"
    "[features]\n"
    "l = 20\n"
    "[split]\n"
    "train = 2023-10-01..2023-10-12\n"
    "test = 2023-10-13..2023-10-20\n"
    "[wlr_agrnn]\n"
    "max_iterations = 5\n"
    "[bpnn]\n"
    "max_iterations = 30\n"
    "[moe]\n"
    "max_iterations = 30\n";

struct Fixture {
  fs::path dir, corpus, ini;
  Fixture(const std::string& name, const std::string& extra = "") {
    dir = eltd_test::scratch_dir("cli_" + name);
    corpus = dir / "corpus";
    ini = dir / "run.ini";
    std::filesystem::create_directories(corpus);
    spit(ini, std::string(kBase) + "[corpus]\ndir = " + corpus.string() + "\n" + extra);
    auto r = cli({"--config", ini.string(), "--out", corpus.string(), "synth"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
  }
  Run operator()(const std::string& sub, std::vector<std::string> more = {}, const std::string& out = "out") const {
    std::vector<std::string> a{"--config", ini.string(), "--out", (dir / out).string(), sub};
    a.insert(a.end(), more.begin(), more.end());
    return cli(a);
  }
};

std::size_t line_count(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("cli synth writes a full corpus and is reproducible") {
  Fixture f("synth");
  for (const char* name : {"stations.csv", "weather.csv", "td.csv", "dem.asc", "scenario.meta"}) {
    CHECK(fs::exists(f.corpus / name));
  }
  auto r = cli({"--config", f.ini.string(), "--out", (f.dir / "again").string(), "synth"});
  REQUIRE(r.code == 0);
  CHECK(slurp(f.corpus / "td.csv") == slurp(f.dir / "again" / "td.csv"));
  CHECK(slurp(f.corpus / "weather.csv") == slurp(f.dir / "again" / "weather.csv"));

  r = cli({"--config", f.ini.string(), "--seed", "7", "--out", (f.dir / "other").string(), "synth"});
  REQUIRE(r.code == 0);
  CHECK(slurp(f.corpus / "td.csv") != slurp(f.dir / "other" / "td.csv"));
}

TEST_CASE("cli config errors exit 2") {
  const auto dir = eltd_test::scratch_dir("cli_config");
  SUBCASE("missing corpus dir names the key") {
    auto r = cli({"--out", (dir / "o").string(), "ingest"});
    CHECK(r.code == 2);
    CHECK(r.err.find("corpus.dir") != std::string::npos);
  }
  SUBCASE("unknown key") {
    spit(dir / "bad.ini", "[grid]\ncell_size = 0.1\n");
    auto r = cli({"--config", (dir / "bad.ini").string(), "ingest"});
    CHECK(r.code == 2);
    CHECK(r.err.find("grid.cell_size") != std::string::npos);
  }
  SUBCASE("unknown model") {
    spit(dir / "m.ini", "[model]\nname = svm\n");
    CHECK(cli({"--config", (dir / "m.ini").string(), "train"}).code == 2);
    CHECK(cli({"--out", (dir / "o").string(), "train", "--model", "svm"}).code == 2);
  }
  SUBCASE("unknown subcommand") { CHECK(cli({"fly"}).code == 2); }
}

TEST_CASE("cli pipeline on a small corpus") {
  Fixture f("pipeline");

  SUBCASE("ingest and gridmap") {
    auto r = f("ingest");
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(fs::exists(f.dir / "out" / "hourly_td.csv"));
    r = f("gridmap", {"--epoch", "2023-10-02T06:00:00Z"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(fs::exists(f.dir / "out" / "features.csv"));
    CHECK(fs::exists(f.dir / "out" / "grid_pressure_hpa.csv"));
  }

  SUBCASE("correlate selections shrink with a stricter threshold") {
    auto r = f("correlate", {}, "c1");
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const auto loose = slurp(f.dir / "c1" / "correlation.csv");
    CHECK(loose.rfind("factor,r,p,n,decision\n", 0) == 0);

    spit(f.dir / "strict.ini", slurp(f.ini) + "[correlate]\nr_min = 0.9\n");
    r = cli({"--config", (f.dir / "strict.ini").string(), "--out", (f.dir / "c2").string(), "correlate"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const auto strict = slurp(f.dir / "c2" / "correlation.csv");
    std::istringstream a(loose), b(strict);
    std::string la, lb;
    while (std::getline(a, la) && std::getline(b, lb)) {
      const bool sel_strict = lb.ends_with(",selected");
      if (sel_strict) CHECK(la.ends_with(",selected"));
    }
  }

  SUBCASE("disjoint td and weather is a data error") {
    const auto bad = f.dir / "bad_corpus";
    fs::create_directories(bad);
    for (const auto& e : fs::directory_iterator(f.corpus)) fs::copy_file(e.path(), bad / e.path().filename());
    auto td = slurp(bad / "td.csv");
    for (std::size_t p = td.find("2023-"); p != std::string::npos; p = td.find("2023-", p)) td.replace(p, 5, "2031-");
    spit(bad / "td.csv", td);
    auto r = cli({"--config", f.ini.string(), "--corpus", bad.string(), "--out", (f.dir / "c3").string(), "correlate"});
    CHECK(r.code == 3);
  }

  SUBCASE("grnn trace has one entry") {
    auto r = f("train", {"--model", "grnn"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(line_count(slurp(f.dir / "out" / "grnn_trace.csv")) == 2);
  }

  SUBCASE("identical artifacts give a flat anova") {
    auto r = f("train", {"--model", "lasso_mpr"}, "a");
    REQUIRE_MESSAGE(r.code == 0, r.err);
    fs::copy_file(f.dir / "a" / "lasso_mpr.json", f.dir / "a" / "copy.json");
    r = f("evaluate", {"--artifact", (f.dir / "a" / "lasso_mpr.json").string(), "--artifact",
                       (f.dir / "a" / "copy.json").string()},
          "e");
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const auto anova = slurp(f.dir / "e" / "anova.csv");
    CHECK(anova.find("\n0,1,") != std::string::npos);
    CHECK(fs::exists(f.dir / "e" / "metrics.csv"));
  }

  SUBCASE("predict") {
    auto r = f("train", {"--model", "lasso_mpr"}, "a");
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const auto art = (f.dir / "a" / "lasso_mpr.json").string();

    r = f("predict", {"--artifact", art}, "p");
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(line_count(slurp(f.dir / "p" / "predictions.csv")) > 24);

    r = f("predict", {"--artifact", art, "--range", "2030-01-01..2030-01-02"}, "p0");
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(slurp(f.dir / "p0" / "predictions.csv") == "epoch,td_ns\n");

    auto three = slurp(f.ini);
    three.replace(three.find("[features]\n"), 11, "[features]\nfactors = 3\n");
    spit(f.dir / "three.ini", three);
    r = cli({"--config", (f.dir / "three.ini").string(), "--out", (f.dir / "p3").string(), "predict", "--artifact", art});
    CHECK(r.code == 5);
  }

  SUBCASE("sweep needs a kind") {
    CHECK(f("sweep").code == 2);
    auto r = f("sweep", {"--kind", "degree"}, "s");
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const auto csv = slurp(f.dir / "s" / "sweep_degree.csv");
    CHECK(csv.rfind("degree,rmse,best\n", 0) == 0);
  }
}
