#include "doctest.h"

#include "cadkit/harness.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace cadkit;
using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("cadkit_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

int count(const std::string& text, const std::string& what) {
  int n = 0;
  for (auto i = text.find(what); i != std::string::npos; i = text.find(what, i + 1)) ++n;
  return n;
}

json kp_config() {
  return {{"pipeline", "kp_appendix"},
          {"coefficients", "identity"},
          {"pitch", 1.0 / 256},
          {"options", {{"half_width", 8.0}, {"coarse", 0.25}, {"growth", 1.08}}}};
}

}  // namespace

TEST_CASE("experiment config") {
  const auto c = ExperimentConfig::from_json(kp_config());
  CHECK(c.pipeline == "kp_appendix");
  CHECK(c.pitch == 1.0 / 256);
  CHECK(c.depth == 5);
  CHECK_NOTHROW(c.validate());
  SUBCASE("hash is stable and sensitive") {
    CHECK(c.hash().size() == 64);
    CHECK(c.hash() == ExperimentConfig::from_json(c.to_json()).hash());
    auto d = c;
    d.seed = 2;
    CHECK(d.hash() != c.hash());
    // default config; digest of its canonical dump taken with Python's hashlib
    ExperimentConfig e;
    CHECK(e.to_json().dump() ==
          R"({"K0":1.0,"K0_stop":8.0,"c0":0.03125,"coefficient_params":{},"coefficients":"identity","depth":5,)"
          R"("domain":{},"epsilon":0.25,"kstar":2,"lambda":0.125,"options":{},"pipeline":"","pitch":0.01,"q":2.0,)"
          R"("seed":1,"theta":1.0,"walks":20000})");
    CHECK(e.hash() == "dd96b1526785196fae75315acaefacae9bc30c6cf1604ebcdcb3d3f6683de285");
  }
  SUBCASE("ranges") {
    auto d = c;
    d.c0 = 0.5;
    CHECK_THROWS_AS(d.validate(), ParameterError);
    d = c;
    d.q = 1.0;
    CHECK_THROWS_AS(d.validate(), ParameterError);
    d = c;
    d.theta = 1.5;
    CHECK_THROWS_AS(d.validate(), ParameterError);
    d = c;
    d.pipeline = "sweep";
    CHECK_THROWS_AS(d.validate(), ParameterError);
    d = c;
    d.depth = 0;
    CHECK_THROWS_AS(d.validate(), ParameterError);
  }
  SUBCASE("malformed input") {
    auto j = kp_config();
    j["pitchh"] = 0.1;
    CHECK_THROWS_AS(ExperimentConfig::from_json(j), InputError);
    j = kp_config();
    j["depth"] = "five";
    CHECK_THROWS_AS(ExperimentConfig::from_json(j), InputError);
    CHECK_THROWS_AS(ExperimentConfig::from_json(json::array()), InputError);
    CHECK_THROWS_AS(ExperimentConfig::load("/nonexistent/config.json"), InputError);
  }
}

TEST_CASE("report emission") {
  SUBCASE("empty report gives valid empty files") {
    Report r;
    r.pipeline = "classify";
    r.config_hash = "0";
    const auto dir = scratch("empty");
    const auto files = emit_report(r, dir);
    REQUIRE(files.size() == 1);
    const auto j = json::parse(slurp(files[0]));
    CHECK(j["records"].empty());
    CHECK(j["tables"].empty());
    CHECK(j["pass"] == true);
    CHECK(r.all_pass());
  }
  SUBCASE("csv layout") {
    const Table t{"scales", {"a", "b"}, {{1.0, 0.5}, {2.0, 1e-20}}};
    CHECK(table_csv(t, "abc") == "# config abc\na,b\n1,0.5\n2,1e-20\n");
    CHECK(table_csv(Table{"e", {}, {}}, "x") == "# config x\n\n");
  }
  SUBCASE("svg has one marker per point") {
    Plot p{"ladder", "t", "x", "y", true, true, {}};
    Series s{"values", {}};
    for (int k = 0; k < 8; ++k) s.points.emplace_back(std::ldexp(1.0, k - 3), 1.0 + k);
    p.series.push_back(s);
    const auto svg = plot_svg(p, "h");
    CHECK(count(svg, "<circle") == 8);
    CHECK(svg.find("<!-- config h -->") != std::string::npos);
    CHECK(svg.rfind("</svg>") != std::string::npos);
    // non-positive values cannot sit on a log axis and are left out
    p.series[0].points.emplace_back(0.0, 1.0);
    CHECK(count(plot_svg(p, "h"), "<circle") == 8);
  }
  CHECK_THROWS_AS(emit_report(Report{}, scratch("bad"), {"xml"}), InputError);
}

TEST_CASE("kp_appendix pipeline") {
  const auto cfg = ExperimentConfig::from_json(kp_config());
  const auto r = run_pipeline(cfg);
  CHECK(r.all_pass());
  CHECK(r.config_hash == cfg.hash());
  REQUIRE(r.records.size() == 2);
  for (const auto& rec : r.records) CHECK(rec.anchor == "criterion 11");
  REQUIRE(r.tables.size() == 1);
  CHECK(r.tables[0].rows.size() == 7);
  const auto a = scratch("kp_a"), b = scratch("kp_b");
  const auto fa = emit_report(r, a);
  emit_report(run_pipeline(cfg), b);
  REQUIRE(fa.size() == 3);
  for (const auto& f : fa) CHECK(slurp(f) == slurp(b / f.filename()));
  CHECK(count(slurp(a / "ladder.svg"), "<circle") == 14);
  CHECK(slurp(a / "ladder.csv").rfind("# config " + cfg.hash(), 0) == 0);
}

TEST_CASE("classify pipeline") {
  const json j{{"pipeline", "classify"},
               {"domain", {{"shape", "disk"}}},
               {"depth", 4},
               {"options", {{"generations", {1, 2, 3}}, {"expect", "CAD"}}}};
  const auto r = run_pipeline(ExperimentConfig::from_json(j));
  CHECK(r.summary["verdict"] == "CAD");
  CHECK(r.all_pass());
  const auto files = emit_report(r, scratch("classify"));
  int jsons = 0, csvs = 0;
  for (const auto& f : files) {
    jsons += f.extension() == ".json";
    csvs += f.extension() == ".csv";
  }
  CHECK(jsons == 1);
  CHECK(csvs == 2);
  for (const auto& rec : r.records) CHECK((rec.anchor == "plumbing" || rec.anchor.rfind("criterion ", 0) == 0));

  auto wrong = j;
  wrong["options"]["expect"] = "neither";
  CHECK_FALSE(run_pipeline(ExperimentConfig::from_json(wrong)).all_pass());
}

TEST_CASE("ainfty_to_nta pipeline") {
  const json j{{"pipeline", "ainfty_to_nta"},
               {"domain", {{"shape", "lipschitz"}}},
               {"depth", 5},
               {"pitch", 0.02},
               {"walks", 4000},
               {"seed", 3},
               {"options", {{"pole", {0.0, 3.0}}, {"ibp_cubes", 2}}}};
  const auto r = run_pipeline(ExperimentConfig::from_json(j));
  CHECK(r.all_pass());
  std::set<std::string> anchors;
  for (const auto& rec : r.records) anchors.insert(rec.anchor);
  for (const char* a : {"criterion 3", "criterion 5", "criterion 7", "criterion 10", "criterion 12"}) {
    CHECK(anchors.count(a) == 1);
  }
  CHECK(r.summary["m1_hat"].get<double>() <= 3.0);

  SUBCASE("module errors name the stage") {
    auto bad = j;
    bad["coefficients"] = "nonsense";
    try {
      run_pipeline(ExperimentConfig::from_json(bad));
      FAIL("expected a stage error");
    } catch (const StageError& e) {
      CHECK(e.stage() == "coefficients");
    }
    bad = j;
    bad["options"]["pole"] = {5.0, 5.0};
    CHECK_THROWS_AS(run_pipeline(ExperimentConfig::from_json(bad)), StageError);
  }
}
