#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "rittlab/experiments.hpp"

using namespace rittlab;
using nlohmann::json;

namespace {

ExperimentConfig small_config(const std::string& probe) {
  ExperimentConfig cfg;
  cfg.probe = probe;
  cfg.measure = "nu_alpha:0.5";
  cfg.K = 1024;
  cfg.m = 1.0;
  cfg.N = 64;
  cfg.W = 4096;
  cfg.alpha = 1.0;
  cfg.s = 3.0;
  cfg.random_count = 0;
  cfg.tol = 1e-6;
  return cfg;
}

}  // namespace

TEST_CASE("config survives a JSON round trip") {
  ExperimentConfig cfg;
  cfg.probe = "variation";
  cfg.measure = "lazy";
  cfg.K = 777;
  cfg.measure_eps = 1e-9;
  cfg.m = 1.5;
  cfg.N = 321;
  cfg.W = 2048;
  cfg.alpha = 0.25;
  cfg.s = 2.5;
  cfg.beta = 0.125;
  cfg.gaps_alpha = 0.75;
  cfg.random_count = 3;
  cfg.random_support = 17;
  cfg.seed = 99;
  cfg.tol = 1e-7;
  cfg.arms = {{"one", 1.0, 2.0, 0.5, "hypothesis"},
              {"two", 0.0, 1.0, 0.0, "contrast"}};
  cfg.out_dir = "/tmp/somewhere";

  ExperimentConfig back = ExperimentConfig::from_json_text(cfg.to_json_text());
  CHECK(back.probe == cfg.probe);
  CHECK(back.measure == cfg.measure);
  CHECK(back.K == cfg.K);
  CHECK(back.measure_eps == cfg.measure_eps);
  CHECK(back.m == cfg.m);
  CHECK(back.N == cfg.N);
  CHECK(back.W == cfg.W);
  CHECK(back.alpha == cfg.alpha);
  CHECK(back.s == cfg.s);
  CHECK(back.beta == cfg.beta);
  CHECK(back.gaps_alpha == cfg.gaps_alpha);
  CHECK(back.random_count == cfg.random_count);
  CHECK(back.random_support == cfg.random_support);
  CHECK(back.seed == cfg.seed);
  CHECK(back.tol == cfg.tol);
  CHECK(back.out_dir == cfg.out_dir);
  REQUIRE(back.arms.size() == 2);
  CHECK(back.arms[0].name == "one");
  CHECK(back.arms[0].alpha == 1.0);
  CHECK(back.arms[0].s == 2.0);
  CHECK(back.arms[0].beta == 0.5);
  CHECK(back.arms[0].mode == "hypothesis");
  CHECK(back.arms[1].name == "two");

  // from_file path
  auto path = std::filesystem::temp_directory_path() / "rittlab_cfg_test.json";
  {
    std::ofstream out(path);
    out << cfg.to_json_text();
  }
  ExperimentConfig from_disk = ExperimentConfig::from_file(path.string());
  CHECK(from_disk.probe == cfg.probe);
  CHECK(from_disk.seed == cfg.seed);
  std::filesystem::remove(path);
}

TEST_CASE("config parsing rejects unknown keys and bad values") {
  CHECK_THROWS_AS(
      ExperimentConfig::from_json_text(R"({"probe":"variation","bogus":1})"),
      std::invalid_argument);
  CHECK_THROWS_AS(ExperimentConfig::from_json_text(
                      R"({"arms":[{"name":"x","surprise":2}]})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(ExperimentConfig::from_json_text("[1,2,3]"),
                  std::invalid_argument);

  ExperimentConfig cfg = small_config("no-such-probe");
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = small_config("main-theorem");
  cfg.s = 0.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = small_config("main-theorem");
  cfg.tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = small_config("variation");
  cfg.beta = -1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = small_config("main-theorem");
  cfg.N = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = small_config("main-theorem");
  cfg.gaps_alpha = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = small_config("main-theorem");
  cfg.arms = {{"weird", 0.0, 0.25, 0.0, ""}};  // arm s below 1
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("payload bytes are deterministic; timing travels separately") {
  ExperimentConfig cfg = small_config("main-theorem");
  cfg.random_count = 2;
  cfg.random_support = 16;
  ReportRecord a = run_probe(cfg);
  ReportRecord b = run_probe(cfg);
  CHECK(a.payload == b.payload);
  CHECK(a.payload.find("\"timing\"") == std::string::npos);

  json r = json::parse(a.rendered());
  REQUIRE(r.contains("timing"));
  CHECK(r["timing"]["wall_ms"].get<double>() >= 0.0);

  // A different seed moves the random inputs and the payload with them.
  cfg.seed += 1;
  ReportRecord c = run_probe(cfg);
  CHECK(c.payload != a.payload);
}

TEST_CASE("identity operator yields an exactly flat zero table") {
  // T = identity (point mass at 0), m = 1: the first difference of the
  // orbit is identically zero, so every level value must be exactly 0 and
  // the hypothesis arm must classify as bounded.
  ExperimentConfig cfg = small_config("main-theorem");
  cfg.measure = "delta:0";
  cfg.K = 4;
  json j = json::parse(run_probe(cfg).payload);
  CHECK(j["probe"] == "main-theorem");
  REQUIRE(j["arms"].size() == 2);

  const json& hyp = j["arms"][0];
  CHECK(hyp["name"] == "hypothesis");
  CHECK(hyp["threshold_met"] == true);  // 3*1 > 1+1
  CHECK(hyp["verdict"] == "consistent-with-bounded");
  REQUIRE(hyp["results"].size() == 1);
  const json& res = hyp["results"][0];
  CHECK(res["input"] == "delta0");
  CHECK(res["classification"] == "consistent-with-bounded");
  CHECK(res["slope_top3"].is_null());
  REQUIRE(res["levels"].size() >= 2);
  for (const json& row : res["levels"])
    CHECK(row["value"].get<double>() == 0.0);

  // The contrast arm runs at s = 1, below the threshold: no verdict.
  const json& con = j["arms"][1];
  CHECK(con["name"] == "contrast_s1");
  CHECK(con["threshold_met"] == false);
  CHECK(con["verdict"] == "none");
}

TEST_CASE("probe smoke: every probe emits a well-formed report") {
  auto run_and_parse = [](const ExperimentConfig& cfg) {
    ReportRecord rec = run_probe(cfg);
    json j = json::parse(rec.payload);
    REQUIRE(j.contains("arms"));
    for (const json& arm : j["arms"]) {
      REQUIRE(arm.contains("name"));
      REQUIRE(arm.contains("verdict"));
      REQUIRE(arm.contains("threshold"));
      for (const json& res : arm["results"]) {
        REQUIRE(res.contains("classification"));
        std::int64_t prev = 0;
        for (const json& row : res["levels"]) {
          std::int64_t n = row["n"].get<std::int64_t>();
          CHECK(n > prev);
          prev = n;
          CHECK(std::isfinite(row["value"].get<double>()));
          CHECK(row["value"].get<double>() >= 0.0);
        }
      }
    }
    return j;
  };

  SUBCASE("main-theorem") {
    json j = run_and_parse(small_config("main-theorem"));
    REQUIRE(j["arms"].size() == 2);
    // N = 64 levels: 4, 8, 16, 32, 64
    CHECK(j["arms"][0]["results"][0]["levels"].size() == 5);
  }
  SUBCASE("open-question") {
    json j = run_and_parse(small_config("open-question"));
    REQUIRE(j["arms"].size() == 3);
    CHECK(j["arms"][0]["name"] == "endpoint");
    CHECK(j["arms"][0]["regime"] == "endpoint");
    CHECK(j["arms"][0]["s"] == 2.0);  // (alpha+1)/m
    CHECK(j["arms"][0]["verdict"] == "none");
    CHECK(j["arms"][1]["regime"] == "above-threshold");
    CHECK(j["arms"][2]["regime"] == "below-threshold");
  }
  SUBCASE("corollary-sup") {
    ExperimentConfig cfg = small_config("corollary-sup");
    cfg.alpha = 0.5;
    json j = run_and_parse(cfg);
    REQUIRE(j["arms"].size() == 2);
    CHECK(j["arms"][0]["name"] == "maximal_l1");
    CHECK(j["arms"][1]["name"] == "terminal_decay");
    const json& dec = j["arms"][1]["results"][0];
    CHECK(dec.contains("decays"));
    std::string v = j["arms"][1]["verdict"].get<std::string>();
    CHECK((v == "decays" || v == "no-decay"));
  }
  SUBCASE("variation") {
    json j = run_and_parse(small_config("variation"));
    REQUIRE(j["arms"].size() == 4);  // two arms, each variation + oscillation
    CHECK(j["arms"][0]["name"] == "beta0_s1_v");
    CHECK(j["arms"][0]["functional"] == "variation");
    CHECK(j["arms"][1]["name"] == "beta0_s1_o");
    CHECK(j["arms"][1]["functional"] == "oscillation");
    CHECK(j["arms"][2]["name"] == "beta03_s2_v");
  }
  SUBCASE("longvar") {
    ExperimentConfig cfg = small_config("longvar");
    cfg.s = 2.0;
    cfg.gaps_alpha = 0.5;
    json j = run_and_parse(cfg);
    REQUIRE(j["arms"].size() == 4);
    CHECK(j["arms"][0]["name"] == "endpoint");
    CHECK(j["arms"][3]["name"] == "contrast_endpoint");
    CHECK(j["arms"][0].contains("gaps_alpha"));
    CHECK(j["arms"][0].contains("threshold_value"));
    CHECK(j["arms"][0]["results"][0].contains("monotone"));
  }
  SUBCASE("lp-square") {
    json j = run_and_parse(small_config("lp-square"));
    REQUIRE(j["arms"].size() == 1);
    CHECK(j["arms"][0]["name"] == "l2_square");
    CHECK(j["arms"][0]["weight_exponent"] == 1.0);  // 2m - 1 at m = 1
  }
}

TEST_CASE("random inputs join the roster under their own names") {
  ExperimentConfig cfg = small_config("main-theorem");
  cfg.random_count = 3;
  cfg.random_support = 8;
  json j = json::parse(run_probe(cfg).payload);
  const json& rs = j["arms"][0]["results"];
  REQUIRE(rs.size() == 4);
  CHECK(rs[0]["input"] == "delta0");
  CHECK(rs[1]["input"] == "random01");
  CHECK(rs[2]["input"] == "random02");
  CHECK(rs[3]["input"] == "random03");
}

TEST_CASE("write_outputs materializes the report and per-arm tables") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "rittlab_probe_out_test";
  fs::remove_all(dir);

  ExperimentConfig cfg = small_config("corollary-sup");
  cfg.alpha = 0.5;
  cfg.out_dir = dir.string();
  ReportRecord rec = run_probe(cfg);
  write_outputs(rec, cfg);

  REQUIRE(fs::exists(dir / "report.json"));
  {
    std::ifstream in(dir / "report.json", std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == rec.payload);
  }
  for (const char* stem : {"maximal_l1_delta0", "terminal_decay_delta0"}) {
    fs::path csv = dir / (std::string(stem) + ".csv");
    fs::path dat = dir / (std::string(stem) + ".dat");
    REQUIRE(fs::exists(csv));
    REQUIRE(fs::exists(dat));
    std::ifstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header == "level,value,window_tail");
  }
  fs::remove_all(dir);
}

TEST_CASE("probe-specific preconditions throw") {
  ExperimentConfig cfg = small_config("open-question");
  cfg.m = 0.0;
  CHECK_THROWS_AS(run_probe(cfg), std::invalid_argument);

  cfg = small_config("longvar");
  cfg.gaps_alpha = 0.0;  // passes validate but the gap spacing is degenerate
  CHECK_THROWS_AS(run_probe(cfg), std::invalid_argument);

  cfg = small_config("lp-square");
  cfg.m = 0.5;
  CHECK_THROWS_AS(run_probe(cfg), std::invalid_argument);

  cfg = small_config("main-theorem");
  cfg.probe = "no-such-probe";
  CHECK_THROWS_AS(run_probe(cfg), std::invalid_argument);
}
