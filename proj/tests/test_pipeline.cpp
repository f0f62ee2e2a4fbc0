#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "slt/error.hpp"
#include "slt/pipeline.hpp"
#include "slt/text.hpp"

using namespace slt;
using nlohmann::json;

namespace {

const std::string kFixture = std::string(SLT_TEST_DATA) + "/fixture";

json without_timestamp(json j) {
  j.erase("generated_at");
  return j;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected slt::Error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("fixture run produces one row per metric and system") {
  const auto cfg = load_experiment_config(kFixture + "/config.json");
  const auto report = run_pipeline(cfg);
  CHECK(report.ok());
  CHECK(report.documents == std::vector<std::string>{"d1", "d2"});
  CHECK(report.warnings.empty());
  REQUIRE(report.latency.size() == 5);
  CHECK(report.latency[0].system == "cs-int");
  CHECK(report.latency[4].system == "de-int+de-cs");
  CHECK(report.latency[3].measured_from == "de-int");
  for (const auto& row : report.latency) {
    CHECK_FALSE(row.report.samples.empty());
    CHECK(row.report.percentiles.at(50) <= row.report.percentiles.at(90));
    CHECK(row.report.percentiles.at(90) <= row.report.percentiles.at(99));
    for (const auto& s : row.report.samples) CHECK(s.latency >= 0.0);
  }
  CHECK(report.compression.size() == 6);
  CHECK(report.complexity.size() == 5);
  CHECK(report.ztests.size() == 2);
  CHECK(report.bleu.size() == 3);
  CHECK(report.annotations.size() == 3);
  for (const auto& b : report.bleu) CHECK(b.reference == "cs-ref");
}

TEST_CASE("two runs give identical JSON apart from the timestamp") {
  auto cfg = load_experiment_config(kFixture + "/config.json");
  const auto a = to_json(run_pipeline(cfg));
  cfg.jobs = 1;
  const auto b = to_json(run_pipeline(cfg));
  CHECK(without_timestamp(a).dump() == without_timestamp(b).dump());
}

TEST_CASE("markdown report matches the golden file") {
  const auto cfg = load_experiment_config(kFixture + "/config.json");
  const auto md = render_report(run_pipeline(cfg), ReportFormat::markdown);
  const auto golden_path = kFixture + "/golden_report.md";
  if (std::getenv("SLT_UPDATE_GOLDEN")) std::ofstream(golden_path) << md;
  CHECK(md == text::read_file(golden_path));
}

TEST_CASE("rendered numbers come from the JSON report") {
  const auto cfg = load_experiment_config(kFixture + "/config.json");
  const auto j = to_json(run_pipeline(cfg));
  const auto md = render_report(j, ReportFormat::markdown);
  char buf[64];
  for (const auto& row : j["latency"]) {
    std::snprintf(buf, sizeof(buf), "%.2f", row["avg"].get<double>());
    CHECK(md.find(buf) != std::string::npos);
  }
  for (const auto& row : j["bleu"]) {
    std::snprintf(buf, sizeof(buf), "%.1f", row["agg"]["score"].get<double>());
    CHECK(md.find(buf) != std::string::npos);
  }
  const auto csv = render_report(j, ReportFormat::csv);
  CHECK(csv.rfind("section,key,field,value\n", 0) == 0);
}

TEST_CASE("empty sections render headers only") {
  const json empty = {{"config_hash", "x"}, {"tool_version", "0"}, {"documents", json::array()},
                      {"failures", json::array()}, {"warnings", json::array()}, {"latency", json::array()},
                      {"compression", json::array()}, {"complexity", json::array()}, {"ztests", json::array()},
                      {"bleu", json::array()}, {"annotations", json::array()}};
  const auto md = render_report(empty, ReportFormat::markdown);
  CHECK(md.find("| System |") != std::string::npos);
  CHECK(md.find("| cs-int") == std::string::npos);
}

TEST_CASE("a document with a broken file is reported, the rest still run") {
  auto root = json::parse(text::read_file(kFixture + "/config.json"));
  root["documents"][1]["outputs"]["cs-int"] = "missing.tsv";
  const auto cfg = parse_experiment_config(root, kFixture);
  const auto report = run_pipeline(cfg);
  REQUIRE(report.failures.size() == 1);
  CHECK(report.failures[0].doc_id == "d2");
  CHECK(report.documents == std::vector<std::string>{"d1"});
  CHECK_FALSE(report.latency.empty());
}

TEST_CASE("config validation") {
  auto root = json::parse(text::read_file(kFixture + "/config.json"));
  SUBCASE("no documents") {
    root["documents"] = json::array();
    CHECK(code_of([&] { parse_experiment_config(root, kFixture); }) == ErrorCode::NoDocuments);
  }
  SUBCASE("bad percentile") {
    root["latency"]["percentiles"] = {50, 120};
    CHECK(code_of([&] { parse_experiment_config(root, kFixture); }) == ErrorCode::ConfigInvalid);
  }
  SUBCASE("relay through the wrong pivot") {
    root["systems"][4]["via"] = "cs-int";
    CHECK(code_of([&] { parse_experiment_config(root, kFixture); }) == ErrorCode::ConfigInvalid);
  }
  SUBCASE("missing rank corpus") {
    root["complexity"]["rank_corpora"]["cs"] = "nope.txt";
    CHECK(code_of([&] { parse_experiment_config(root, kFixture); }) == ErrorCode::ConfigInvalid);
  }
  SUBCASE("overrides") {
    apply_override(root, "aligner.trim=4");
    apply_override(root, "bleu.smoothing=add_one");
    const auto cfg = parse_experiment_config(root, kFixture);
    CHECK(cfg.aligner.trim == 4);
    CHECK(cfg.bleu.smoothing == Smoothing::add_one);
  }
  SUBCASE("hash changes with content") {
    const auto a = parse_experiment_config(root, kFixture).config_hash;
    apply_override(root, "jobs=3");
    CHECK(parse_experiment_config(root, kFixture).config_hash != a);
  }
}

TEST_CASE("overrides index into arrays") {
  json j = {{"documents", {{{"doc_id", "a"}}, {{"doc_id", "b"}}}}};
  apply_override(j, "documents.1.doc_id=c");
  CHECK(j["documents"][1]["doc_id"] == "c");
  CHECK_THROWS_AS(apply_override(j, "documents.5.doc_id=c"), Error);
  CHECK_THROWS_AS(apply_override(j, "documents.x.doc_id=c"), Error);
  CHECK_THROWS_AS(apply_override(j, "novalue"), Error);
}
