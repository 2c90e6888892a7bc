#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "gscout/bench.hpp"
#include "gscout/error.hpp"
#include "support.hpp"

using namespace gscout;
using nlohmann::json;

namespace {

ErrorCode config_error(const std::string& text) {
  try {
    experiment_config_from_json(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInvalidArgument;
}

std::string with(const std::string& key, const json& value) {
  json doc = {{"schema", "gauge-scout-experiment/1"}};
  doc[key] = value;
  return doc.dump();
}

ExperimentConfig tiny() {
  ExperimentConfig c;
  c.shapes = {MeterShape::kCircle};
  c.diameters = {100};
  c.methods = {Method::kBackground};
  c.trials = 2;
  return c;
}

}  // namespace

TEST_SUITE("bench") {

TEST_CASE("config: defaults round trip through JSON") {
  const ExperimentConfig d;
  const std::string text = experiment_config_to_json(d);
  const ExperimentConfig back = experiment_config_from_json(text);
  CHECK(experiment_config_to_json(back) == text);
  CHECK(json::parse(text).at("schema") == "gauge-scout-experiment/1");

  ExperimentConfig c = tiny();
  c.skip.push_back({MeterShape::kCircle, 100, Method::kBackground});
  c.texture.concentration = ConcentrationStrategy::kMeanShift;
  c.background.coarse.iterations = 250;
  const ExperimentConfig c2 = experiment_config_from_json(experiment_config_to_json(c));
  CHECK(c2.trials == 2);
  CHECK(c2.skipped(MeterShape::kCircle, 100, Method::kBackground));
  CHECK_FALSE(c2.skipped(MeterShape::kRect, 100, Method::kBackground));
  CHECK(c2.texture.concentration == ConcentrationStrategy::kMeanShift);
  CHECK(c2.background.coarse.iterations == 250);
}

TEST_CASE("config: partial documents take defaults") {
  const ExperimentConfig c = experiment_config_from_json(with("trials", 5));
  CHECK(c.trials == 5);
  CHECK(c.diameters.size() == 6);
  CHECK(c.texture.candidates == 16);
}

TEST_CASE("config: invalid content is a config error") {
  CHECK(config_error(with("trials", 0)) == ErrorCode::kConfig);
  CHECK(config_error(with("diameters", json::array({40, 80}))) == ErrorCode::kConfig);
  CHECK(config_error(with("diameters", json::array({80, 80}))) == ErrorCode::kConfig);
  CHECK(config_error(with("diameters", json::array({80, -1}))) == ErrorCode::kConfig);
  CHECK(config_error(with("success_iou", 1.5)) == ErrorCode::kConfig);
  CHECK(config_error(with("methods", json::array({"magic"}))) == ErrorCode::kConfig);
  CHECK(config_error(with("trails", 3)) == ErrorCode::kConfig);
  CHECK(config_error(with("texture", json{{"concentration", "median"}})) == ErrorCode::kConfig);
  CHECK(config_error(R"({"schema": "gauge-scout-experiment/2"})") == ErrorCode::kConfig);
  CHECK(config_error(R"({"trials": 3})") == ErrorCode::kConfig);
  CHECK(config_error("{not json") == ErrorCode::kConfig);
  CHECK(config_error(with("trials", "three")) == ErrorCode::kConfig);
}

TEST_CASE("run_grid: empty request") {
  ExperimentConfig c = tiny();
  c.methods.clear();
  try {
    run_grid(c);
    FAIL("expected NothingToRun");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNothingToRun);
  }
}

TEST_CASE("run_trial and run_cell agree") {
  const ExperimentConfig c = tiny();
  const CellResult cell = run_cell(c, MeterShape::kCircle, 100, Method::kBackground);
  REQUIRE(cell.runs.size() == 2);
  CHECK(cell.trials == 2);
  const TrialResult t1 = run_trial(c, MeterShape::kCircle, 100, Method::kBackground, 1);
  CHECK(t1.iou == cell.runs[1].iou);
  CHECK(t1.found == cell.runs[1].found);
  int succ = 0;
  double iou_sum = 0.0;
  for (const auto& r : cell.runs) {
    succ += r.success ? 1 : 0;
    iou_sum += r.iou;
    CHECK(r.success == (r.found && r.iou >= c.success_iou));
  }
  CHECK(cell.successes == succ);
  CHECK(cell.mean_iou == doctest::Approx(iou_sum / 2));
}

TEST_CASE("run_grid: tables and byte-identical reruns") {
  ExperimentConfig c = tiny();
  c.diameters = {100, 60};
  c.methods = {Method::kShape, Method::kBackground};
  c.skip.push_back({MeterShape::kCircle, 60, Method::kShape});
  c.workers = 1;
  int callbacks = 0;
  const ResultTable a = run_grid(c, [&](const CellResult&) { ++callbacks; });
  CHECK(callbacks == 4);
  REQUIRE(a.cells.size() == 4);
  CHECK(a.cells[0].diameter == 100);
  CHECK(a.cells[0].method == Method::kShape);
  CHECK(a.cells[3].method == Method::kBackground);
  CHECK(a.cells[2].skipped);

  c.workers = 3;
  const ResultTable b = run_grid(c);
  CHECK(to_csv(a) == to_csv(b));

  const std::string csv = to_csv(a);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "shape,diameter_px,method,successes,trials,mean_iou,mean_ms");
  std::getline(lines, line);
  CHECK(line.rfind("circle,100,shape,", 0) == 0);
  CHECK(line.substr(line.size() - 3) == ",NA");
  std::getline(lines, line);
  std::getline(lines, line);
  CHECK(line == "circle,60,shape,-,-,-,-");
  CHECK(to_csv(a, true).find(",NA") == std::string::npos);

  const std::string md = to_markdown(a, c);
  CHECK(md.find("### circle") != std::string::npos);
  CHECK(md.find("| -") != std::string::npos);
  const CellResult& bg = a.cells[1];
  const std::string frac = std::to_string(bg.successes) + "/" + std::to_string(bg.trials);
  CHECK(md.find(frac) != std::string::npos);

  const std::string timing = timing_csv(a);
  CHECK(timing.rfind("shape,diameter_px,method,mean_ms\n", 0) == 0);
  CHECK(timing.find("total,,,") != std::string::npos);
  CHECK(summary_line(a, c).find("circle=") != std::string::npos);
}

TEST_CASE("derived seeds are distinct streams") {
  CHECK(texture_candidate_seed(0) != texture_candidate_seed(1));
  CHECK(texture_candidate_seed(3) != background_ransac_seed(3));
  CHECK(texture_candidate_seed(7) == texture_candidate_seed(7));
}

TEST_CASE("method names") {
  for (Method m : {Method::kShape, Method::kTexture, Method::kBackground}) CHECK(parse_method(to_string(m)) == m);
  CHECK_THROWS_AS(parse_method("hough"), Error);
}

}  // TEST_SUITE
