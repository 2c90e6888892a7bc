#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gscout/detect_background.hpp"
#include "gscout/detect_shape.hpp"
#include "gscout/detect_texture.hpp"

namespace gscout {

enum class Method { kShape, kTexture, kBackground };

const char* to_string(Method m);
Method parse_method(const std::string& s);

struct SkipEntry {
  MeterShape shape = MeterShape::kCircle;
  double diameter = 0.0;
  Method method = Method::kShape;
};

struct ExperimentConfig {
  std::vector<MeterShape> shapes = {MeterShape::kCircle, MeterShape::kRect};
  std::vector<double> diameters = {160, 120, 100, 80, 60, 40};
  std::vector<Method> methods = {Method::kShape, Method::kTexture, Method::kBackground};
  int trials = 3;
  int base_seed = 0;
  double clutter = 0.5;
  double success_iou = 0.5;
  double sigma_xy = 0.15;       // m
  double sigma_yaw_deg = 3.0;
  double template_diameter = 160.0;
  SceneOptions scene;
  ShapeConfig shape;
  TextureConfig texture;
  BackgroundConfig background;
  std::vector<SkipEntry> skip;
  int workers = 0;  // 0: one per hardware thread
  std::string csv_path = "results.csv";
  std::string markdown_path = "results.md";
  std::string timing_path = "timings.csv";

  bool skipped(MeterShape shape, double diameter, Method method) const;
};

/// Parses a versioned ("gauge-scout-experiment/1") JSON document. Missing
/// keys take their defaults. Throws kConfig on invalid content.
ExperimentConfig experiment_config_from_json(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);
/// Full config including every default.
std::string experiment_config_to_json(const ExperimentConfig& cfg);

struct TrialResult {
  int seed = 0;
  bool found = false;
  bool success = false;
  double iou = 0.0;
  double ms = 0.0;
  std::string reason;
};

struct CellResult {
  MeterShape shape = MeterShape::kCircle;
  double diameter = 0.0;
  Method method = Method::kShape;
  bool skipped = false;
  int successes = 0;
  int trials = 0;
  double mean_iou = 0.0;
  double mean_ms = 0.0;
  std::vector<TrialResult> runs;
};

struct ResultTable {
  std::vector<CellResult> cells;  // (shape, diameter, method) in config order
  double total_ms = 0.0;
};

/// Streams derived from a trial seed; shared by the bench and the CLI so a
/// single `detect` run reproduces a bench trial.
std::uint64_t texture_candidate_seed(int trial_seed);
std::uint64_t background_ransac_seed(int trial_seed);

/// One seeded episode: scene, perturbed pose, detection, IoU scoring.
TrialResult run_trial(const ExperimentConfig& cfg, MeterShape shape, double diameter, Method method, int trial);

CellResult run_cell(const ExperimentConfig& cfg, MeterShape shape, double diameter, Method method);

/// All requested cells on a worker pool; result order never depends on
/// scheduling. Throws kNothingToRun when no cell is requested.
ResultTable run_grid(const ExperimentConfig& cfg,
                     const std::function<void(const CellResult&)>& on_cell = {});

/// CSV columns: shape, diameter_px, method, successes, trials, mean_iou, mean_ms.
/// With include_timing = false mean_ms is written as "NA" so that reruns are
/// byte-identical; wall-clock times go to the timing file instead.
std::string to_csv(const ResultTable& table, bool include_timing = false);
std::string to_markdown(const ResultTable& table, const ExperimentConfig& cfg);
std::string timing_csv(const ResultTable& table);
/// Per shape, the method with the smallest fully-detected diameter.
std::string summary_line(const ResultTable& table, const ExperimentConfig& cfg);

}  // namespace gscout
