#include "cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>

#include <CLI11.hpp>

#include "gscout/bench.hpp"
#include "gscout/error.hpp"
#include "gscout/png_io.hpp"

namespace gscout {
namespace {

namespace fs = std::filesystem;

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
}

ExperimentConfig config_or_defaults(const std::string& path) {
  return path.empty() ? ExperimentConfig{} : load_experiment_config(path);
}

struct DetectArgs {
  std::string method;
  std::string scene_dir;
  std::string shape = "circle";
  double diameter = 0.0;
  int seed = 0;
  int meter_id = 0;
  std::string annotation_dir;
  std::string template_png;
  std::string out_dir;
  std::string config;
};

int run_detect(const DetectArgs& a) {
  const ExperimentConfig cfg = config_or_defaults(a.config);
  const Method method = parse_method(a.method);
  SceneSpec scene;
  if (!a.scene_dir.empty()) {
    scene = load_scene(a.scene_dir);
  } else if (a.diameter > 0.0) {
    scene = generate_scene(a.seed, parse_meter_shape(a.shape), a.diameter, cfg.clutter, cfg.scene);
  } else {
    throw Error(ErrorCode::kConfig, "detect needs --scene or --diameter");
  }
  const RobotPose pose = perturb_pose(scene.nominal_pose, static_cast<std::uint64_t>(a.seed), cfg.sigma_xy,
                                      cfg.sigma_yaw_deg * std::numbers::pi / 180.0);
  const MeterTemplate tmpl = a.template_png.empty() ? template_from_scene(scene, a.meter_id, cfg.template_diameter)
                                                    : load_template(a.template_png);
  SimulatedCamera camera(scene, pose);
  DetectionResult det;
  switch (method) {
    case Method::kShape: {
      ShapeConfig sc = cfg.shape;
      sc.keep_views = true;
      det = detect_shape(camera, scene.nominal_ptz, tmpl, sc);
      break;
    }
    case Method::kTexture: {
      TextureConfig tc = cfg.texture;
      tc.keep_views = true;
      tc.sigma_xy = cfg.sigma_xy;
      tc.sigma_yaw = cfg.sigma_yaw_deg * std::numbers::pi / 180.0;
      tc.candidate_seed = texture_candidate_seed(a.seed);
      det = detect_texture(camera, scene.nominal_pose, scene.nominal_ptz, tmpl, map_entry_from_scene(scene, a.meter_id),
                           tc);
      break;
    }
    case Method::kBackground: {
      BackgroundConfig bc = cfg.background;
      bc.keep_views = true;
      bc.seed = background_ransac_seed(a.seed);
      const BackgroundAnnotation ann = a.annotation_dir.empty() ? annotation_from_scene(scene, scene.nominal_ptz)
                                                                : load_annotation(a.annotation_dir);
      det = detect_background(camera, scene.nominal_ptz, ann, a.meter_id, tmpl, bc);
      break;
    }
  }
  const GroundTruth gt = ground_truth(scene, a.meter_id, pose, det.final_ptz);
  const double score = det.found ? iou(det.region, gt.region) : 0.0;
  std::printf("method = %s\nfound = %s\n", det.method.c_str(), det.found ? "true" : "false");
  if (!det.reason.empty()) std::printf("reason = %s\n", det.reason.c_str());
  std::printf("region = %.1f %.1f %.1f %.1f\nground_truth = %.1f %.1f %.1f %.1f\niou = %.4f\n", det.region.x,
              det.region.y, det.region.w, det.region.h, gt.region.x, gt.region.y, gt.region.w, gt.region.h, score);
  std::printf("final_ptz = pan %.4f tilt %.4f zoom %.3f\nconfidence = %.3f\nms = %.1f\n", det.final_ptz.pan,
              det.final_ptz.tilt, det.final_ptz.zoom, det.confidence, det.ms);
  for (const auto& t : det.trace) {
    std::printf("round %d: zoom %.3f keypoints %d matches %d %s\n", t.round, t.ptz.zoom, t.keypoints, t.matches,
                t.note.c_str());
  }
  if (!a.out_dir.empty()) {
    fs::create_directories(a.out_dir);
    int k = 0;
    for (const auto& [name, img] : det.views) {
      char prefix[16];
      std::snprintf(prefix, sizeof prefix, "%02d_", k++);
      write_png((fs::path(a.out_dir) / (prefix + name + ".png")).string(), img);
    }
    write_png((fs::path(a.out_dir) / "template.png").string(), tmpl.image);
  }
  return 0;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Meter-region detection toolkit over a simulated PTZ camera", "gscout"};
  app.require_subcommand(1);

  // bench
  auto* bench = app.add_subcommand("bench", "Detection-rate experiments");
  bench->require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  int workers = -1;
  bool timing_in_csv = false;
  auto* run = bench->add_subcommand("run", "Run the full grid from a config file");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--out-dir", out_dir, "Directory for results (default: current directory)");
  run->add_option("--workers", workers, "Worker threads (0: hardware threads)");
  run->add_flag("--timing-in-csv", timing_in_csv, "Write wall-clock ms into the CSV (breaks byte-identical reruns)");

  std::string cell_shape = "circle";
  std::string cell_method;
  double cell_diameter = 0.0;
  int cell_trials = 0;
  int cell_seed = 0;
  bool cell_seed_set = false;
  auto* cell = bench->add_subcommand("cell", "Run one (shape, diameter, method) cell");
  cell->add_option("--shape", cell_shape, "circle or rect");
  cell->add_option("--diameter", cell_diameter, "Apparent diameter at the wide view, px")->required();
  cell->add_option("--method", cell_method, "shape, texture or background")->required();
  cell->add_option("--config", config_path, "Experiment config (JSON)");
  cell->add_option("--trials", cell_trials, "Override the trial count");
  auto* seed_opt = cell->add_option("--base-seed", cell_seed, "Override the base seed");

  auto* defaults = bench->add_subcommand("defaults", "Print the default experiment config");

  // detect
  DetectArgs da;
  auto* detect = app.add_subcommand("detect", "Run one detection episode");
  detect->add_option("--method", da.method, "shape, texture or background")->required();
  detect->add_option("--scene", da.scene_dir, "Scene directory written by 'scene gen'");
  detect->add_option("--shape", da.shape, "circle or rect (generated scene)");
  detect->add_option("--diameter", da.diameter, "Apparent diameter at the wide view, px (generated scene)");
  detect->add_option("--seed", da.seed, "Scene and pose seed");
  detect->add_option("--meter-id", da.meter_id, "Target meter id");
  detect->add_option("--annotation-dir", da.annotation_dir, "Annotation directory for the background method");
  detect->add_option("--template", da.template_png, "Template PNG with a .json sidecar");
  detect->add_option("--out-dir", da.out_dir, "Dump intermediate views here");
  detect->add_option("--config", da.config, "Experiment config supplying method parameters");

  // scene gen
  auto* scene = app.add_subcommand("scene", "Synthetic scenes");
  scene->require_subcommand(1);
  int gen_seed = 0;
  std::string gen_shape = "circle";
  double gen_diameter = 160.0;
  double gen_clutter = 0.5;
  std::string gen_out;
  auto* gen = scene->add_subcommand("gen", "Generate a scene with ground truth");
  gen->add_option("--seed", gen_seed, "Scene seed");
  gen->add_option("--shape", gen_shape, "circle or rect");
  gen->add_option("--diameter", gen_diameter, "Apparent diameter at the wide view, px");
  gen->add_option("--clutter", gen_clutter, "Background clutter in [0, 1]");
  gen->add_option("--out", gen_out, "Output directory")->required();

  // annotate make
  auto* annotate = app.add_subcommand("annotate", "Background annotations");
  annotate->require_subcommand(1);
  std::string ann_scene;
  int ann_meter = 0;
  std::string ann_out;
  auto* make = annotate->add_subcommand("make", "Derive an annotation from a simulated wide shot");
  make->add_option("--scene", ann_scene, "Scene directory")->required();
  make->add_option("--meter-id", ann_meter, "Meter to annotate")->required();
  make->add_option("--out", ann_out, "Output directory (default: <scene>/annotation)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  cell_seed_set = seed_opt->count() > 0;

  try {
    if (*run) {
      ExperimentConfig cfg = load_experiment_config(config_path);
      if (workers >= 0) cfg.workers = workers;
      const ResultTable table = run_grid(cfg, [](const CellResult& c) {
        std::fprintf(stderr, "%s %g %s: %s\n", to_string(c.shape), c.diameter, to_string(c.method),
                     c.skipped ? "-" : (std::to_string(c.successes) + "/" + std::to_string(c.trials)).c_str());
      });
      const fs::path base = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
      write_text(base / cfg.csv_path, to_csv(table, timing_in_csv));
      write_text(base / cfg.markdown_path, to_markdown(table, cfg));
      write_text(base / cfg.timing_path, timing_csv(table));
      std::printf("%s", to_markdown(table, cfg).c_str());
      std::printf("total %.1f s\n", table.total_ms / 1000.0);
      return 0;
    }
    if (*cell) {
      ExperimentConfig cfg = config_or_defaults(config_path);
      if (cell_trials > 0) cfg.trials = cell_trials;
      if (cell_seed_set) cfg.base_seed = cell_seed;
      const CellResult c = run_cell(cfg, parse_meter_shape(cell_shape), cell_diameter, parse_method(cell_method));
      for (const auto& r : c.runs) {
        std::printf("seed %d found %d iou %.4f success %d ms %.1f %s\n", r.seed, r.found ? 1 : 0, r.iou,
                    r.success ? 1 : 0, r.ms, r.reason.c_str());
      }
      std::printf("%s %g %s: %d/%d mean_iou %.4f\n", to_string(c.shape), c.diameter, to_string(c.method),
                  c.successes, c.trials, c.mean_iou);
      return 0;
    }
    if (*defaults) {
      std::printf("%s", experiment_config_to_json(ExperimentConfig{}).c_str());
      return 0;
    }
    if (*detect) return run_detect(da);
    if (*gen) {
      const SceneSpec s = generate_scene(gen_seed, parse_meter_shape(gen_shape), gen_diameter, gen_clutter);
      save_scene(s, gen_out);
      write_png((fs::path(gen_out) / "wide.png").string(), render_view(s, s.nominal_pose, s.nominal_ptz));
      save_template(template_from_scene(s, 0), (fs::path(gen_out) / "template.png").string());
      std::vector<MeterMapEntry> map;
      for (const auto& m : s.meters) map.push_back(map_entry_from_scene(s, m.id));
      save_meter_map(map, (fs::path(gen_out) / "map.json").string());
      const GroundTruth gt = ground_truth(s, 0, s.nominal_pose, s.nominal_ptz);
      std::printf("scene written to %s; meter 0 at wide view: %.1f %.1f %.1f %.1f\n", gen_out.c_str(), gt.region.x,
                  gt.region.y, gt.region.w, gt.region.h);
      return 0;
    }
    if (*make) {
      const SceneSpec s = load_scene(ann_scene);
      s.meter(ann_meter);
      BackgroundAnnotation ann = annotation_from_scene(s, s.nominal_ptz);
      ann.meter(ann_meter);
      const std::string dir = ann_out.empty() ? (fs::path(ann_scene) / "annotation").string() : ann_out;
      save_annotation(ann, dir);
      std::printf("annotation written to %s\n", dir.c_str());
      return 0;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    const bool config_error = e.code() == ErrorCode::kConfig || e.code() == ErrorCode::kNothingToRun;
    if (config_error) std::fprintf(stderr, "%s", app.help().c_str());
    return config_error ? 2 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

}  // namespace gscout
