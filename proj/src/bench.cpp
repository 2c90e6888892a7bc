#include "gscout/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "gscout/error.hpp"
#include "json_util.hpp"

namespace gscout {
namespace {

using nlohmann::json;

constexpr const char* kSchema = "gauge-scout-experiment/1";

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::kConfig, where + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.count(key)) throw Error(ErrorCode::kConfig, "unknown key '" + key + "' in " + where);
  }
}

json ransac_to_json(const RansacParams& p) {
  return {{"inlier_px", p.inlier_px}, {"iterations", p.iterations}, {"min_inliers", p.min_inliers}};
}

RansacParams ransac_from_json(const json& j, RansacParams p, const std::string& where) {
  check_keys(j, {"inlier_px", "iterations", "min_inliers"}, where);
  p.inlier_px = j.value("inlier_px", p.inlier_px);
  p.iterations = j.value("iterations", p.iterations);
  p.min_inliers = j.value("min_inliers", p.min_inliers);
  if (!(p.inlier_px > 0.0) || p.iterations < 1 || p.min_inliers < 2) {
    throw Error(ErrorCode::kConfig, "invalid RANSAC parameters in " + where);
  }
  return p;
}

const char* concentration_name(ConcentrationStrategy s) {
  return s == ConcentrationStrategy::kMeanShift ? "mean_shift" : "fraction";
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string diameter_str(double d) { return fmt("%g", d); }

struct Task {
  MeterShape shape;
  double diameter;
  int trial;
};

// Runs every requested method of one (shape, diameter, trial) on a shared
// scene. Entries for skipped methods stay default.
std::vector<TrialResult> run_scene(const ExperimentConfig& cfg, MeterShape shape, double diameter, int trial,
                                   const std::vector<Method>& methods) {
  std::vector<TrialResult> out(methods.size());
  const int seed = cfg.base_seed + trial;
  for (auto& r : out) r.seed = seed;
  SceneSpec scene;
  MeterTemplate tmpl;
  RobotPose pose;
  try {
    scene = generate_scene(seed, shape, diameter, cfg.clutter, cfg.scene);
    pose = perturb_pose(scene.nominal_pose, static_cast<std::uint64_t>(seed), cfg.sigma_xy,
                        cfg.sigma_yaw_deg * std::numbers::pi / 180.0);
    tmpl = template_from_scene(scene, 0, cfg.template_diameter);
  } catch (const std::exception& e) {
    for (auto& r : out) r.reason = e.what();
    return out;
  }
  for (std::size_t i = 0; i < methods.size(); ++i) {
    TrialResult& r = out[i];
    SimulatedCamera camera(scene, pose);
    try {
      DetectionResult det;
      switch (methods[i]) {
        case Method::kShape:
          det = detect_shape(camera, scene.nominal_ptz, tmpl, cfg.shape);
          break;
        case Method::kTexture: {
          TextureConfig tc = cfg.texture;
          tc.sigma_xy = cfg.sigma_xy;
          tc.sigma_yaw = cfg.sigma_yaw_deg * std::numbers::pi / 180.0;
          // Candidate draws use their own stream, never the true-pose seed.
          tc.candidate_seed = texture_candidate_seed(seed);
          det = detect_texture(camera, scene.nominal_pose, scene.nominal_ptz, tmpl, map_entry_from_scene(scene, 0),
                               tc);
          break;
        }
        case Method::kBackground: {
          const BackgroundAnnotation ann = annotation_from_scene(scene, scene.nominal_ptz);
          BackgroundConfig bc = cfg.background;
          bc.seed = background_ransac_seed(seed);
          det = detect_background(camera, scene.nominal_ptz, ann, 0, tmpl, bc);
          break;
        }
      }
      r.found = det.found;
      r.ms = det.ms;
      r.reason = det.reason;
      if (det.found) {
        const GroundTruth gt = ground_truth(scene, 0, pose, det.final_ptz);
        r.iou = iou(det.region, gt.region);
        r.success = r.iou >= cfg.success_iou;
      }
    } catch (const std::exception& e) {
      r.reason = e.what();
    }
  }
  return out;
}

CellResult summarize(MeterShape shape, double diameter, Method method, std::vector<TrialResult> runs) {
  CellResult c;
  c.shape = shape;
  c.diameter = diameter;
  c.method = method;
  c.trials = static_cast<int>(runs.size());
  for (const auto& r : runs) {
    c.successes += r.success ? 1 : 0;
    c.mean_iou += r.iou;
    c.mean_ms += r.ms;
  }
  if (c.trials > 0) {
    c.mean_iou /= c.trials;
    c.mean_ms /= c.trials;
  }
  c.runs = std::move(runs);
  return c;
}

}  // namespace

const char* to_string(Method m) {
  switch (m) {
    case Method::kShape:
      return "shape";
    case Method::kTexture:
      return "texture";
    case Method::kBackground:
      return "background";
  }
  return "?";
}

Method parse_method(const std::string& s) {
  if (s == "shape") return Method::kShape;
  if (s == "texture") return Method::kTexture;
  if (s == "background") return Method::kBackground;
  throw Error(ErrorCode::kConfig, "unknown method '" + s + "'");
}

bool ExperimentConfig::skipped(MeterShape s, double d, Method m) const {
  return std::any_of(skip.begin(), skip.end(), [&](const SkipEntry& e) {
    return e.shape == s && e.method == m && std::abs(e.diameter - d) < 1e-9;
  });
}

std::string experiment_config_to_json(const ExperimentConfig& c) {
  json shapes = json::array();
  for (auto s : c.shapes) shapes.push_back(to_string(s));
  json methods = json::array();
  for (auto m : c.methods) methods.push_back(to_string(m));
  json skip = json::array();
  for (const auto& e : c.skip) {
    skip.push_back({{"shape", to_string(e.shape)}, {"diameter", e.diameter}, {"method", to_string(e.method)}});
  }
  const json doc = {
      {"schema", kSchema},
      {"shapes", shapes},
      {"diameters", c.diameters},
      {"methods", methods},
      {"trials", c.trials},
      {"base_seed", c.base_seed},
      {"clutter", c.clutter},
      {"success_iou", c.success_iou},
      {"noise", {{"sigma_xy", c.sigma_xy}, {"sigma_yaw_deg", c.sigma_yaw_deg}}},
      {"camera", detail::camera_to_json(c.scene.camera)},
      {"scene",
       {{"nominal_pose", detail::pose_to_json(c.scene.nominal_pose)},
        {"wall_w", c.scene.wall_w},
        {"wall_h", c.scene.wall_h},
        {"supersample", c.scene.supersample},
        {"rect_aspect", c.scene.rect_aspect},
        {"placement_jitter", c.scene.placement_jitter}}},
      {"template", {{"nominal_diameter", c.template_diameter}}},
      {"shape",
       {{"r_min", c.shape.r_min},
        {"r_max", c.shape.r_max},
        {"edge_fraction", c.shape.hough.edge_fraction},
        {"fan_deg", c.shape.hough.fan_deg},
        {"vote_threshold", c.shape.hough.vote_threshold},
        {"max_circles", c.shape.hough.max_circles},
        {"ratio", c.shape.ratio},
        {"margin", c.shape.margin},
        {"min_matches", c.shape.min_matches}}},
      {"texture",
       {{"candidates", c.texture.candidates},
        {"rounds", c.texture.rounds},
        {"sigma_px", c.texture.sigma_px},
        {"eps", c.texture.eps},
        {"prune_ratio", c.texture.prune_ratio},
        {"ratio", c.texture.ratio},
        {"zoom_step", c.texture.zoom_step},
        {"fill_max", c.texture.fill_max},
        {"min_matches", c.texture.min_matches},
        {"concentration", concentration_name(c.texture.concentration)}}},
      {"background",
       {{"ratio", c.background.ratio},
        {"coarse", ransac_to_json(c.background.coarse)},
        {"fine", ransac_to_json(c.background.fine)},
        {"fill", c.background.fill},
        {"search_margin", c.background.search_margin},
        {"min_overlap", c.background.min_overlap},
        {"max_distortion", c.background.max_distortion}}},
      {"skip", skip},
      {"workers", c.workers},
      {"output", {{"csv", c.csv_path}, {"markdown", c.markdown_path}, {"timing", c.timing_path}}},
  };
  return doc.dump(2) + "\n";
}

ExperimentConfig experiment_config_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig c;
  try {
    check_keys(doc,
               {"schema", "shapes", "diameters", "methods", "trials", "base_seed", "clutter", "success_iou", "noise",
                "camera", "scene", "template", "shape", "texture", "background", "skip", "workers", "output"},
               "config");
    if (!doc.contains("schema")) throw Error(ErrorCode::kConfig, "config lacks a \"schema\" key");
    if (doc.at("schema") != kSchema) {
      throw Error(ErrorCode::kConfig, "unsupported config schema " + doc.at("schema").dump());
    }
    if (doc.contains("shapes")) {
      c.shapes.clear();
      for (const auto& s : doc.at("shapes")) c.shapes.push_back(parse_meter_shape(s.get<std::string>()));
    }
    if (doc.contains("diameters")) c.diameters = doc.at("diameters").get<std::vector<double>>();
    if (doc.contains("methods")) {
      c.methods.clear();
      for (const auto& m : doc.at("methods")) c.methods.push_back(parse_method(m.get<std::string>()));
    }
    c.trials = doc.value("trials", c.trials);
    c.base_seed = doc.value("base_seed", c.base_seed);
    c.clutter = doc.value("clutter", c.clutter);
    c.success_iou = doc.value("success_iou", c.success_iou);
    c.workers = doc.value("workers", c.workers);
    if (doc.contains("noise")) {
      const json& n = doc.at("noise");
      check_keys(n, {"sigma_xy", "sigma_yaw_deg"}, "noise");
      c.sigma_xy = n.value("sigma_xy", c.sigma_xy);
      c.sigma_yaw_deg = n.value("sigma_yaw_deg", c.sigma_yaw_deg);
    }
    if (doc.contains("camera")) c.scene.camera = detail::camera_from_json(doc.at("camera"), c.scene.camera);
    if (doc.contains("scene")) {
      const json& s = doc.at("scene");
      check_keys(s, {"nominal_pose", "wall_w", "wall_h", "supersample", "rect_aspect", "placement_jitter"}, "scene");
      if (s.contains("nominal_pose")) c.scene.nominal_pose = detail::pose_from_json(s.at("nominal_pose"));
      c.scene.wall_w = s.value("wall_w", c.scene.wall_w);
      c.scene.wall_h = s.value("wall_h", c.scene.wall_h);
      c.scene.supersample = s.value("supersample", c.scene.supersample);
      c.scene.rect_aspect = s.value("rect_aspect", c.scene.rect_aspect);
      c.scene.placement_jitter = s.value("placement_jitter", c.scene.placement_jitter);
    }
    if (doc.contains("template")) {
      check_keys(doc.at("template"), {"nominal_diameter"}, "template");
      c.template_diameter = doc.at("template").value("nominal_diameter", c.template_diameter);
    }
    if (doc.contains("shape")) {
      const json& s = doc.at("shape");
      check_keys(s,
                 {"r_min", "r_max", "edge_fraction", "fan_deg", "vote_threshold", "max_circles", "ratio", "margin",
                  "min_matches"},
                 "shape");
      c.shape.r_min = s.value("r_min", c.shape.r_min);
      c.shape.r_max = s.value("r_max", c.shape.r_max);
      c.shape.hough.edge_fraction = s.value("edge_fraction", c.shape.hough.edge_fraction);
      c.shape.hough.fan_deg = s.value("fan_deg", c.shape.hough.fan_deg);
      c.shape.hough.vote_threshold = s.value("vote_threshold", c.shape.hough.vote_threshold);
      c.shape.hough.max_circles = s.value("max_circles", c.shape.hough.max_circles);
      c.shape.ratio = s.value("ratio", c.shape.ratio);
      c.shape.margin = s.value("margin", c.shape.margin);
      c.shape.min_matches = s.value("min_matches", c.shape.min_matches);
    }
    if (doc.contains("texture")) {
      const json& t = doc.at("texture");
      check_keys(t,
                 {"candidates", "rounds", "sigma_px", "eps", "prune_ratio", "ratio", "zoom_step", "fill_max",
                  "min_matches", "concentration"},
                 "texture");
      c.texture.candidates = t.value("candidates", c.texture.candidates);
      c.texture.rounds = t.value("rounds", c.texture.rounds);
      c.texture.sigma_px = t.value("sigma_px", c.texture.sigma_px);
      c.texture.eps = t.value("eps", c.texture.eps);
      c.texture.prune_ratio = t.value("prune_ratio", c.texture.prune_ratio);
      c.texture.ratio = t.value("ratio", c.texture.ratio);
      c.texture.zoom_step = t.value("zoom_step", c.texture.zoom_step);
      c.texture.fill_max = t.value("fill_max", c.texture.fill_max);
      c.texture.min_matches = t.value("min_matches", c.texture.min_matches);
      const std::string conc = t.value("concentration", std::string(concentration_name(c.texture.concentration)));
      if (conc == "fraction") {
        c.texture.concentration = ConcentrationStrategy::kFractionWithinRadius;
      } else if (conc == "mean_shift") {
        c.texture.concentration = ConcentrationStrategy::kMeanShift;
      } else {
        throw Error(ErrorCode::kConfig, "unknown concentration strategy '" + conc + "'");
      }
    }
    if (doc.contains("background")) {
      const json& b = doc.at("background");
      check_keys(b, {"ratio", "coarse", "fine", "fill", "search_margin", "min_overlap", "max_distortion"},
                 "background");
      c.background.ratio = b.value("ratio", c.background.ratio);
      if (b.contains("coarse")) c.background.coarse = ransac_from_json(b.at("coarse"), c.background.coarse, "coarse");
      if (b.contains("fine")) c.background.fine = ransac_from_json(b.at("fine"), c.background.fine, "fine");
      c.background.fill = b.value("fill", c.background.fill);
      c.background.search_margin = b.value("search_margin", c.background.search_margin);
      c.background.min_overlap = b.value("min_overlap", c.background.min_overlap);
      c.background.max_distortion = b.value("max_distortion", c.background.max_distortion);
    }
    if (doc.contains("skip")) {
      for (const auto& e : doc.at("skip")) {
        check_keys(e, {"shape", "diameter", "method"}, "skip entry");
        c.skip.push_back({parse_meter_shape(e.at("shape").get<std::string>()), e.at("diameter").get<double>(),
                          parse_method(e.at("method").get<std::string>())});
      }
    }
    if (doc.contains("output")) {
      const json& o = doc.at("output");
      check_keys(o, {"csv", "markdown", "timing"}, "output");
      c.csv_path = o.value("csv", c.csv_path);
      c.markdown_path = o.value("markdown", c.markdown_path);
      c.timing_path = o.value("timing", c.timing_path);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("malformed config: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfig) throw;
    throw Error(ErrorCode::kConfig, e.what());
  }

  if (c.trials < 1) throw Error(ErrorCode::kConfig, "trials must be >= 1");
  for (std::size_t i = 0; i < c.diameters.size(); ++i) {
    if (!(c.diameters[i] > 0.0)) throw Error(ErrorCode::kConfig, "diameters must be positive");
    if (i > 0 && !(c.diameters[i] < c.diameters[i - 1])) {
      throw Error(ErrorCode::kConfig, "diameters must be strictly descending");
    }
  }
  if (!(c.success_iou > 0.0 && c.success_iou <= 1.0)) throw Error(ErrorCode::kConfig, "success_iou must be in (0, 1]");
  if (c.sigma_xy < 0.0 || c.sigma_yaw_deg < 0.0) throw Error(ErrorCode::kConfig, "noise sigmas must be >= 0");
  if (c.texture.candidates < 1 || c.texture.rounds < 1) {
    throw Error(ErrorCode::kConfig, "texture needs candidates >= 1 and rounds >= 1");
  }
  if (!(c.background.max_distortion >= 1.0)) throw Error(ErrorCode::kConfig, "max_distortion must be >= 1");
  if (c.workers < 0) throw Error(ErrorCode::kConfig, "workers must be >= 0");
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return experiment_config_from_json(detail::read_json_file(path).dump());
}

std::uint64_t texture_candidate_seed(int trial_seed) {
  return splitmix(static_cast<std::uint64_t>(trial_seed) ^ 0x7e47u);
}

std::uint64_t background_ransac_seed(int trial_seed) {
  return splitmix(static_cast<std::uint64_t>(trial_seed) ^ 0xb6u);
}

TrialResult run_trial(const ExperimentConfig& cfg, MeterShape shape, double diameter, Method method, int trial) {
  return run_scene(cfg, shape, diameter, trial, {method}).front();
}

CellResult run_cell(const ExperimentConfig& cfg, MeterShape shape, double diameter, Method method) {
  std::vector<TrialResult> runs;
  for (int t = 0; t < cfg.trials; ++t) runs.push_back(run_trial(cfg, shape, diameter, method, t));
  return summarize(shape, diameter, method, std::move(runs));
}

ResultTable run_grid(const ExperimentConfig& cfg, const std::function<void(const CellResult&)>& on_cell) {
  if (cfg.methods.empty() || cfg.shapes.empty() || cfg.diameters.empty()) {
    throw Error(ErrorCode::kNothingToRun, "no shapes, diameters or methods requested");
  }
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t nm = cfg.methods.size();
  const std::size_t nd = cfg.diameters.size();
  const std::size_t nt = static_cast<std::size_t>(cfg.trials);

  std::vector<Task> tasks;
  for (auto s : cfg.shapes) {
    for (double d : cfg.diameters) {
      for (int t = 0; t < cfg.trials; ++t) tasks.push_back({s, d, t});
    }
  }
  // results[task][method]
  std::vector<std::vector<TrialResult>> results(tasks.size());
  std::vector<int> remaining(cfg.shapes.size() * nd, cfg.trials);
  std::mutex mu;
  std::atomic<std::size_t> next{0};

  const auto cell_of = [&](std::size_t shape_idx, std::size_t d_idx, std::size_t m) {
    std::vector<TrialResult> runs;
    for (std::size_t t = 0; t < nt; ++t) runs.push_back(results[(shape_idx * nd + d_idx) * nt + t][m]);
    CellResult c = summarize(cfg.shapes[shape_idx], cfg.diameters[d_idx], cfg.methods[m], std::move(runs));
    if (cfg.skipped(c.shape, c.diameter, c.method)) {
      c = CellResult{c.shape, c.diameter, c.method, true, 0, 0, 0.0, 0.0, {}};
    }
    return c;
  };

  const auto worker = [&]() {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      const Task& task = tasks[i];
      std::vector<Method> todo;
      for (auto m : cfg.methods) {
        if (!cfg.skipped(task.shape, task.diameter, m)) todo.push_back(m);
      }
      const std::vector<TrialResult> ran = run_scene(cfg, task.shape, task.diameter, task.trial, todo);
      std::vector<TrialResult> row(nm);
      for (std::size_t m = 0, k = 0; m < nm; ++m) {
        if (!cfg.skipped(task.shape, task.diameter, cfg.methods[m])) row[m] = ran[k++];
      }
      std::lock_guard lock(mu);
      results[i] = std::move(row);
      const std::size_t cell = i / nt;
      if (--remaining[cell] == 0 && on_cell) {
        for (std::size_t m = 0; m < nm; ++m) on_cell(cell_of(cell / nd, cell % nd, m));
      }
    }
  };

  unsigned n = cfg.workers > 0 ? static_cast<unsigned>(cfg.workers) : std::max(1u, std::thread::hardware_concurrency());
  n = std::min<unsigned>(n, static_cast<unsigned>(tasks.size()));
  {
    std::vector<std::jthread> pool;
    for (unsigned k = 1; k < n; ++k) pool.emplace_back(worker);
    worker();
  }

  ResultTable table;
  for (std::size_t s = 0; s < cfg.shapes.size(); ++s) {
    for (std::size_t d = 0; d < nd; ++d) {
      for (std::size_t m = 0; m < nm; ++m) table.cells.push_back(cell_of(s, d, m));
    }
  }
  table.total_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return table;
}

std::string to_csv(const ResultTable& table, bool include_timing) {
  std::ostringstream out;
  out << "shape,diameter_px,method,successes,trials,mean_iou,mean_ms\n";
  for (const auto& c : table.cells) {
    out << to_string(c.shape) << ',' << diameter_str(c.diameter) << ',' << to_string(c.method) << ',';
    if (c.skipped) {
      out << "-,-,-,-\n";
      continue;
    }
    out << c.successes << ',' << c.trials << ',' << fmt("%.4f", c.mean_iou) << ','
        << (include_timing ? fmt("%.1f", c.mean_ms) : std::string("NA")) << '\n';
  }
  return out.str();
}

std::string timing_csv(const ResultTable& table) {
  std::ostringstream out;
  out << "shape,diameter_px,method,mean_ms\n";
  for (const auto& c : table.cells) {
    out << to_string(c.shape) << ',' << diameter_str(c.diameter) << ',' << to_string(c.method) << ','
        << (c.skipped ? std::string("-") : fmt("%.1f", c.mean_ms)) << '\n';
  }
  out << "total,,," << fmt("%.1f", table.total_ms) << '\n';
  return out.str();
}

std::string to_markdown(const ResultTable& table, const ExperimentConfig& cfg) {
  std::ostringstream out;
  for (auto shape : cfg.shapes) {
    // Column widths: method names on the left, one column per diameter.
    std::vector<std::string> header = {"method"};
    for (double d : cfg.diameters) header.push_back(diameter_str(d) + " px");
    std::vector<std::vector<std::string>> rows;
    for (auto m : cfg.methods) {
      std::vector<std::string> row = {to_string(m)};
      for (double d : cfg.diameters) {
        const auto it = std::find_if(table.cells.begin(), table.cells.end(), [&](const CellResult& c) {
          return c.shape == shape && c.method == m && c.diameter == d;
        });
        if (it == table.cells.end() || it->skipped) {
          row.push_back("-");
        } else {
          row.push_back(std::to_string(it->successes) + "/" + std::to_string(it->trials));
        }
      }
      rows.push_back(row);
    }
    std::vector<std::size_t> width(header.size());
    for (std::size_t i = 0; i < header.size(); ++i) {
      width[i] = std::max<std::size_t>(3, header[i].size());
      for (const auto& r : rows) width[i] = std::max(width[i], r[i].size());
    }
    const auto line = [&](const std::vector<std::string>& cells) {
      out << '|';
      for (std::size_t i = 0; i < cells.size(); ++i) {
        out << ' ' << cells[i] << std::string(width[i] - cells[i].size(), ' ') << " |";
      }
      out << '\n';
    };
    out << "### " << to_string(shape) << "\n\n";
    line(header);
    out << '|';
    for (std::size_t w : width) out << std::string(w + 2, '-') << '|';
    out << '\n';
    for (const auto& r : rows) line(r);
    out << '\n';
  }
  out << summary_line(table, cfg) << '\n';
  return out.str();
}

std::string summary_line(const ResultTable& table, const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "smallest fully-detected diameter:";
  for (auto shape : cfg.shapes) {
    std::string best_method = "none";
    double best = 0.0;
    for (auto m : cfg.methods) {
      for (const auto& c : table.cells) {
        if (c.shape != shape || c.method != m || c.skipped || c.trials == 0 || c.successes != c.trials) continue;
        if (best_method == "none" || c.diameter < best) {
          best = c.diameter;
          best_method = to_string(m);
        }
      }
    }
    out << ' ' << to_string(shape) << '=' << best_method;
    if (best_method != "none") out << " (" << diameter_str(best) << " px)";
    out << ';';
  }
  std::string s = out.str();
  s.pop_back();
  return s;
}

}  // namespace gscout
