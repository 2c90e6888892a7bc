#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "gscout/error.hpp"
#include "gscout/png_io.hpp"
#include "gscout/ptzsim.hpp"
#include "json_util.hpp"

namespace gscout {

namespace fs = std::filesystem;
using nlohmann::json;

void save_scene(const SceneSpec& scene, const std::string& dir) {
  fs::create_directories(dir);
  write_png((fs::path(dir) / "wall.png").string(), scene.wall());

  json meters = json::array();
  for (const auto& m : scene.meters) {
    const GroundTruth gt = ground_truth(scene, m.id, scene.nominal_pose, scene.nominal_ptz);
    meters.push_back({{"id", m.id},
                      {"shape", to_string(m.shape)},
                      {"center", {m.center.x(), m.center.y()}},
                      {"diameter", m.diameter},
                      {"height", m.height},
                      {"needle_angle", m.needle_angle},
                      {"ground_truth_wide", detail::region_to_json(gt.region)}});
  }
  json doc = {{"schema", "gauge-scout-scene/1"},
              {"seed", scene.seed},
              {"shape", to_string(scene.shape)},
              {"meter_diameter_at_wide", scene.meter_diameter_at_wide},
              {"clutter_level", scene.clutter_level},
              {"pixels_per_meter", scene.pixels_per_meter},
              {"wall", {{"png", "wall.png"}, {"width", scene.wall().width()}, {"height", scene.wall().height()}}},
              {"camera", detail::camera_to_json(scene.camera)},
              {"nominal_pose", detail::pose_to_json(scene.nominal_pose)},
              {"nominal_ptz", detail::ptz_to_json(scene.nominal_ptz)},
              {"meters", meters}};
  std::ofstream out(fs::path(dir) / "scene.json");
  if (!out) throw Error(ErrorCode::kIo, "cannot write scene.json in " + dir);
  out << doc.dump(2) << "\n";
}

SceneSpec load_scene(const std::string& dir) {
  const json doc = detail::read_json_file((fs::path(dir) / "scene.json").string());
  try {
    if (doc.at("schema") != "gauge-scout-scene/1") {
      throw Error(ErrorCode::kConfig, "unsupported scene schema " + doc.at("schema").dump());
    }
    SceneSpec scene;
    scene.seed = doc.at("seed").get<int>();
    scene.shape = parse_meter_shape(doc.at("shape").get<std::string>());
    scene.meter_diameter_at_wide = doc.at("meter_diameter_at_wide").get<double>();
    scene.clutter_level = doc.at("clutter_level").get<double>();
    scene.pixels_per_meter = doc.at("pixels_per_meter").get<double>();
    scene.camera = detail::camera_from_json(doc.at("camera"));
    scene.nominal_pose = detail::pose_from_json(doc.at("nominal_pose"));
    scene.nominal_ptz = detail::ptz_from_json(doc.at("nominal_ptz"));
    for (const auto& jm : doc.at("meters")) {
      MeterPlacement m;
      m.id = jm.at("id").get<int>();
      m.shape = parse_meter_shape(jm.at("shape").get<std::string>());
      m.center = Vec2(jm.at("center").at(0).get<double>(), jm.at("center").at(1).get<double>());
      m.diameter = jm.at("diameter").get<double>();
      m.height = jm.at("height").get<double>();
      m.needle_angle = jm.at("needle_angle").get<double>();
      scene.meters.push_back(m);
    }
    const std::string png = doc.at("wall").at("png").get<std::string>();
    scene.mips = build_mips(read_png((fs::path(dir) / png).string()));
    return scene;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("malformed scene.json: ") + e.what());
  }
}

}  // namespace gscout
