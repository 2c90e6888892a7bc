#include "json_util.hpp"

#include <fstream>

#include "gscout/error.hpp"

namespace gscout::detail {

using nlohmann::json;

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfig, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kConfig, path + ": " + e.what());
  }
}

json region_to_json(const Region& r) { return {{"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h}}; }

Region region_from_json(const json& j) {
  Region r{j.at("x").get<double>(), j.at("y").get<double>(), j.at("w").get<double>(), j.at("h").get<double>()};
  if (!r.valid()) throw Error(ErrorCode::kConfig, "region must have positive extent");
  return r;
}

json camera_to_json(const CameraConfig& c) {
  return {{"view_w", c.view_w},       {"view_h", c.view_h},
          {"hfov_deg", c.hfov_deg},   {"zoom_max", c.zoom_max},
          {"pan_limit_deg", c.pan_limit_deg}, {"tilt_limit_deg", c.tilt_limit_deg},
          {"blur_sigma", c.blur_sigma}, {"noise_sigma", c.noise_sigma}};
}

CameraConfig camera_from_json(const json& j, const CameraConfig& d) {
  CameraConfig c;
  c.view_w = j.value("view_w", d.view_w);
  c.view_h = j.value("view_h", d.view_h);
  c.hfov_deg = j.value("hfov_deg", d.hfov_deg);
  c.zoom_max = j.value("zoom_max", d.zoom_max);
  c.pan_limit_deg = j.value("pan_limit_deg", d.pan_limit_deg);
  c.tilt_limit_deg = j.value("tilt_limit_deg", d.tilt_limit_deg);
  c.blur_sigma = j.value("blur_sigma", d.blur_sigma);
  c.noise_sigma = j.value("noise_sigma", d.noise_sigma);
  if (c.view_w < 16 || c.view_h < 16 || !(c.hfov_deg > 0.0 && c.hfov_deg < 170.0) || c.zoom_max < 1.0 ||
      c.blur_sigma < 0.0 || c.noise_sigma < 0.0) {
    throw Error(ErrorCode::kConfig, "invalid camera block");
  }
  return c;
}

json pose_to_json(const RobotPose& p) {
  return {{"x", p.x}, {"y", p.y}, {"yaw", p.yaw}, {"standoff", p.standoff}};
}

RobotPose pose_from_json(const json& j, const RobotPose& d) {
  RobotPose p{j.value("x", d.x), j.value("y", d.y), j.value("yaw", d.yaw), j.value("standoff", d.standoff)};
  if (!(p.standoff > 0.0)) throw Error(ErrorCode::kConfig, "standoff must be positive");
  return p;
}

json ptz_to_json(const PtzState& p) { return {{"pan", p.pan}, {"tilt", p.tilt}, {"zoom", p.zoom}}; }

PtzState ptz_from_json(const json& j) {
  return PtzState{j.value("pan", 0.0), j.value("tilt", 0.0), j.value("zoom", 1.0)};
}

}  // namespace gscout::detail
