#pragma once

#include <string>

#include <json.hpp>

#include "gscout/imgcore.hpp"
#include "gscout/ptzsim.hpp"

namespace gscout::detail {

nlohmann::json read_json_file(const std::string& path);

nlohmann::json region_to_json(const Region& r);
Region region_from_json(const nlohmann::json& j);

nlohmann::json camera_to_json(const CameraConfig& c);
CameraConfig camera_from_json(const nlohmann::json& j, const CameraConfig& defaults = {});

nlohmann::json pose_to_json(const RobotPose& p);
RobotPose pose_from_json(const nlohmann::json& j, const RobotPose& defaults = {});

nlohmann::json ptz_to_json(const PtzState& p);
PtzState ptz_from_json(const nlohmann::json& j);

}  // namespace gscout::detail
