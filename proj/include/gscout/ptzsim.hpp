#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gscout/imgcore.hpp"

namespace gscout {

enum class MeterShape { kCircle, kRect };

const char* to_string(MeterShape shape);
MeterShape parse_meter_shape(const std::string& s);

struct CameraConfig {
  int view_w = 640;
  int view_h = 480;
  double hfov_deg = 60.0;  // at zoom 1
  double zoom_max = 30.0;
  double pan_limit_deg = 60.0;
  double tilt_limit_deg = 30.0;
  double blur_sigma = 1.25;  // optical blur, view px
  double noise_sigma = 2.0;  // additive sensor noise, intensity levels

  /// Focal length in pixels at zoom 1.
  double base_focal() const;
  Vec2 principal_point() const { return {0.5 * (view_w - 1), 0.5 * (view_h - 1)}; }
};

struct PtzState {
  double pan = 0.0;   // radians, positive looks right
  double tilt = 0.0;  // radians, positive looks down
  double zoom = 1.0;
};

/// Robot pose in wall-plane coordinates (meters). The wall is the plane at
/// distance `standoff` in front of the robot's nominal heading.
struct RobotPose {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
  double standoff = 5.0;
};

struct MeterPlacement {
  int id = 0;
  MeterShape shape = MeterShape::kCircle;
  Vec2 center = Vec2::Zero();  // scene px
  double diameter = 0.0;       // scene px; longer side for rectangles
  double height = 0.0;         // scene px; equals diameter for circles
  double needle_angle = 0.0;   // radians

  double width() const { return diameter; }
};

/// Synthetic wall with placed meters. The wall texture carries a mip chain
/// for alias-free minification.
struct SceneSpec {
  int seed = 0;
  MeterShape shape = MeterShape::kCircle;
  double meter_diameter_at_wide = 0.0;
  double clutter_level = 0.5;
  double pixels_per_meter = 0.0;
  CameraConfig camera;
  RobotPose nominal_pose;
  PtzState nominal_ptz;
  std::vector<MeterPlacement> meters;
  std::shared_ptr<const std::vector<GrayImage>> mips;  // mips->front() is the wall

  const GrayImage& wall() const { return mips->front(); }
  const MeterPlacement& meter(int id) const;
  /// Wall-plane metric coordinates of a scene pixel (origin at the wall centre).
  Vec2 scene_to_metric(const Vec2& px) const;
  Vec2 metric_to_scene(const Vec2& m) const;
  /// Homography scene px -> wall meters.
  Homography scene_to_metric_h() const;
};

struct SceneOptions {
  CameraConfig camera;
  RobotPose nominal_pose;
  int wall_w = 4096;
  int wall_h = 3200;
  double supersample = 4.0;      // wall px per wide-view px at the nominal pose
  double rect_aspect = 0.5;      // height / width of rectangular meters
  double placement_jitter = 0.1; // max meter offset from view centre, fraction of view size
};

/// True meter footprint in a rendered view.
struct GroundTruth {
  int meter_id = 0;
  Region region;
  bool in_front = true;     // all outline points in front of the camera
  bool fully_in_view = true;
};

/// Deterministic scene: cluttered industrial background plus one meter whose
/// apparent diameter at the nominal pose and zoom 1 is meter_diameter_at_wide.
SceneSpec generate_scene(int seed, MeterShape shape, double meter_diameter_at_wide, double clutter_level,
                         const SceneOptions& options = {});

/// Builds the mip chain for an externally supplied wall texture.
std::shared_ptr<const std::vector<GrayImage>> build_mips(GrayImage wall);

/// Wall meters -> view px for a robot pose and PTZ state.
Homography metric_to_view(const CameraConfig& cam, const RobotPose& pose, const PtzState& ptz);

/// Exact scene px -> view px homography used by render_view.
Homography view_homography(const SceneSpec& scene, const RobotPose& pose, const PtzState& ptz);

GrayImage render_view(const SceneSpec& scene, const RobotPose& pose, const PtzState& ptz);

/// Meter outline (scene px): sampled circle or the four rectangle corners.
std::vector<Vec2> meter_outline(const MeterPlacement& m);

GroundTruth ground_truth(const SceneSpec& scene, int meter_id, const RobotPose& pose, const PtzState& ptz);

/// Seeded Gaussian offsets on x, y and yaw.
RobotPose perturb_pose(const RobotPose& nominal, std::uint64_t seed, double sigma_xy, double sigma_yaw);

/// Re-aim so that `target` (view px) becomes the optical axis, and multiply
/// the zoom by zoom_factor. Pan, tilt and zoom are clamped to the camera limits.
PtzState point_zoom_command(const Vec2& target, const PtzState& current, double zoom_factor,
                            const CameraConfig& cam);

PtzState clamp_ptz(const PtzState& s, const CameraConfig& cam);

/// View px at `from` -> view px at `to` for the same robot pose. The camera
/// only rotates and zooms, so the map is independent of the pose and the scene.
Homography ptz_view_transform(const CameraConfig& cam, const PtzState& from, const PtzState& to);

/// Source of views for the detectors; hardware adapters implement the same
/// two calls.
class CameraProvider {
 public:
  virtual ~CameraProvider() = default;
  virtual GrayImage capture(const PtzState& ptz) = 0;
  virtual const CameraConfig& camera() const = 0;
};

class SimulatedCamera final : public CameraProvider {
 public:
  SimulatedCamera(const SceneSpec& scene, const RobotPose& true_pose)
      : scene_(scene), pose_(true_pose) {}

  GrayImage capture(const PtzState& ptz) override { return render_view(scene_, pose_, ptz); }
  const CameraConfig& camera() const override { return scene_.camera; }
  const RobotPose& true_pose() const { return pose_; }

 private:
  const SceneSpec& scene_;
  RobotPose pose_;
};

/// Writes <dir>/scene.json and <dir>/wall.png.
void save_scene(const SceneSpec& scene, const std::string& dir);
SceneSpec load_scene(const std::string& dir);

}  // namespace gscout
