#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "gscout/ptzsim.hpp"

namespace gscout {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

Eigen::Matrix3d rot_y(double a) {
  Eigen::Matrix3d r;
  r << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return r;
}

// Tilt about the camera x axis; positive tilt turns the optical axis down (+y).
Eigen::Matrix3d rot_tilt(double t) {
  Eigen::Matrix3d r;
  r << 1, 0, 0, 0, std::cos(t), std::sin(t), 0, -std::sin(t), std::cos(t);
  return r;
}

Eigen::Matrix3d intrinsics(const CameraConfig& cam, double zoom) {
  const double f = cam.base_focal() * zoom;
  const Vec2 c = cam.principal_point();
  Eigen::Matrix3d k;
  k << f, 0, c.x(), 0, f, c.y(), 0, 0, 1;
  return k;
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t bits(double v) { return std::bit_cast<std::uint64_t>(v); }

double sample_level(const GrayImage& img, double u, double v, int level) {
  const double s = std::ldexp(1.0, level);
  return bilinear_sample(img, (u + 0.5) / s - 0.5, (v + 0.5) / s - 0.5);
}

}  // namespace

Homography metric_to_view(const CameraConfig& cam, const RobotPose& pose, const PtzState& ptz) {
  const Eigen::Matrix3d world_from_cam = rot_y(pose.yaw + ptz.pan) * rot_tilt(ptz.tilt);
  Eigen::Matrix3d offset;
  offset << 1, 0, -pose.x, 0, 1, -pose.y, 0, 0, pose.standoff;
  return Homography(intrinsics(cam, ptz.zoom) * world_from_cam.transpose() * offset);
}

Homography view_homography(const SceneSpec& scene, const RobotPose& pose, const PtzState& ptz) {
  return metric_to_view(scene.camera, pose, ptz) * scene.scene_to_metric_h();
}

GrayImage render_view(const SceneSpec& scene, const RobotPose& pose, const PtzState& ptz) {
  const CameraConfig& cam = scene.camera;
  const Eigen::Matrix3d inv = view_homography(scene, pose, ptz).inverse().matrix();
  const auto& mips = *scene.mips;
  const int last = static_cast<int>(mips.size()) - 1;
  FloatImage out(cam.view_w, cam.view_h);
  for (int y = 0; y < cam.view_h; ++y) {
    for (int x = 0; x < cam.view_w; ++x) {
      const double nu = inv(0, 0) * x + inv(0, 1) * y + inv(0, 2);
      const double nv = inv(1, 0) * x + inv(1, 1) * y + inv(1, 2);
      const double s = inv(2, 0) * x + inv(2, 1) * y + inv(2, 2);
      if (s <= 0.0) continue;
      const double u = nu / s;
      const double v = nv / s;
      // Footprint of one view pixel on the wall, from the map's Jacobian.
      const double dux = (inv(0, 0) - u * inv(2, 0)) / s;
      const double dvx = (inv(1, 0) - v * inv(2, 0)) / s;
      const double duy = (inv(0, 1) - u * inv(2, 1)) / s;
      const double dvy = (inv(1, 1) - v * inv(2, 1)) / s;
      const double footprint = std::max(std::hypot(dux, dvx), std::hypot(duy, dvy));
      double value;
      if (footprint <= 1.0) {
        value = bilinear_sample(mips[0], u, v);
      } else {
        // Box prefilter: n x n samples across the pixel footprint, one level
        // finer than the footprint so each sample's bilinear tent stays small.
        const int l0 = std::clamp(static_cast<int>(std::log2(footprint)) - 1, 0, last);
        const GrayImage& level = mips[static_cast<std::size_t>(l0)];
        value = 0.0;
        constexpr int n = 3;
        for (int j = 0; j < n; ++j) {
          const double oy = (j + 0.5) / n - 0.5;
          for (int i = 0; i < n; ++i) {
            const double ox = (i + 0.5) / n - 0.5;
            value += sample_level(level, u + ox * dux + oy * duy, v + ox * dvx + oy * dvy, l0);
          }
        }
        value /= n * n;
      }
      out.at(x, y) = static_cast<float>(value);
    }
  }
  if (cam.blur_sigma > 0.0) out = gaussian_blur(out, cam.blur_sigma);
  GrayImage img(cam.view_w, cam.view_h);
  // Sensor noise is a pure function of the scene seed, the pose and the PTZ
  // state, so a view renders identically every time.
  std::uint64_t key = splitmix(static_cast<std::uint64_t>(scene.seed) ^ 0x5e45ULL);
  for (double v : {pose.x, pose.y, pose.yaw, pose.standoff, ptz.pan, ptz.tilt, ptz.zoom}) key = splitmix(key ^ bits(v));
  const auto px = img.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    double v = out.data[i];
    if (cam.noise_sigma > 0.0) {
      // Box-Muller from two hashed uniforms.
      const std::uint64_t a = splitmix(key + 2 * i);
      const std::uint64_t b = splitmix(key + 2 * i + 1);
      const double u1 = (static_cast<double>(a >> 11) + 0.5) / 9007199254740992.0;
      const double u2 = static_cast<double>(b >> 11) / 9007199254740992.0;
      v += cam.noise_sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }
    px[i] = to_intensity(v);
  }
  return img;
}

GroundTruth ground_truth(const SceneSpec& scene, int meter_id, const RobotPose& pose, const PtzState& ptz) {
  const MeterPlacement& m = scene.meter(meter_id);
  const Homography h = view_homography(scene, pose, ptz);
  GroundTruth gt;
  gt.meter_id = meter_id;
  std::vector<Vec2> pts;
  for (const Vec2& p : meter_outline(m)) {
    if (h.apply_w(p) <= 0.0) gt.in_front = false;
    pts.push_back(h.apply(p));
  }
  gt.region = bounding_region(pts);
  const auto& cam = scene.camera;
  gt.fully_in_view = gt.in_front && gt.region.x >= -0.5 && gt.region.y >= -0.5 &&
                     gt.region.x + gt.region.w <= cam.view_w - 0.5 && gt.region.y + gt.region.h <= cam.view_h - 0.5;
  return gt;
}

RobotPose perturb_pose(const RobotPose& nominal, std::uint64_t seed, double sigma_xy, double sigma_yaw) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  RobotPose p = nominal;
  p.x += sigma_xy * n01(rng);
  p.y += sigma_xy * n01(rng);
  p.yaw += sigma_yaw * n01(rng);
  return p;
}

PtzState clamp_ptz(const PtzState& s, const CameraConfig& cam) {
  PtzState out = s;
  out.pan = std::clamp(s.pan, -cam.pan_limit_deg * kDeg, cam.pan_limit_deg * kDeg);
  out.tilt = std::clamp(s.tilt, -cam.tilt_limit_deg * kDeg, cam.tilt_limit_deg * kDeg);
  out.zoom = std::clamp(s.zoom, 1.0, cam.zoom_max);
  return out;
}

PtzState point_zoom_command(const Vec2& target, const PtzState& current, double zoom_factor,
                            const CameraConfig& cam) {
  const double f = cam.base_focal() * current.zoom;
  const Vec2 c = cam.principal_point();
  const Eigen::Vector3d ray_cam((target.x() - c.x()) / f, (target.y() - c.y()) / f, 1.0);
  const Eigen::Vector3d ray = rot_y(current.pan) * rot_tilt(current.tilt) * ray_cam;
  PtzState next;
  next.pan = std::atan2(ray.x(), ray.z());
  next.tilt = std::atan2(ray.y(), std::hypot(ray.x(), ray.z()));
  next.zoom = current.zoom * zoom_factor;
  return clamp_ptz(next, cam);
}

Homography ptz_view_transform(const CameraConfig& cam, const PtzState& from, const PtzState& to) {
  const Eigen::Matrix3d r_from = rot_y(from.pan) * rot_tilt(from.tilt);
  const Eigen::Matrix3d r_to = rot_y(to.pan) * rot_tilt(to.tilt);
  return Homography(intrinsics(cam, to.zoom) * r_to.transpose() * r_from * intrinsics(cam, from.zoom).inverse());
}

}  // namespace gscout
