#include "gscout/detect_background.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <filesystem>
#include <fstream>

#include <Eigen/SVD>
#include <json.hpp>

#include "gscout/error.hpp"
#include "gscout/png_io.hpp"
#include "json_util.hpp"

namespace gscout {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

Region map_region(const Homography& h, const Region& r) {
  const std::array<Vec2, 4> corners = {Vec2(r.x, r.y), Vec2(r.x + r.w, r.y), Vec2(r.x + r.w, r.y + r.h),
                                       Vec2(r.x, r.y + r.h)};
  std::array<Vec2, 4> mapped;
  for (std::size_t i = 0; i < 4; ++i) {
    if (h.apply_w(corners[i]) <= 0.0) return Region{};
    mapped[i] = h.apply(corners[i]);
  }
  return bounding_region(mapped);
}

Eigen::Matrix2d jacobian_at(const Homography& h, const Vec2& p) {
  const Eigen::Matrix3d& m = h.matrix();
  const double w = m(2, 0) * p.x() + m(2, 1) * p.y() + m(2, 2);
  const Vec2 q = h.apply(p);
  Eigen::Matrix2d j;
  for (int r = 0; r < 2; ++r) {
    for (int col = 0; col < 2; ++col) j(r, col) = (m(r, col) - q(r) * m(2, col)) / w;
  }
  return j;
}

Region grow(const Region& r, double fraction) {
  return Region{r.x - fraction * r.w, r.y - fraction * r.h, r.w * (1 + 2 * fraction), r.h * (1 + 2 * fraction)};
}

bool contains(const Region& r, const Vec2& p) {
  return p.x() >= r.x && p.x() <= r.x + r.w && p.y() >= r.y && p.y() <= r.y + r.h;
}

}  // namespace

const AnnotatedMeter& BackgroundAnnotation::meter(int id) const {
  for (const auto& m : meters) {
    if (m.id == id) return m;
  }
  throw Error(ErrorCode::kInvalidArgument, "annotation has no meter " + std::to_string(id));
}

BackgroundAnnotation make_annotation(GrayImage surround, std::vector<AnnotatedMeter> meters) {
  BackgroundAnnotation ann;
  for (const auto& m : meters) {
    const Region c = clip_region(m.region, surround.width(), surround.height());
    if (!m.region.valid() || c.w < m.region.w - 1e-9 || c.h < m.region.h - 1e-9) {
      throw Error(ErrorCode::kInvalidArgument, "annotated region must lie inside the surround image");
    }
  }
  ann.surround = std::move(surround);
  ann.meters = std::move(meters);
  ann.features = extract_features(ann.surround);
  return ann;
}

BackgroundAnnotation annotation_from_scene(const SceneSpec& scene, const PtzState& ptz) {
  GrayImage wide = render_view(scene, scene.nominal_pose, ptz);
  std::vector<AnnotatedMeter> meters;
  for (const auto& m : scene.meters) {
    const GroundTruth gt = ground_truth(scene, m.id, scene.nominal_pose, ptz);
    if (!gt.fully_in_view) continue;
    // Bounds are continuous; clip rounding noise at the image border.
    const Region r = clip_region(gt.region, wide.width(), wide.height());
    meters.push_back({m.id, r});
  }
  return make_annotation(std::move(wide), std::move(meters));
}

void save_annotation(const BackgroundAnnotation& ann, const std::string& dir) {
  fs::create_directories(dir);
  write_png((fs::path(dir) / "surround.png").string(), ann.surround);
  json meters = json::array();
  for (const auto& m : ann.meters) {
    json j = detail::region_to_json(m.region);
    j["id"] = m.id;
    meters.push_back(j);
  }
  const json doc = {{"schema", "gauge-scout-annotation/1"},
                    {"surround", "surround.png"},
                    {"width", ann.surround.width()},
                    {"height", ann.surround.height()},
                    {"meters", meters}};
  std::ofstream out(fs::path(dir) / "annotation.json");
  if (!out) throw Error(ErrorCode::kIo, "cannot write annotation.json in " + dir);
  out << doc.dump(2) << "\n";
}

BackgroundAnnotation load_annotation(const std::string& dir) {
  const json doc = detail::read_json_file((fs::path(dir) / "annotation.json").string());
  std::vector<AnnotatedMeter> meters;
  std::string png;
  try {
    if (doc.at("schema") != "gauge-scout-annotation/1") {
      throw Error(ErrorCode::kConfig, "unsupported annotation schema " + doc.at("schema").dump());
    }
    png = doc.at("surround").get<std::string>();
    for (const auto& j : doc.at("meters")) meters.push_back({j.at("id").get<int>(), detail::region_from_json(j)});
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("malformed annotation.json: ") + e.what());
  }
  return make_annotation(read_png((fs::path(dir) / png).string()), std::move(meters));
}

CoarseResult coarse_localize(const GrayImage& view, const BackgroundAnnotation& ann, int meter_id,
                             const BackgroundConfig& cfg, std::mt19937_64& rng) {
  if (ann.features.size() == 0) throw Error(ErrorCode::kInvalidArgument, "annotation has no features");
  const AnnotatedMeter& target = ann.meter(meter_id);
  const DescriptorSet feats = extract_features(view);
  const MatchSet matches = match_ratio(ann.features.descriptors, feats.descriptors, cfg.ratio);
  if (matches.size() < 4) throw Error(ErrorCode::kNoRobustTransform, "too few surround matches");
  const std::vector<Vec2> src = ann.features.positions();
  const std::vector<Vec2> dst = feats.positions();
  const RobustTransform rt = estimate_transform_ransac(matches, src, dst, cfg.coarse, rng);
  CoarseResult out;
  out.transform = rt.transform;
  out.inliers = rt.inliers;
  out.keypoints = static_cast<int>(feats.size());
  // Surround and view share the PTZ state up to pose error, so the local
  // scale at the meter stays near one. Collapsing fits come from chance
  // consensus among wrong matches.
  const Eigen::Matrix2d jac = jacobian_at(rt.transform, target.region.center());
  const Eigen::Vector2d sv = Eigen::JacobiSVD<Eigen::Matrix2d>(jac).singularValues();
  if (!sv.allFinite() || sv(0) > cfg.max_distortion || sv(1) < 1.0 / cfg.max_distortion) {
    throw Error(ErrorCode::kNoRobustTransform, "registration distorts the meter neighbourhood");
  }
  out.region = map_region(rt.transform, target.region);
  if (!out.region.valid() || !clip_region(out.region, view.width(), view.height()).valid()) {
    throw Error(ErrorCode::kNoRobustTransform, "registered meter region falls outside the view");
  }
  return out;
}

RefineResult refine(const GrayImage& view_zoomed, const MeterTemplate& tmpl, const Region& coarse_region,
                    const BackgroundConfig& cfg, std::mt19937_64& rng) {
  RefineResult out;
  out.region = coarse_region;
  out.coarse_only = true;
  if (tmpl.features.size() < 2) return out;
  const Region window = grow(coarse_region, cfg.search_margin);
  const DescriptorSet feats = extract_features(view_zoomed);
  out.keypoints = static_cast<int>(feats.size());
  std::vector<Descriptor> desc;
  std::vector<Vec2> pts;
  for (std::size_t i = 0; i < feats.size(); ++i) {
    const Vec2 p(feats.keypoints[i].x, feats.keypoints[i].y);
    if (!contains(window, p)) continue;
    desc.push_back(feats.descriptors[i]);
    pts.push_back(p);
  }
  const MatchSet matches = match_ratio(tmpl.features.descriptors, desc, cfg.ratio);
  if (static_cast<int>(matches.size()) < cfg.fine.min_inliers) return out;
  try {
    const RobustTransform rt = estimate_transform_ransac(matches, tmpl.features.positions(), pts, cfg.fine, rng);
    const Region r = map_region(rt.transform, tmpl.meter_region);
    if (!r.valid() || iou(r, coarse_region) < cfg.min_overlap) return out;
    out.region = r;
    out.coarse_only = false;
    out.inliers = rt.inliers;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNoRobustTransform) throw;
  }
  return out;
}

DetectionResult detect_background(CameraProvider& camera, const PtzState& start, const BackgroundAnnotation& ann,
                                  int meter_id, const MeterTemplate& tmpl, const BackgroundConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const CameraConfig& cam = camera.camera();
  std::mt19937_64 rng(cfg.seed);
  DetectionResult res;
  res.method = "background";
  res.final_ptz = start;

  const GrayImage wide = camera.capture(start);
  if (cfg.keep_views) res.views.emplace_back("wide", wide);
  CoarseResult coarse;
  RoundTrace tr;
  tr.ptz = start;
  try {
    coarse = coarse_localize(wide, ann, meter_id, cfg, rng);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNoRobustTransform) throw;
    tr.note = "NoRobustTransform";
    res.trace.push_back(tr);
    res.reason = "NoRobustTransform";
    res.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return res;
  }
  tr.matches = coarse.inliers;
  tr.keypoints = coarse.keypoints;
  tr.note = "coarse";
  res.trace.push_back(tr);

  const double short_side = std::min(cam.view_w, cam.view_h);
  const double factor = cfg.fill * short_side / std::max(coarse.region.w, coarse.region.h);
  const PtzState zoomed_ptz = point_zoom_command(coarse.region.center(), start, factor, cam);
  const GrayImage zoomed = camera.capture(zoomed_ptz);
  if (cfg.keep_views) res.views.emplace_back("zoomed", zoomed);
  const Region coarse_zoomed = map_region(ptz_view_transform(cam, start, zoomed_ptz), coarse.region);
  const RefineResult fine = refine(zoomed, tmpl, coarse_zoomed, cfg, rng);

  RoundTrace tr2;
  tr2.round = 1;
  tr2.ptz = zoomed_ptz;
  tr2.matches = fine.inliers;
  tr2.keypoints = fine.keypoints;
  tr2.note = fine.coarse_only ? "CoarseOnly" : "refined";
  res.trace.push_back(tr2);
  res.found = true;
  res.region = fine.region;
  res.final_ptz = zoomed_ptz;
  res.reason = fine.coarse_only ? "CoarseOnly" : "";
  res.confidence = fine.coarse_only ? 0.5 * coarse.inliers / (coarse.inliers + 10.0)
                                    : fine.inliers / (fine.inliers + 10.0);
  res.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace gscout
