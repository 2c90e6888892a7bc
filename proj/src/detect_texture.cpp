#include "gscout/detect_texture.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <json.hpp>

#include "gscout/error.hpp"
#include "json_util.hpp"

namespace gscout {

using nlohmann::json;

MeterMapEntry map_entry_from_scene(const SceneSpec& scene, int meter_id) {
  const MeterPlacement& m = scene.meter(meter_id);
  return MeterMapEntry{m.id, scene.scene_to_metric(m.center), m.diameter / scene.pixels_per_meter};
}

void save_meter_map(const std::vector<MeterMapEntry>& entries, const std::string& path) {
  json meters = json::array();
  for (const auto& e : entries) {
    meters.push_back({{"id", e.id}, {"position", {e.position.x(), e.position.y()}}, {"diameter", e.diameter}});
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << json{{"schema", "gauge-scout-map/1"}, {"meters", meters}}.dump(2) << "\n";
}

std::vector<MeterMapEntry> load_meter_map(const std::string& path) {
  const json doc = detail::read_json_file(path);
  std::vector<MeterMapEntry> out;
  try {
    if (doc.at("schema") != "gauge-scout-map/1") throw Error(ErrorCode::kConfig, "unsupported map schema");
    for (const auto& j : doc.at("meters")) {
      MeterMapEntry e;
      e.id = j.at("id").get<int>();
      e.position = Vec2(j.at("position").at(0).get<double>(), j.at("position").at(1).get<double>());
      e.diameter = j.at("diameter").get<double>();
      if (!(e.diameter > 0.0)) throw Error(ErrorCode::kConfig, "map diameter must be positive");
      out.push_back(e);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("malformed meter map: ") + e.what());
  }
  return out;
}

std::vector<PoseCandidate> init_candidates(const RobotPose& nominal, int n, double sigma_xy, double sigma_yaw,
                                           std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "need at least one candidate");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<PoseCandidate> out(static_cast<std::size_t>(n));
  out[0].pose = nominal;
  for (std::size_t i = 1; i < out.size(); ++i) {
    RobotPose p = nominal;
    p.x += sigma_xy * n01(rng);
    p.y += sigma_xy * n01(rng);
    p.yaw += sigma_yaw * n01(rng);
    out[i].pose = p;
  }
  for (auto& c : out) c.weight = 1.0 / n;
  return out;
}

PredictedRegion predict_region(const PoseCandidate& c, const MeterMapEntry& entry, const PtzState& ptz,
                               const CameraConfig& cam) {
  const Homography h = metric_to_view(cam, c.pose, ptz);
  PredictedRegion out;
  std::vector<Vec2> pts;
  constexpr int kSamples = 64;
  for (int i = 0; i < kSamples; ++i) {
    const double a = 2.0 * std::numbers::pi * i / kSamples;
    const Vec2 p = entry.position + 0.5 * entry.diameter * Vec2(std::cos(a), std::sin(a));
    if (h.apply_w(p) <= 0.0) out.out_of_view = true;
    pts.push_back(h.apply(p));
  }
  out.region = bounding_region(pts);
  if (!clip_region(out.region, cam.view_w, cam.view_h).valid()) out.out_of_view = true;
  return out;
}

std::vector<std::size_t> update_weights(std::vector<double>& weights, const std::vector<double>& scores, double eps,
                                        double prune_ratio) {
  if (weights.size() != scores.size()) throw Error(ErrorCode::kInvalidArgument, "weights/scores size mismatch");
  std::vector<double> w(weights.size());
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = weights[i] * (scores[i] + eps);
    total += w[i];
  }
  std::vector<std::size_t> keep;
  if (!(total > 0.0) || !std::isfinite(total)) {
    for (std::size_t i = 0; i < w.size(); ++i) keep.push_back(i);
    return keep;
  }
  double peak = 0.0;
  for (double& v : w) {
    v /= total;
    peak = std::max(peak, v);
  }
  double kept = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] >= prune_ratio * peak) {
      keep.push_back(i);
      kept += w[i];
    }
  }
  weights.clear();
  for (std::size_t i : keep) weights.push_back(w[i] / kept);
  return keep;
}

ScoreOutcome score_candidates(const GrayImage& view, std::vector<PoseCandidate>& cands, const MeterTemplate& tmpl,
                              const MeterMapEntry& entry, const PtzState& ptz, const CameraConfig& cam,
                              const TextureConfig& cfg) {
  if (cands.empty()) throw Error(ErrorCode::kInvalidArgument, "no candidates to score");
  ScoreOutcome out;
  const DescriptorSet feats = extract_features(view);
  out.keypoints = static_cast<int>(feats.size());
  const MatchSet matches = match_ratio(tmpl.features.descriptors, feats.descriptors, cfg.ratio);
  out.matches = static_cast<int>(matches.size());
  out.scores.assign(cands.size(), 0.0);
  if (matches.empty()) {
    out.no_evidence = true;
    return out;
  }
  const std::vector<Vec2> points = feats.positions();
  for (const Match& m : matches.pairs) out.match_points.push_back(points[static_cast<std::size_t>(m.train)]);

  std::vector<PredictedRegion> pred;
  std::size_t lead = 0;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    pred.push_back(predict_region(cands[i], entry, ptz, cam));
    if (cands[i].weight > cands[lead].weight) lead = i;
  }
  out.concentration = concentration_score(matches, points, 0.5 * pred[lead].region.w, cfg.concentration);

  // Where the matched template keypoints sit relative to the meter centre,
  // in template pixels; each candidate scales this into its own view.
  Vec2 offset = Vec2::Zero();
  for (const Match& m : matches.pairs) {
    const Keypoint& k = tmpl.features.keypoints[static_cast<std::size_t>(m.query)];
    offset += Vec2(k.x, k.y) - tmpl.meter_region.center();
  }
  offset /= static_cast<double>(matches.size());

  const double sigma = cfg.sigma_px * ptz.zoom;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (pred[i].out_of_view) continue;
    const double scale = pred[i].region.w / tmpl.nominal_diameter;
    const Vec2 expected = pred[i].region.center() + scale * offset;
    const double d2 = (out.concentration.centroid - expected).squaredNorm();
    out.scores[i] = std::exp(-d2 / (2.0 * sigma * sigma)) * out.concentration.score;
  }

  std::vector<double> w;
  for (const auto& c : cands) w.push_back(c.weight);
  const std::vector<std::size_t> keep = update_weights(w, out.scores, cfg.eps, cfg.prune_ratio);
  std::vector<PoseCandidate> next;
  for (std::size_t k = 0; k < keep.size(); ++k) next.push_back({cands[keep[k]].pose, w[k]});
  cands = std::move(next);
  return out;
}

DetectionResult detect_texture(CameraProvider& camera, const RobotPose& nominal, const PtzState& start,
                               const MeterTemplate& tmpl, const MeterMapEntry& entry, const TextureConfig& cfg) {
  if (cfg.rounds < 1) throw Error(ErrorCode::kInvalidArgument, "rounds must be >= 1");
  const auto t0 = std::chrono::steady_clock::now();
  const CameraConfig& cam = camera.camera();
  DetectionResult res;
  res.method = "texture";
  std::vector<PoseCandidate> cands =
      init_candidates(nominal, cfg.candidates, cfg.sigma_xy, cfg.sigma_yaw, cfg.candidate_seed);
  PtzState ptz = start;
  ScoreOutcome last;
  const auto leader = [&cands]() {
    return std::max_element(cands.begin(), cands.end(),
                            [](const PoseCandidate& a, const PoseCandidate& b) { return a.weight < b.weight; });
  };

  for (int round = 0; round < cfg.rounds; ++round) {
    const GrayImage view = camera.capture(ptz);
    if (cfg.keep_views) res.views.emplace_back("round" + std::to_string(round), view);
    last = score_candidates(view, cands, tmpl, entry, ptz, cam, cfg);
    RoundTrace tr;
    tr.round = round;
    tr.ptz = ptz;
    tr.keypoints = last.keypoints;
    tr.matches = last.matches;
    for (const auto& c : cands) tr.weights.push_back(c.weight);
    if (last.no_evidence) tr.note = "NoEvidence";
    res.trace.push_back(tr);
    if (cands.empty()) {
      res.reason = "CandidatesExhausted";
      break;
    }
    if (round + 1 == cfg.rounds) break;
    // Zoom toward the leading candidate's prediction; the command is the
    // last action of a round, so the final view is the one just scored.
    const PredictedRegion pred = predict_region(*leader(), entry, ptz, cam);
    const double short_side = std::min(cam.view_w, cam.view_h);
    const double size = std::max(pred.region.w, pred.region.h);
    const double factor = std::max(1.0, std::min(cfg.zoom_step, cfg.fill_max * short_side / size));
    ptz = point_zoom_command(pred.region.center(), ptz, factor, cam);
  }

  res.final_ptz = ptz;
  if (!cands.empty()) {
    const PredictedRegion pred = predict_region(*leader(), entry, ptz, cam);
    int inside = 0;
    const Region& r = pred.region;
    for (const Vec2& p : last.match_points) {
      if (p.x() >= r.x && p.x() <= r.x + r.w && p.y() >= r.y && p.y() <= r.y + r.h) ++inside;
    }
    res.region = r;
    res.confidence = leader()->weight * inside / (inside + 10.0);
    if (pred.out_of_view) {
      res.reason = "OutOfView";
    } else if (inside < cfg.min_matches) {
      res.reason = "BelowMinMatches";
    } else {
      res.found = true;
    }
  }
  res.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace gscout
