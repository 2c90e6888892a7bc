#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gscout/detection.hpp"

namespace gscout {

struct PoseCandidate {
  RobotPose pose;
  double weight = 0.0;
};

/// One meter on the site map, in wall-plane meters.
struct MeterMapEntry {
  int id = 0;
  Vec2 position = Vec2::Zero();  // meter centre
  double diameter = 0.0;         // physical diameter, m
};

MeterMapEntry map_entry_from_scene(const SceneSpec& scene, int meter_id);

/// Meter map file: {"schema": "gauge-scout-map/1", "meters": [...]}.
void save_meter_map(const std::vector<MeterMapEntry>& entries, const std::string& path);
std::vector<MeterMapEntry> load_meter_map(const std::string& path);

/// Candidate 0 is the nominal pose; the others are seeded Gaussian draws.
/// Weights start uniform.
std::vector<PoseCandidate> init_candidates(const RobotPose& nominal, int n, double sigma_xy, double sigma_yaw,
                                           std::uint64_t seed);

struct PredictedRegion {
  Region region;
  bool out_of_view = false;  // behind the camera or not intersecting the view
};

/// The meter disk projected through the candidate's camera model.
PredictedRegion predict_region(const PoseCandidate& c, const MeterMapEntry& entry, const PtzState& ptz,
                               const CameraConfig& cam);

/// Multiplicative update w_i <- w_i * (s_i + eps), renormalized, then
/// candidates below prune_ratio * max weight are dropped. Returns the indices
/// of the surviving candidates; `weights` is rewritten to match them. When
/// every product is zero the weights are left unchanged.
std::vector<std::size_t> update_weights(std::vector<double>& weights, const std::vector<double>& scores, double eps,
                                        double prune_ratio);

struct TextureConfig {
  int candidates = 16;
  int rounds = 3;
  double sigma_xy = 0.15;                    // m
  double sigma_yaw = 0.05235987755982989;    // rad (3 degrees)
  std::uint64_t candidate_seed = 0;
  double sigma_px = 40.0;                    // at zoom 1, scaled by zoom
  double eps = 1e-3;
  double prune_ratio = 1e-4;
  double ratio = 0.75;
  double zoom_step = 2.0;                    // predicted diameter grows by this per round
  double fill_max = 0.8;                     // cap on predicted diameter / view short side
  int min_matches = 8;
  ConcentrationStrategy concentration = ConcentrationStrategy::kFractionWithinRadius;
  bool keep_views = false;
};

struct ScoreOutcome {
  bool no_evidence = false;
  int keypoints = 0;
  int matches = 0;
  Concentration concentration;
  std::vector<double> scores;          // raw s_i for the input candidates
  std::vector<Vec2> match_points;      // matched view positions
};

/// Matches the template against the view once and reweights the candidates
/// by how well each one predicts the match centroid. Pruned candidates are
/// removed from `cands`.
ScoreOutcome score_candidates(const GrayImage& view, std::vector<PoseCandidate>& cands, const MeterTemplate& tmpl,
                              const MeterMapEntry& entry, const PtzState& ptz, const CameraConfig& cam,
                              const TextureConfig& cfg);

/// Multi-round texture method starting from `start` (usually the wide view).
DetectionResult detect_texture(CameraProvider& camera, const RobotPose& nominal, const PtzState& start,
                               const MeterTemplate& tmpl, const MeterMapEntry& entry, const TextureConfig& cfg = {});

}  // namespace gscout
