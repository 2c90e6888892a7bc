#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gscout/detection.hpp"

namespace gscout {

struct AnnotatedMeter {
  int id = 0;
  Region region;  // surround px
};

/// Wide surround image with annotated meter regions and cached features.
struct BackgroundAnnotation {
  GrayImage surround;
  std::vector<AnnotatedMeter> meters;
  DescriptorSet features;

  const AnnotatedMeter& meter(int id) const;
};

BackgroundAnnotation make_annotation(GrayImage surround, std::vector<AnnotatedMeter> meters);

/// Simulation stand-in for the human annotation step: a wide shot at the
/// nominal pose with the true meter regions marked.
BackgroundAnnotation annotation_from_scene(const SceneSpec& scene, const PtzState& ptz);

/// Writes <dir>/annotation.json ("gauge-scout-annotation/1") and <dir>/surround.png.
void save_annotation(const BackgroundAnnotation& ann, const std::string& dir);
BackgroundAnnotation load_annotation(const std::string& dir);

struct BackgroundConfig {
  double ratio = 0.75;
  RansacParams coarse{TransformModel::kHomography, 3.0, 1000, 8};
  RansacParams fine{TransformModel::kSimilarity, 3.0, 1000, 8};
  double fill = 0.5;             // mapped region / view short side after the zoom
  double search_margin = 0.5;    // refine window: coarse region grown by this fraction per side
  double min_overlap = 0.3;      // refined vs coarse IoU below this falls back to coarse
  double max_distortion = 3.0;   // coarse Jacobian singular values at the meter must lie in [1/d, d]
  std::uint64_t seed = 0;        // RANSAC stream
  bool keep_views = false;
};

struct CoarseResult {
  Region region;
  Homography transform;  // surround px -> view px
  int inliers = 0;
  int keypoints = 0;  // extracted from the view
};

/// Registers the surround to the view and maps the annotated region across.
/// Throws kNoRobustTransform when registration fails or the transform
/// stretches the meter neighbourhood beyond cfg.max_distortion.
CoarseResult coarse_localize(const GrayImage& view, const BackgroundAnnotation& ann, int meter_id,
                             const BackgroundConfig& cfg, std::mt19937_64& rng);

struct RefineResult {
  Region region;
  bool coarse_only = false;
  int inliers = 0;
  int keypoints = 0;  // extracted from the view
};

/// Template matching restricted to the grown coarse region; a similarity fit
/// maps the template's meter bounds into the view.
RefineResult refine(const GrayImage& view_zoomed, const MeterTemplate& tmpl, const Region& coarse_region,
                    const BackgroundConfig& cfg, std::mt19937_64& rng);

DetectionResult detect_background(CameraProvider& camera, const PtzState& start, const BackgroundAnnotation& ann,
                                  int meter_id, const MeterTemplate& tmpl, const BackgroundConfig& cfg = {});

}  // namespace gscout
