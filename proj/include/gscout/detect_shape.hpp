#pragma once

#include <vector>

#include "gscout/detection.hpp"

namespace gscout {

struct CircleHypothesis {
  double cx = 0.0;
  double cy = 0.0;
  double r = 0.0;
  double votes = 0.0;  // normalized by circumference, [0, 1]
};

struct HoughParams {
  double edge_fraction = 0.2;  // edge iff Sobel magnitude > fraction * max
  double fan_deg = 10.0;       // half-width of the voting fan
  double vote_threshold = 0.4;
  int max_circles = 16;
};

/// Gradient-directed circle Hough transform over a (cx, cy, r) accumulator
/// with 1 px centre cells and 2 px radius bins. Throws kBadRadiusRange unless
/// 4 <= r_min < r_max <= min(w, h) / 2.
std::vector<CircleHypothesis> hough_circles(const GrayImage& img, double r_min, double r_max,
                                            const HoughParams& params = {});

struct CircleScore {
  int match_count = 0;
  Region region;  // circle bounding square in img coordinates
};

/// Crops the circle's bounding square plus `margin`, rescales it to the
/// template's scale and counts ratio-test matches against the template.
CircleScore score_circle(const GrayImage& img, const CircleHypothesis& c, const MeterTemplate& tmpl,
                         double ratio = 0.75, double margin = 0.2);

struct ShapeConfig {
  double r_min = 12.0;
  double r_max = 0.0;  // <= 0: min(w, h) / 3
  HoughParams hough;
  double ratio = 0.75;
  double margin = 0.2;
  int min_matches = 8;
  bool keep_views = false;
};

/// Single-view shape method: Hough proposals filtered by template matching.
DetectionResult detect_shape(const GrayImage& view, const MeterTemplate& tmpl, const ShapeConfig& cfg = {});

/// Episode wrapper: captures the wide view at `ptz` and runs detect_shape.
DetectionResult detect_shape(CameraProvider& camera, const PtzState& ptz, const MeterTemplate& tmpl,
                             const ShapeConfig& cfg = {});

}  // namespace gscout
