#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gscout/features.hpp"
#include "gscout/imgcore.hpp"
#include "gscout/ptzsim.hpp"

namespace gscout {

/// Reference meter image with cached features. The features are tied to the
/// image through a content hash so stale caches are detectable.
struct MeterTemplate {
  GrayImage image;
  double nominal_diameter = 160.0;  // meter extent (longer side) inside `image`, px
  Region meter_region;              // meter bounds in template px
  DescriptorSet features;
  std::uint64_t features_hash = 0;

  bool coherent() const;
};

std::uint64_t content_hash(const GrayImage& img);

/// Wraps an image and computes its features. The meter is assumed centred
/// in the image with its longer side spanning nominal_diameter.
MeterTemplate make_template(GrayImage image, double nominal_diameter);
MeterTemplate make_template(GrayImage image, double nominal_diameter, const Region& meter_region);

/// Reference crop of a simulated meter: the meter plus `margin` on each side,
/// resampled so the meter's longer side spans nominal_diameter pixels.
MeterTemplate template_from_scene(const SceneSpec& scene, int meter_id, double nominal_diameter = 160.0,
                                  double margin = 0.2);

/// Writes <path> (PNG) and <path>.json with the nominal diameter.
void save_template(const MeterTemplate& tmpl, const std::string& png_path);
MeterTemplate load_template(const std::string& png_path);

struct RoundTrace {
  int round = 0;
  PtzState ptz;
  int keypoints = 0;
  int matches = 0;
  std::vector<double> weights;
  std::string note;
};

struct DetectionResult {
  bool found = false;
  Region region;  // view coordinates of final_ptz; meaningful iff found
  double confidence = 0.0;
  std::string method;
  std::string reason;
  std::vector<RoundTrace> trace;
  PtzState final_ptz;
  double ms = 0.0;
  /// Intermediate views, filled only when the method config asks for them.
  std::vector<std::pair<std::string, GrayImage>> views;
};

}  // namespace gscout
