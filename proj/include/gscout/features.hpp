#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gscout/imgcore.hpp"

namespace gscout {

struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  double scale = 1.0;        // sigma of the detection level, source pixels
  double orientation = 0.0;  // radians, [0, 2*pi)
  double response = 0.0;     // |DoG| at the refined extremum
  int octave = 0;
  double octave_sigma = 0.0;  // sigma relative to the octave grid
  int layer = 0;
};

using KeypointSet = std::vector<Keypoint>;

inline constexpr int kDescriptorSize = 128;
using Descriptor = std::array<float, kDescriptorSize>;

/// Descriptors aligned with the keypoints that survived description.
struct DescriptorSet {
  KeypointSet keypoints;
  std::vector<Descriptor> descriptors;
  int dropped = 0;  // keypoints too close to the border (or degenerate)

  std::size_t size() const { return descriptors.size(); }
  std::vector<Vec2> positions() const;
};

struct SiftParams {
  int octaves = 4;
  int scales_per_octave = 3;
  double base_sigma = 1.6;
  double assumed_blur = 0.5;
  double contrast_threshold = 0.03;  // on [0,1] intensities
  double edge_ratio = 10.0;
  double orientation_peak_ratio = 0.8;
};

/// DoG extrema with sub-pixel refinement, contrast/edge rejection and
/// 36-bin orientation assignment. At most max_count strongest by |DoG|.
/// Throws kImageTooSmall below 16x16.
KeypointSet detect_keypoints(const GrayImage& img, int max_count = 1000,
                             const SiftParams& params = {});

/// 4x4x8 gradient histograms in the keypoint frame, normalized, clipped at
/// 0.2 and renormalized so both the unit-norm and clip bounds hold.
DescriptorSet compute_descriptors(const GrayImage& img, const KeypointSet& kps,
                                  const SiftParams& params = {});

/// detect_keypoints + compute_descriptors sharing one scale space.
DescriptorSet extract_features(const GrayImage& img, int max_count = 1000,
                               const SiftParams& params = {});

struct Match {
  int query = 0;
  int train = 0;
  double distance = 0.0;

  friend bool operator==(const Match&, const Match&) = default;
};

struct MatchSet {
  std::vector<Match> pairs;
  bool insufficient_train_set = false;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
  std::vector<Match> sorted_by_distance() const;
};

/// Nearest/second-nearest ratio test. Exhaustive Euclidean scan with
/// partial-distance early exit; the result does not depend on `threads`.
MatchSet match_ratio(std::span<const Descriptor> query, std::span<const Descriptor> train,
                     double ratio = 0.75, int threads = 1);

enum class ConcentrationStrategy {
  kFractionWithinRadius,  // plain centroid, fraction within 1.5 r
  kMeanShift,             // centroid refined by mean shift in a 1.5 r window
};

struct Concentration {
  double score = 0.0;
  Vec2 centroid = Vec2::Zero();
  bool has_centroid = false;
};

/// frame_points is indexed by Match::train.
Concentration concentration_score(const MatchSet& matches, std::span<const Vec2> frame_points,
                                  double expected_radius,
                                  ConcentrationStrategy strategy = ConcentrationStrategy::kFractionWithinRadius);

enum class TransformModel { kSimilarity, kHomography };

struct RansacParams {
  TransformModel model = TransformModel::kHomography;
  double inlier_px = 3.0;
  int iterations = 1000;
  int min_inliers = 8;
};

struct RobustTransform {
  Homography transform;  // maps src -> dst
  std::vector<bool> inlier_mask;
  int inliers = 0;
};

/// RANSAC over point correspondences, least-squares refit on the inliers.
/// Throws kNoRobustTransform when consensus stays below min_inliers.
RobustTransform estimate_transform_ransac(std::span<const Vec2> src, std::span<const Vec2> dst,
                                          const RansacParams& params, std::mt19937_64& rng);

/// Convenience: src = query keypoints, dst = train keypoints of each match.
RobustTransform estimate_transform_ransac(const MatchSet& matches, std::span<const Vec2> query_points,
                                          std::span<const Vec2> train_points,
                                          const RansacParams& params, std::mt19937_64& rng);

/// Least-squares fits used by the RANSAC refit step (exposed for tests).
Homography fit_similarity(std::span<const Vec2> src, std::span<const Vec2> dst);
Homography fit_homography(std::span<const Vec2> src, std::span<const Vec2> dst);

// Descriptor blob: "GSDS", u32 count, count * 128 f32; little-endian.
void write_descriptor_blob(std::ostream& out, std::span<const Descriptor> descriptors);
std::vector<Descriptor> read_descriptor_blob(std::istream& in);
void save_descriptors(const std::string& path, std::span<const Descriptor> descriptors);
std::vector<Descriptor> load_descriptors(const std::string& path);

}  // namespace gscout
