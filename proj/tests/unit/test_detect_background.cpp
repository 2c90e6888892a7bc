#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "gscout/detect_background.hpp"
#include "gscout/error.hpp"
#include "support.hpp"

using namespace gscout;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double center_error(const Region& a, const Region& b) { return (a.center() - b.center()).norm(); }

Region map_corners(const Homography& h, const Region& r) {
  const std::vector<Vec2> pts = {h.apply(Vec2(r.x, r.y)), h.apply(Vec2(r.x + r.w, r.y)),
                                 h.apply(Vec2(r.x + r.w, r.y + r.h)), h.apply(Vec2(r.x, r.y + r.h))};
  return bounding_region(pts);
}

Region shifted(const Region& r, double fx, double fy) { return {r.x + fx * r.w, r.y + fy * r.h, r.w, r.h}; }

}  // namespace

TEST_SUITE("detect_background") {

TEST_CASE("make_annotation validates regions") {
  const GrayImage img = test::blocks_image(200, 150, 4);
  CHECK_THROWS_AS(make_annotation(img, {{0, Region{150, 20, 60, 40}}}), Error);
  CHECK_THROWS_AS(make_annotation(img, {{0, Region{-1, 20, 30, 30}}}), Error);
  CHECK_THROWS_AS(make_annotation(img, {{0, Region{10, 10, 0, 30}}}), Error);
  const BackgroundAnnotation ann = make_annotation(img, {{3, Region{10, 10, 40, 40}}});
  CHECK(ann.meter(3).region.w == 40);
  CHECK(ann.features.size() > 0);
  CHECK_THROWS_AS(ann.meter(1), Error);
}

TEST_CASE("coarse_localize: the surround registers onto itself") {
  const SceneSpec s = generate_scene(0, MeterShape::kCircle, 80, 0.5);
  const BackgroundAnnotation ann = annotation_from_scene(s, s.nominal_ptz);
  std::mt19937_64 rng(1);
  const CoarseResult c = coarse_localize(ann.surround, ann, 0, {}, rng);
  const Region& truth = ann.meter(0).region;
  CHECK(std::abs(c.region.x - truth.x) <= 2.0);
  CHECK(std::abs(c.region.y - truth.y) <= 2.0);
  CHECK(std::abs(c.region.w - truth.w) <= 2.0);
  CHECK(std::abs(c.region.h - truth.h) <= 2.0);
  CHECK(c.inliers >= 50);
}

TEST_CASE("coarse_localize: small meter under pose error") {
  for (int seed = 0; seed < 3; ++seed) {
    const SceneSpec s = generate_scene(seed, MeterShape::kCircle, 40, 0.5);
    const BackgroundAnnotation ann = annotation_from_scene(s, s.nominal_ptz);
    const RobotPose pose = perturb_pose(s.nominal_pose, static_cast<std::uint64_t>(seed), 0.15, 0.05);
    const GrayImage view = render_view(s, pose, s.nominal_ptz);
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
    const CoarseResult c = coarse_localize(view, ann, 0, {}, rng);
    const Region truth = ground_truth(s, 0, pose, s.nominal_ptz).region;
    CHECK(center_error(c.region, truth) < 5.0);
    CHECK(iou(c.region, truth) > 0.7);
  }
}

TEST_CASE("coarse_localize: disjoint views do not register") {
  const SceneSpec s = generate_scene(1, MeterShape::kCircle, 80, 0.5);
  const PtzState left{-20 * kDeg, 0.0, 3.0};
  const PtzState right{20 * kDeg, 0.0, 3.0};
  const BackgroundAnnotation ann =
      make_annotation(render_view(s, s.nominal_pose, left), {{0, Region{280, 200, 80, 80}}});
  const GrayImage view = render_view(s, s.nominal_pose, right);
  std::mt19937_64 rng(0);
  try {
    coarse_localize(view, ann, 0, {}, rng);
    FAIL("expected NoRobustTransform");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNoRobustTransform);
  }
}

TEST_CASE("refine: template image against itself") {
  const SceneSpec s = generate_scene(2, MeterShape::kCircle, 100, 0.5);
  const MeterTemplate tmpl = template_from_scene(s, 0);
  std::mt19937_64 rng(3);
  const RefineResult r = refine(tmpl.image, tmpl, shifted(tmpl.meter_region, 0.1, -0.1), {}, rng);
  CHECK_FALSE(r.coarse_only);
  CHECK(iou(r.region, tmpl.meter_region) >= 0.95);
}

TEST_CASE("refine: zoomed view with the meter filling 40 percent") {
  for (int seed = 0; seed < 3; ++seed) {
    const SceneSpec s = generate_scene(seed, MeterShape::kRect, 80, 0.5);
    const MeterTemplate tmpl = template_from_scene(s, 0);
    const Region wide = ground_truth(s, 0, s.nominal_pose, s.nominal_ptz).region;
    const double factor = 0.4 * 480 / std::max(wide.w, wide.h);
    const PtzState ptz = point_zoom_command(wide.center(), s.nominal_ptz, factor, s.camera);
    const GrayImage view = render_view(s, s.nominal_pose, ptz);
    const Region truth = ground_truth(s, 0, s.nominal_pose, ptz).region;
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
    const RefineResult r = refine(view, tmpl, shifted(truth, 0.12, 0.08), {}, rng);
    CHECK_FALSE(r.coarse_only);
    CHECK(iou(r.region, truth) >= 0.8);
  }
}

TEST_CASE("refine: featureless template falls back to the coarse region") {
  const MeterTemplate blank = make_template(GrayImage(192, 192, 128), 160);
  const Region coarse{200, 150, 120, 120};
  std::mt19937_64 rng(0);
  const RefineResult r = refine(test::blocks_image(640, 480, 9), blank, coarse, {}, rng);
  CHECK(r.coarse_only);
  CHECK(r.region.x == coarse.x);
  CHECK(r.region.w == coarse.w);
}

TEST_CASE("detect_background: self-consistent scene, deterministic") {
  const SceneSpec s = generate_scene(3, MeterShape::kCircle, 60, 0.5);
  const BackgroundAnnotation ann = annotation_from_scene(s, s.nominal_ptz);
  const MeterTemplate tmpl = template_from_scene(s, 0);
  SimulatedCamera cam(s, s.nominal_pose);
  BackgroundConfig cfg;
  cfg.seed = 42;
  cfg.keep_views = true;
  const DetectionResult a = detect_background(cam, s.nominal_ptz, ann, 0, tmpl, cfg);
  REQUIRE(a.found);
  CHECK(a.method == "background");
  CHECK(a.reason.empty());
  CHECK(a.views.size() == 2);
  CHECK(a.trace.size() == 2);
  CHECK(a.final_ptz.zoom > s.nominal_ptz.zoom);
  CHECK(iou(a.region, ground_truth(s, 0, s.nominal_pose, a.final_ptz).region) >= 0.9);

  const DetectionResult b = detect_background(cam, s.nominal_ptz, ann, 0, tmpl, cfg);
  CHECK(b.region.x == a.region.x);
  CHECK(b.region.y == a.region.y);
  CHECK(b.region.w == a.region.w);
  CHECK(b.region.h == a.region.h);
  CHECK(b.confidence == a.confidence);
}

TEST_CASE("detect_background: refinement does not lose to the coarse estimate") {
  for (int seed = 0; seed < 4; ++seed) {
    const SceneSpec s = generate_scene(seed, MeterShape::kCircle, 80, 0.5);
    const BackgroundAnnotation ann = annotation_from_scene(s, s.nominal_ptz);
    const MeterTemplate tmpl = template_from_scene(s, 0);
    const RobotPose pose = perturb_pose(s.nominal_pose, static_cast<std::uint64_t>(seed), 0.15, 0.05);
    SimulatedCamera cam(s, pose);
    BackgroundConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(seed);
    const DetectionResult r = detect_background(cam, s.nominal_ptz, ann, 0, tmpl, cfg);
    REQUIRE(r.found);

    std::mt19937_64 rng(cfg.seed);
    const CoarseResult c = coarse_localize(render_view(s, pose, s.nominal_ptz), ann, 0, cfg, rng);
    const Region coarse_zoomed = map_corners(ptz_view_transform(s.camera, s.nominal_ptz, r.final_ptz), c.region);
    const Region truth = ground_truth(s, 0, pose, r.final_ptz).region;
    CHECK(iou(r.region, truth) + 0.02 >= iou(coarse_zoomed, truth));
  }
}

TEST_CASE("annotation file round trip") {
  const SceneSpec s = generate_scene(4, MeterShape::kRect, 100, 0.5);
  const BackgroundAnnotation ann = annotation_from_scene(s, s.nominal_ptz);
  const auto dir = test::temp_dir("annotation");
  save_annotation(ann, dir.string());
  const BackgroundAnnotation back = load_annotation(dir.string());
  CHECK(back.surround == ann.surround);
  REQUIRE(back.meters.size() == ann.meters.size());
  CHECK(back.meter(0).region.x == doctest::Approx(ann.meter(0).region.x));
  CHECK(back.meter(0).region.h == doctest::Approx(ann.meter(0).region.h));
  CHECK(back.features.descriptors == ann.features.descriptors);

  try {
    load_annotation(test::temp_dir("annotation_empty").string());
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK((e.code() == ErrorCode::kIo || e.code() == ErrorCode::kConfig));
  }
}

}  // TEST_SUITE
