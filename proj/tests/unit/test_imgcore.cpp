#include <doctest.h>

#include <cmath>
#include <random>

#include "gscout/error.hpp"
#include "gscout/imgcore.hpp"
#include "gscout/png_io.hpp"
#include "support.hpp"

using namespace gscout;

TEST_SUITE("imgcore") {

TEST_CASE("bilinear_sample on constants, lattice points and a two-pixel ramp") {
  const GrayImage flat(9, 7, 77);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ux(0.0, 8.0), uy(0.0, 6.0);
  for (int i = 0; i < 100; ++i) CHECK(bilinear_sample(flat, ux(rng), uy(rng)) == doctest::Approx(77.0));

  const GrayImage img = test::noise_image(8, 6, 3);
  CHECK(bilinear_sample(img, 3, 4) == img.at(3, 4));
  for (int y = 0; y < 6; ++y) {
    for (int x = 0; x < 8; ++x) CHECK(bilinear_sample(img, x, y) == img.at(x, y));
  }

  const GrayImage ramp(2, 1, std::vector<std::uint8_t>{0, 255});
  CHECK(bilinear_sample(ramp, 0.5, 0.0) == doctest::Approx(127.5));
  CHECK(to_intensity(bilinear_sample(ramp, 0.5, 0.0)) == 128);
}

TEST_CASE("bilinear_sample reads black outside the image") {
  const GrayImage flat(4, 4, 200);
  CHECK(bilinear_sample(flat, -0.5, 1.0) == 0.0);
  CHECK(bilinear_sample(flat, 1.0, 3.5) == 0.0);
  CHECK(bilinear_sample(flat, 10.0, 10.0) == 0.0);
}

TEST_CASE("sobel_gradients: flat, vertical and horizontal steps") {
  const Gradients flat = sobel_gradients(GrayImage(10, 8, 90));
  for (float m : flat.mag.data) CHECK(m == 0.0f);

  // Columns 0..4 dark, 5..9 bright. At (4, y) and (5, y) the kernel sees
  // [0 0 255] and [0 255 255] rows: gx = 4 * 255 = 1020, gy = 0.
  GrayImage v(10, 8, 0);
  for (int y = 0; y < 8; ++y) {
    for (int x = 5; x < 10; ++x) v.at(x, y) = 255;
  }
  const Gradients gv = sobel_gradients(v);
  float max_gx = 0;
  for (float g : gv.gx.data) max_gx = std::max(max_gx, std::abs(g));
  CHECK(max_gx == doctest::Approx(1020.0));
  for (int y = 1; y < 7; ++y) {
    CHECK(gv.gx.at(4, y) == doctest::Approx(1020.0));
    CHECK(gv.gx.at(5, y) == doctest::Approx(1020.0));
    CHECK(gv.gy.at(4, y) == doctest::Approx(0.0));
    CHECK(gv.gx.at(2, y) == 0.0f);
  }
  for (int x = 0; x < 10; ++x) CHECK(gv.mag.at(x, 0) == 0.0f);

  GrayImage h(8, 10, 0);
  for (int y = 5; y < 10; ++y) {
    for (int x = 0; x < 8; ++x) h.at(x, y) = 255;
  }
  const Gradients gh = sobel_gradients(h);
  for (int x = 1; x < 7; ++x) {
    CHECK(gh.gy.at(x, 4) == doctest::Approx(1020.0));
    CHECK(gh.gx.at(x, 4) == doctest::Approx(0.0));
    CHECK(gh.mag.at(x, 4) == doctest::Approx(1020.0));
  }
}

TEST_CASE("sobel_gradients rejects images below 3x3") {
  try {
    sobel_gradients(GrayImage(2, 5, 0));
    FAIL("expected ImageTooSmall");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kImageTooSmall);
  }
}

TEST_CASE("warp_homography: identity, translation and scaling") {
  const GrayImage img = test::noise_image(40, 30, 5);
  CHECK(warp_homography(img, Homography::identity(), 40, 30) == img);

  // dst(p) = src(p - t): content moves right by 10, left strip reads black.
  const GrayImage shifted = warp_homography(img, Homography::translation(10, 0), 40, 30);
  for (int y = 0; y < 30; ++y) {
    for (int x = 0; x < 10; ++x) CHECK(shifted.at(x, y) == 0);
    for (int x = 10; x < 40; ++x) CHECK(shifted.at(x, y) == img.at(x - 10, y));
  }

  const GrayImage up = warp_homography(img, Homography::scaling(2, 2), 40, 30);
  for (int y = 0; y < 30; ++y) {
    for (int x = 0; x < 40; ++x) CHECK(up.at(x, y) == to_intensity(bilinear_sample(img, x / 2.0, y / 2.0)));
  }
}

TEST_CASE("warp_homography rejects singular transforms") {
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  m(0, 0) = 1;
  m(2, 2) = 1;
  try {
    warp_homography(GrayImage(4, 4, 1), Homography(m), 4, 4);
    FAIL("expected SingularTransform");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSingularTransform);
  }
}

TEST_CASE("homography round trip and normalization") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
    m(0, 0) += 0.2 * n(rng);
    m(0, 1) = 0.2 * n(rng);
    m(1, 0) = 0.2 * n(rng);
    m(1, 1) += 0.2 * n(rng);
    m(0, 2) = 50 * n(rng);
    m(1, 2) = 50 * n(rng);
    m(2, 0) = 1e-4 * n(rng);
    m(2, 1) = 1e-4 * n(rng);
    m *= 1.0 + std::abs(n(rng));  // unnormalized storage
    const Homography h(m);
    if (!h.invertible()) continue;
    const Homography hn = h.normalized();
    CHECK(hn.matrix()(2, 2) == doctest::Approx(1.0));
    CHECK((hn.normalized().matrix() - hn.matrix()).norm() < 1e-12);
    const Region r{10, 20, 100, 60};
    const Homography inv = h.inverse();
    for (const Vec2& p : {Vec2(r.x, r.y), Vec2(r.x + r.w, r.y), Vec2(r.x + r.w, r.y + r.h), Vec2(r.x, r.y + r.h)}) {
      CHECK((inv.apply(h.apply(p)) - p).norm() < 0.5);
    }
  }
}

TEST_CASE("iou: hand-computed values and symmetry") {
  CHECK(iou({0, 0, 10, 10}, {0, 0, 10, 10}) == doctest::Approx(1.0));
  CHECK(iou({0, 0, 10, 10}, {20, 0, 5, 5}) == 0.0);
  CHECK(iou({0, 0, 10, 10}, {5, 0, 10, 10}) == doctest::Approx(50.0 / 150.0));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 100), s(1, 50);
  for (int i = 0; i < 1000; ++i) {
    const Region a{u(rng), u(rng), s(rng), s(rng)};
    const Region b{u(rng), u(rng), s(rng), s(rng)};
    const double v = iou(a, b);
    CHECK(v == iou(b, a));
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("region helpers") {
  const std::vector<Vec2> pts = {Vec2(3, 4), Vec2(-1, 10), Vec2(7, 2)};
  const Region b = bounding_region(pts);
  CHECK(b.x == -1);
  CHECK(b.y == 2);
  CHECK(b.w == 8);
  CHECK(b.h == 8);
  const Region c = clip_region({-5, -5, 10, 10}, 20, 20);
  CHECK(c.x == 0);
  CHECK(c.w == 5);
  CHECK_FALSE(clip_region({30, 30, 5, 5}, 20, 20).valid());
}

TEST_CASE("crop, resize and downsample") {
  const GrayImage img = test::noise_image(16, 12, 8);
  const GrayImage c = crop(img, -2, 3, 6, 4);
  CHECK(c.at(0, 0) == 0);
  CHECK(c.at(2, 0) == img.at(0, 3));
  CHECK(c.at(5, 3) == img.at(3, 6));

  const GrayImage flat(30, 20, 140);
  const GrayImage small = resize(flat, 7, 5);
  for (auto p : small.pixels()) CHECK(p == 140);

  GrayImage q(4, 2, std::vector<std::uint8_t>{0, 4, 8, 8, 2, 6, 8, 8});
  const GrayImage d = downsample2(q);
  CHECK(d.width() == 2);
  CHECK(d.height() == 1);
  CHECK(d.at(0, 0) == 3);
  CHECK(d.at(1, 0) == 8);
}

TEST_CASE("gaussian_blur keeps constants and mass") {
  const FloatImage f = to_float(GrayImage(20, 20, 100), 1.0f);
  const FloatImage g = gaussian_blur(f, 2.0);
  for (float v : g.data) CHECK(v == doctest::Approx(100.0f));
  FloatImage impulse(41, 41, 0.0f);
  impulse.at(20, 20) = 1.0f;
  const FloatImage b = gaussian_blur(impulse, 1.5);
  double sum = 0;
  for (float v : b.data) sum += v;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(b.at(19, 20) == doctest::Approx(b.at(21, 20)));
  CHECK(b.at(20, 19) == doctest::Approx(b.at(21, 20)));
}

TEST_CASE("luma weights") {
  CHECK(luma(255, 255, 255) == 255);
  CHECK(luma(0, 0, 0) == 0);
  CHECK(luma(255, 0, 0) == 76);
  CHECK(luma(0, 255, 0) == 150);
  CHECK(luma(0, 0, 255) == 29);
}

TEST_CASE("png round trip and error path") {
  const auto dir = test::temp_dir("png");
  const GrayImage img = test::noise_image(33, 17, 9);
  write_png((dir / "a.png").string(), img);
  CHECK(read_png((dir / "a.png").string()) == img);
  try {
    read_png((dir / "missing.png").string());
    FAIL("expected Io error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIo);
  }
}

TEST_CASE("image construction contract") {
  CHECK_THROWS_AS(GrayImage(0, 3), Error);
  CHECK_THROWS_AS(GrayImage(2, 2, std::vector<std::uint8_t>(3)), Error);
}

}  // TEST_SUITE
