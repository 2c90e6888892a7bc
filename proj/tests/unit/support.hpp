#pragma once

// Shared fixtures for the unit suites.

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "canvas.hpp"
#include "gscout/features.hpp"
#include "gscout/ptzsim.hpp"

namespace gscout::test {

/// Anti-aliased filled disk on a flat background.
inline GrayImage disk_image(int w, int h, double cx, double cy, double r, float fg = 220.0f, float bg = 40.0f) {
  detail::Canvas c(w, h, bg);
  c.fill_disk(cx, cy, r, fg);
  return c.to_gray();
}

inline GrayImage noise_image(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> d(0, 255);
  GrayImage img(w, h);
  for (auto& p : img.pixels()) p = static_cast<std::uint8_t>(d(rng));
  return img;
}

/// Random blocks on a ramp: plenty of corners for the feature detector.
inline GrayImage blocks_image(int w, int h, std::uint64_t seed, int blocks = 60) {
  std::mt19937_64 rng(seed);
  detail::Canvas c(w, h, 0.0f);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) c.image().at(x, y) = static_cast<float>(60 + 60.0 * x / w);
  }
  std::uniform_real_distribution<double> ux(0, w), uy(0, h), us(4, 28), uv(0, 255);
  for (int i = 0; i < blocks; ++i) {
    const double x = ux(rng), y = uy(rng), s = us(rng);
    const float v = static_cast<float>(uv(rng));
    if (i % 3 == 0) {
      c.fill_disk(x, y, 0.5 * s, v);
    } else {
      c.fill_rect(x, y, x + s, y + 0.7 * s, v);
    }
  }
  return c.to_gray();
}

inline Descriptor random_descriptor(std::mt19937_64& rng) {
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  Descriptor d;
  double n = 0;
  for (auto& v : d) {
    v = u(rng);
    n += double(v) * v;
  }
  for (auto& v : d) v = static_cast<float>(v / std::sqrt(n));
  return d;
}

/// Camera without blur or sensor noise.
inline SceneOptions ideal_optics() {
  SceneOptions o;
  o.camera.blur_sigma = 0.0;
  o.camera.noise_sigma = 0.0;
  return o;
}

inline double mean_abs_diff(const GrayImage& a, const GrayImage& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.pixels().size(); ++i) s += std::abs(int(a.pixels()[i]) - int(b.pixels()[i]));
  return s / static_cast<double>(a.pixels().size());
}

inline std::filesystem::path temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("gscout_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline double corner_error(const Homography& a, const Homography& b, double w, double h) {
  double e = 0;
  for (const Vec2& p : {Vec2(0, 0), Vec2(w, 0), Vec2(w, h), Vec2(0, h)}) e = std::max(e, (a.apply(p) - b.apply(p)).norm());
  return e;
}

}  // namespace gscout::test
