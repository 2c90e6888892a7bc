#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "canvas.hpp"
#include "gscout/error.hpp"
#include "gscout/ptzsim.hpp"

namespace gscout {
namespace {

using detail::Canvas;
constexpr double kPi = std::numbers::pi;

// Circular gauge scale runs clockwise from lower-left to lower-right.
constexpr double kScaleStart = 0.75 * kPi;
constexpr double kScaleSweep = 1.5 * kPi;

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double uni(std::mt19937_64& rng, double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
int uni_int(std::mt19937_64& rng, int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); }

std::string random_text(std::mt19937_64& rng, int n, bool digits_only) {
  std::string s;
  for (int i = 0; i < n; ++i) {
    if (digits_only || uni(rng, 0, 1) < 0.4) {
      s.push_back(static_cast<char>('0' + uni_int(rng, 0, 9)));
    } else {
      s.push_back(static_cast<char>('A' + uni_int(rng, 0, 25)));
    }
  }
  return s;
}

// Lattice value noise, bilinearly interpolated, added onto the canvas.
void add_value_noise(Canvas& cv, std::uint64_t seed, int cell, double amplitude) {
  const int gw = cv.width() / cell + 2;
  const int gh = cv.height() / cell + 2;
  std::vector<float> lattice(static_cast<std::size_t>(gw) * gh);
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    lattice[i] = static_cast<float>((static_cast<double>(splitmix(seed + i) >> 11) / 9007199254740992.0 - 0.5) * 2.0 * amplitude);
  }
  FloatImage& img = cv.image();
  for (int y = 0; y < cv.height(); ++y) {
    const double fy = static_cast<double>(y) / cell;
    const int gy = static_cast<int>(fy);
    const double ty = fy - gy;
    for (int x = 0; x < cv.width(); ++x) {
      const double fx = static_cast<double>(x) / cell;
      const int gx = static_cast<int>(fx);
      const double tx = fx - gx;
      const auto l = [&](int i, int j) { return lattice[static_cast<std::size_t>(j) * gw + i]; };
      const double top = l(gx, gy) + tx * (l(gx + 1, gy) - l(gx, gy));
      const double bot = l(gx, gy + 1) + tx * (l(gx + 1, gy + 1) - l(gx, gy + 1));
      img.at(x, y) += static_cast<float>(top + ty * (bot - top));
    }
  }
}

void draw_label_plate(Canvas& cv, std::mt19937_64& rng, double x, double y, double w, double h) {
  const bool inverted = uni(rng, 0, 1) < 0.3;
  const float plate = inverted ? static_cast<float>(uni(rng, 30, 70)) : static_cast<float>(uni(rng, 200, 245));
  const float ink = inverted ? 230.0f : static_cast<float>(uni(rng, 10, 50));
  cv.fill_rect(x, y, x + w, y + h, plate);
  const double cell = std::clamp(h / uni(rng, 9.0, 14.0), 3.0, 16.0);
  const int rows = std::max(1, static_cast<int>((h - 2 * cell) / (6.5 * cell)));
  for (int r = 0; r < rows; ++r) {
    const int chars = std::max(1, static_cast<int>((w - 2 * cell) / (4.0 * cell)) - uni_int(rng, 0, 3));
    cv.draw_text(random_text(rng, chars, false), x + cell, y + cell + r * 6.5 * cell, cell, ink);
  }
}

void draw_background(Canvas& cv, std::uint64_t seed, double clutter) {
  std::mt19937_64 rng(splitmix(seed ^ 0xb6c0ULL));
  const double w = cv.width();
  const double h = cv.height();
  const double amp = 0.5 + clutter;
  add_value_noise(cv, splitmix(seed + 1), 512, 35 * amp);
  add_value_noise(cv, splitmix(seed + 2), 128, 14 * amp);
  add_value_noise(cv, splitmix(seed + 3), 32, 6 * amp);

  // Equipment panels.
  const int panels = static_cast<int>(std::lround(14 + 30 * clutter));
  for (int i = 0; i < panels; ++i) {
    const double pw = uni(rng, 240, 1400);
    const double ph = uni(rng, 240, 1100);
    const double px = uni(rng, -100, w - pw + 100);
    const double py = uni(rng, -100, h - ph + 100);
    const float fill = static_cast<float>(uni(rng, 70, 200));
    cv.fill_rect(px, py, px + pw, py + ph, fill - 40.0f);
    cv.fill_rect(px + 8, py + 8, px + pw - 8, py + ph - 8, fill);
    if (uni(rng, 0, 1) < 0.6) {
      for (double sx : {px + 24, px + pw - 24}) {
        for (double sy : {py + 24, py + ph - 24}) {
          cv.fill_disk(sx, sy, 9, fill - 60.0f);
          cv.fill_disk(sx - 2, sy - 2, 3, fill + 30.0f);
        }
      }
    }
    const int plates = uni_int(rng, 0, 3);
    for (int k = 0; k < plates; ++k) {
      const double lw = uni(rng, 0.2, 0.7) * pw;
      const double lh = uni(rng, 50, 140);
      if (lh > ph - 60) continue;
      draw_label_plate(cv, rng, px + uni(rng, 30, std::max(31.0, pw - lw - 30)),
                       py + uni(rng, 30, std::max(31.0, ph - lh - 30)), lw, lh);
    }
    if (uni(rng, 0, 1) < 0.35) {  // vent slots
      const int slots = uni_int(rng, 4, 10);
      const double sx = px + uni(rng, 20, pw * 0.5);
      const double sy = py + uni(rng, 20, ph * 0.5);
      const double sl = uni(rng, 80, 240);
      for (int k = 0; k < slots; ++k) cv.fill_rect(sx, sy + k * 22, sx + sl, sy + k * 22 + 9, fill - 70.0f);
    }
  }

  // Pipes with cylindrical shading and brackets.
  const int pipes = static_cast<int>(std::lround(2 + 4 * clutter));
  for (int i = 0; i < pipes; ++i) {
    const bool horizontal = uni(rng, 0, 1) < 0.6;
    const double thick = uni(rng, 60, 160);
    const double pos = uni(rng, 0, horizontal ? h : w);
    const float base = static_cast<float>(uni(rng, 90, 190));
    const int bands = 16;
    for (int b = 0; b < bands; ++b) {
      const double t0 = pos + thick * b / bands;
      const double t1 = pos + thick * (b + 1) / bands;
      const double shade = std::cos((b + 0.5) / bands * kPi - 0.5 * kPi);
      const float v = static_cast<float>(base - 60 + 90 * shade);
      if (horizontal) {
        cv.fill_rect(0, t0, w, t1, v);
      } else {
        cv.fill_rect(t0, 0, t1, h, v);
      }
    }
    for (double s = uni(rng, 100, 500); s < (horizontal ? w : h); s += uni(rng, 500, 900)) {
      if (horizontal) {
        cv.fill_rect(s, pos - 14, s + 36, pos + thick + 14, base - 80.0f);
      } else {
        cv.fill_rect(pos - 14, s, pos + thick + 14, s + 36, base - 80.0f);
      }
    }
  }

  // Free-standing signage.
  const int signs = static_cast<int>(std::lround(25 + 60 * clutter));
  for (int i = 0; i < signs; ++i) {
    const double lw = uni(rng, 120, 420);
    const double lh = uni(rng, 50, 130);
    draw_label_plate(cv, rng, uni(rng, 0, w - lw), uni(rng, 0, h - lh), lw, lh);
  }

  // Hazard stripes and cable trays.
  const int stripes = static_cast<int>(std::lround(2 + 4 * clutter));
  for (int i = 0; i < stripes; ++i) {
    const double sx = uni(rng, 0, w - 600);
    const double sy = uni(rng, 0, h - 80);
    const double len = uni(rng, 300, 600);
    for (double t = 0; t < len; t += 60) {
      const std::array<Vec2, 4> q = {Vec2(sx + t, sy + 60), Vec2(sx + t + 30, sy + 60), Vec2(sx + t + 60, sy),
                                     Vec2(sx + t + 30, sy)};
      cv.fill_convex(q, 35.0f);
    }
  }
}

// Round fixtures (lamps, hand wheels). They give the circle detector decoys.
void draw_decoys(Canvas& cv, std::uint64_t seed, double clutter, const Vec2& keep_out, double keep_radius) {
  std::mt19937_64 rng(splitmix(seed ^ 0xdec0ULL));
  const int n = static_cast<int>(std::lround(3 + 4 * clutter));
  for (int i = 0; i < n; ++i) {
    const double r = uni(rng, 50, 260);
    Vec2 c;
    int tries = 0;
    do {
      c = Vec2(uni(rng, r, cv.width() - r), uni(rng, r, cv.height() - r));
    } while ((c - keep_out).norm() < keep_radius + r && ++tries < 100);
    if (tries >= 100) continue;
    const float v = static_cast<float>(uni(rng, 40, 220));
    if (uni(rng, 0, 1) < 0.5) {
      cv.fill_disk(c.x(), c.y(), r, v);
      cv.fill_ring(c.x(), c.y(), 0.8 * r, r, 255.0f - v);
    } else {
      cv.fill_ring(c.x(), c.y(), 0.82 * r, r, v);
      const int spokes = uni_int(rng, 3, 6);
      const double a0 = uni(rng, 0, kPi);
      for (int k = 0; k < spokes; ++k) {
        const double a = a0 + 2 * kPi * k / spokes;
        cv.fill_bar(c, c + 0.85 * r * Vec2(std::cos(a), std::sin(a)), 0.08 * r, v);
      }
      cv.fill_disk(c.x(), c.y(), 0.15 * r, v);
    }
  }
}

void draw_circle_meter(Canvas& cv, const MeterPlacement& m, std::mt19937_64& rng) {
  const double cx = m.center.x();
  const double cy = m.center.y();
  const double r = 0.5 * m.diameter;
  const Vec2 c = m.center;
  const auto polar = [&](double a, double rad) -> Vec2 { return c + rad * Vec2(std::cos(a), std::sin(a)); };

  cv.fill_disk(cx + 0.02 * r, cy + 0.03 * r, 1.03 * r, 30.0f);  // shadow
  cv.fill_ring(cx, cy, 0.86 * r, r, 75.0f);
  cv.fill_ring(cx, cy, 0.90 * r, 0.94 * r, 125.0f);
  cv.fill_disk(cx, cy, 0.86 * r, 238.0f);

  // Warning band near the end of the scale.
  cv.fill_arc(cx, cy, 0.60 * r, 0.68 * r, kScaleStart + 0.78 * kScaleSweep, kScaleStart + kScaleSweep, 120.0f);
  cv.fill_arc(cx, cy, 0.705 * r, 0.72 * r, kScaleStart, kScaleStart + kScaleSweep, 25.0f);

  const int majors = static_cast<int>(std::lround(kScaleSweep / (kPi / 6.0)));  // every 30 degrees
  for (int k = 0; k <= majors * 5; ++k) {
    const double a = kScaleStart + kScaleSweep * k / (majors * 5);
    if (k % 5 == 0) {
      cv.fill_bar(polar(a, 0.57 * r), polar(a, 0.72 * r), 0.028 * r, 20.0f);
    } else {
      cv.fill_bar(polar(a, 0.65 * r), polar(a, 0.72 * r), 0.011 * r, 35.0f);
    }
  }
  const double cell = 0.022 * r;
  const int step = uni_int(rng, 1, 5);
  for (int k = 0; k <= majors; ++k) {
    const double a = kScaleStart + kScaleSweep * k / majors;
    const std::string label = std::to_string(k * step * 10);
    const Vec2 p = polar(a, 0.45 * r);
    const double tw = (4.0 * label.size() - 1.0) * cell;
    cv.draw_text(label, p.x() - 0.5 * tw, p.y() - 2.5 * cell, cell, 25.0f);
  }
  // Brand text and unit plate.
  const std::string brand = random_text(rng, 5, false);
  cv.draw_text(brand, cx - 0.5 * (4.0 * brand.size() - 1.0) * 0.018 * r, cy - 0.33 * r, 0.018 * r, 60.0f);
  cv.fill_rect(cx - 0.22 * r, cy + 0.26 * r, cx + 0.22 * r, cy + 0.40 * r, 55.0f);
  const std::string unit = random_text(rng, 4, false);
  cv.draw_text(unit, cx - 0.5 * (4.0 * unit.size() - 1.0) * 0.02 * r, cy + 0.28 * r, 0.02 * r, 230.0f);

  // Needle and hub.
  const double a = m.needle_angle;
  const Vec2 dir(std::cos(a), std::sin(a));
  const Vec2 nrm(-dir.y(), dir.x());
  const std::array<Vec2, 4> needle = {c - 0.16 * r * dir + 0.035 * r * nrm, c + 0.68 * r * dir + 0.006 * r * nrm,
                                      c + 0.68 * r * dir - 0.006 * r * nrm, c - 0.16 * r * dir - 0.035 * r * nrm};
  cv.fill_convex(needle, 15.0f);
  cv.fill_disk(cx, cy, 0.07 * r, 40.0f);
  cv.fill_disk(cx, cy, 0.028 * r, 170.0f);
}

void draw_rect_meter(Canvas& cv, const MeterPlacement& m, std::mt19937_64& rng) {
  const double w = m.diameter;
  const double h = m.height;
  const double x0 = m.center.x() - 0.5 * w;
  const double y0 = m.center.y() - 0.5 * h;
  const double inset = 0.05 * std::min(w, h) + 0.02 * w;

  cv.fill_rect(x0 + 0.015 * w, y0 + 0.02 * h, x0 + w + 0.015 * w, y0 + h + 0.02 * h, 30.0f);  // shadow
  cv.fill_rect(x0, y0, x0 + w, y0 + h, 70.0f);
  cv.fill_rect(x0 + inset, y0 + inset, x0 + w - inset, y0 + h - inset, 232.0f);

  // Linear scale along the upper half of the face.
  const double sx0 = x0 + 0.14 * w;
  const double sx1 = x0 + 0.86 * w;
  const double sy = y0 + 0.52 * h;
  cv.fill_rect(sx0, sy, sx1, sy + 0.012 * w, 25.0f);
  const int majors = 5;
  for (int k = 0; k <= majors * 4; ++k) {
    const double x = sx0 + (sx1 - sx0) * k / (majors * 4);
    const bool major = k % 4 == 0;
    const double len = major ? 0.10 * h : 0.05 * h;
    cv.fill_rect(x - (major ? 0.006 : 0.003) * w, sy - len, x + (major ? 0.006 : 0.003) * w, sy, 25.0f);
  }
  const double cell = 0.011 * w;
  const int step = uni_int(rng, 1, 5);
  for (int k = 0; k <= majors; ++k) {
    const double x = sx0 + (sx1 - sx0) * k / majors;
    const std::string label = std::to_string(k * step * 10);
    const double tw = (4.0 * label.size() - 1.0) * cell;
    cv.draw_text(label, x - 0.5 * tw, sy - 0.10 * h - 6.5 * cell, cell, 25.0f);
  }
  const std::string unit = random_text(rng, 3, false);
  cv.draw_text(unit, x0 + w - inset - 0.04 * w - 12.0 * cell, y0 + h - inset - 0.05 * h - 5 * cell, cell, 40.0f);

  // Pointer position follows the needle angle mapped onto the scale.
  const double frac = std::clamp((m.needle_angle - kScaleStart) / kScaleSweep, 0.0, 1.0);
  const double px = sx0 + (sx1 - sx0) * frac;
  const std::array<Vec2, 3> pointer = {Vec2(px - 0.012 * w, y0 + h - inset - 0.04 * h),
                                       Vec2(px + 0.012 * w, y0 + h - inset - 0.04 * h), Vec2(px, sy - 0.16 * h)};
  cv.fill_convex(pointer, 15.0f);
}

}  // namespace

const char* to_string(MeterShape shape) { return shape == MeterShape::kCircle ? "circle" : "rect"; }

MeterShape parse_meter_shape(const std::string& s) {
  if (s == "circle") return MeterShape::kCircle;
  if (s == "rect" || s == "rectangle") return MeterShape::kRect;
  throw Error(ErrorCode::kConfig, "unknown meter shape '" + s + "'");
}

double CameraConfig::base_focal() const {
  return 0.5 * view_w / std::tan(0.5 * hfov_deg * kPi / 180.0);
}

const MeterPlacement& SceneSpec::meter(int id) const {
  for (const auto& m : meters) {
    if (m.id == id) return m;
  }
  throw Error(ErrorCode::kInvalidArgument, "no meter with id " + std::to_string(id));
}

Vec2 SceneSpec::scene_to_metric(const Vec2& px) const {
  const Vec2 origin(0.5 * (wall().width() - 1), 0.5 * (wall().height() - 1));
  return (px - origin) / pixels_per_meter;
}

Vec2 SceneSpec::metric_to_scene(const Vec2& m) const {
  const Vec2 origin(0.5 * (wall().width() - 1), 0.5 * (wall().height() - 1));
  return m * pixels_per_meter + origin;
}

Homography SceneSpec::scene_to_metric_h() const {
  const double s = 1.0 / pixels_per_meter;
  return Homography::scaling(s, s) *
         Homography::translation(-0.5 * (wall().width() - 1), -0.5 * (wall().height() - 1));
}

std::shared_ptr<const std::vector<GrayImage>> build_mips(GrayImage wall) {
  auto levels = std::make_shared<std::vector<GrayImage>>();
  levels->push_back(std::move(wall));
  while (std::min(levels->back().width(), levels->back().height()) >= 64) {
    levels->push_back(downsample2(levels->back()));
  }
  return levels;
}

std::vector<Vec2> meter_outline(const MeterPlacement& m) {
  std::vector<Vec2> pts;
  if (m.shape == MeterShape::kCircle) {
    constexpr int kSamples = 180;
    pts.reserve(kSamples);
    for (int i = 0; i < kSamples; ++i) {
      const double a = 2.0 * kPi * i / kSamples;
      pts.push_back(m.center + 0.5 * m.diameter * Vec2(std::cos(a), std::sin(a)));
    }
  } else {
    const double hw = 0.5 * m.width();
    const double hh = 0.5 * m.height;
    pts = {m.center + Vec2(-hw, -hh), m.center + Vec2(hw, -hh), m.center + Vec2(hw, hh), m.center + Vec2(-hw, hh)};
  }
  return pts;
}

SceneSpec generate_scene(int seed, MeterShape shape, double meter_diameter_at_wide, double clutter_level,
                         const SceneOptions& options) {
  if (!(meter_diameter_at_wide >= 8.0 && meter_diameter_at_wide <= 400.0)) {
    throw Error(ErrorCode::kInvalidArgument, "meter diameter must lie in [8, 400] px");
  }
  clutter_level = std::clamp(clutter_level, 0.0, 1.0);
  SceneSpec scene;
  scene.seed = seed;
  scene.shape = shape;
  scene.meter_diameter_at_wide = meter_diameter_at_wide;
  scene.clutter_level = clutter_level;
  scene.camera = options.camera;
  scene.nominal_pose = options.nominal_pose;
  scene.nominal_ptz = PtzState{};
  // Wide view at the nominal pose maps `supersample` wall px to one view px.
  scene.pixels_per_meter = options.supersample * options.camera.base_focal() / options.nominal_pose.standoff;

  const auto useed = static_cast<std::uint64_t>(static_cast<std::int64_t>(seed));
  std::mt19937_64 meter_rng(splitmix(useed ^ 0x3e7e5ULL));
  MeterPlacement m;
  m.id = 0;
  m.shape = shape;
  m.diameter = meter_diameter_at_wide * options.supersample;
  m.height = shape == MeterShape::kCircle ? m.diameter : options.rect_aspect * m.diameter;
  const double jx = options.placement_jitter * options.camera.view_w * options.supersample;
  const double jy = options.placement_jitter * options.camera.view_h * options.supersample;
  const Vec2 wall_center(0.5 * (options.wall_w - 1), 0.5 * (options.wall_h - 1));
  // The meter sits where the nominal camera axis meets the wall, plus jitter.
  const Vec2 axis_hit = wall_center + Vec2(options.nominal_pose.x, options.nominal_pose.y) * scene.pixels_per_meter;
  m.center = axis_hit + Vec2(uni(meter_rng, -jx, jx), uni(meter_rng, -jy, jy));
  m.needle_angle = kScaleStart + uni(meter_rng, 0.08, 0.92) * kScaleSweep;
  const double half_w = 0.5 * m.width();
  const double half_h = 0.5 * m.height;
  if (m.center.x() - half_w < 0 || m.center.y() - half_h < 0 || m.center.x() + half_w >= options.wall_w ||
      m.center.y() + half_h >= options.wall_h) {
    throw Error(ErrorCode::kInvalidArgument, "meter does not fit inside the wall texture");
  }

  Canvas cv(options.wall_w, options.wall_h, 128.0f);
  draw_background(cv, useed, clutter_level);
  draw_decoys(cv, useed, clutter_level, m.center, 0.75 * m.diameter + 200.0);
  if (shape == MeterShape::kCircle) {
    draw_circle_meter(cv, m, meter_rng);
  } else {
    draw_rect_meter(cv, m, meter_rng);
  }
  // Sensor-independent surface grain.
  FloatImage& img = cv.image();
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    img.data[i] += static_cast<float>(static_cast<int>(splitmix(useed * 0x9e37ULL + i) & 7) - 3.5);
  }
  scene.meters.push_back(m);
  scene.mips = build_mips(cv.to_gray());
  return scene;
}

}  // namespace gscout
