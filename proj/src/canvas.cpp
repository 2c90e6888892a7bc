#include "canvas.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace gscout::detail {
namespace {

constexpr std::array<double, 4> kSub = {-0.375, -0.125, 0.125, 0.375};

// 3x5 bitmaps, rows top to bottom, bit 2 = left column.
constexpr std::array<std::array<int, 5>, 10> kDigits = {{
    {7, 5, 5, 5, 7}, {2, 6, 2, 2, 7}, {7, 1, 7, 4, 7}, {7, 1, 7, 1, 7}, {5, 5, 7, 1, 1},
    {7, 4, 7, 1, 7}, {7, 4, 7, 5, 7}, {7, 1, 2, 2, 2}, {7, 5, 7, 5, 7}, {7, 5, 7, 1, 7},
}};

constexpr std::array<std::array<int, 5>, 26> kLetters = {{
    {2, 5, 7, 5, 5}, {6, 5, 6, 5, 6}, {7, 4, 4, 4, 7}, {6, 5, 5, 5, 6}, {7, 4, 6, 4, 7},
    {7, 4, 6, 4, 4}, {7, 4, 5, 5, 7}, {5, 5, 7, 5, 5}, {7, 2, 2, 2, 7}, {1, 1, 1, 5, 7},
    {5, 5, 6, 5, 5}, {4, 4, 4, 4, 7}, {5, 7, 7, 5, 5}, {6, 5, 5, 5, 5}, {2, 5, 5, 5, 2},
    {6, 5, 6, 4, 4}, {2, 5, 5, 7, 3}, {6, 5, 6, 5, 5}, {3, 4, 2, 1, 6}, {7, 2, 2, 2, 2},
    {5, 5, 5, 5, 7}, {5, 5, 5, 5, 2}, {5, 5, 7, 7, 5}, {5, 5, 2, 5, 5}, {5, 5, 2, 2, 2},
    {7, 1, 2, 4, 7},
}};

double overlap(double a0, double a1, double b0, double b1) {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

}  // namespace

void Canvas::fill_rect(double x0, double y0, double x1, double y1, float value) {
  if (x1 < x0) std::swap(x0, x1);
  if (y1 < y0) std::swap(y0, y1);
  const int ix0 = std::max(0, static_cast<int>(std::floor(x0 + 0.5)));
  const int iy0 = std::max(0, static_cast<int>(std::floor(y0 + 0.5)));
  const int ix1 = std::min(width() - 1, static_cast<int>(std::ceil(x1 - 0.5)));
  const int iy1 = std::min(height() - 1, static_cast<int>(std::ceil(y1 - 0.5)));
  for (int y = iy0; y <= iy1; ++y) {
    const double cy = overlap(y - 0.5, y + 0.5, y0, y1);
    if (cy <= 0.0) continue;
    for (int x = ix0; x <= ix1; ++x) {
      const double c = cy * overlap(x - 0.5, x + 0.5, x0, x1);
      if (c > 0.0) blend(x, y, value, c);
    }
  }
}

void Canvas::fill_disk(double cx, double cy, double r, float value) { fill_ring(cx, cy, -1.0, r, value); }

void Canvas::fill_ring(double cx, double cy, double r_in, double r_out, float value) {
  const int x0 = std::max(0, static_cast<int>(std::floor(cx - r_out - 1)));
  const int x1 = std::min(width() - 1, static_cast<int>(std::ceil(cx + r_out + 1)));
  const int y0 = std::max(0, static_cast<int>(std::floor(cy - r_out - 1)));
  const int y1 = std::min(height() - 1, static_cast<int>(std::ceil(cy + r_out + 1)));
  const double ro2 = r_out * r_out;
  const double ri2 = r_in > 0.0 ? r_in * r_in : -1.0;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double d = std::hypot(x - cx, y - cy);
      if (d > r_out + 0.75) continue;
      if (r_in > 0.0 && d < r_in - 0.75) continue;
      if (d < r_out - 0.75 && (r_in <= 0.0 || d > r_in + 0.75)) {
        blend(x, y, value, 1.0);
        continue;
      }
      int n = 0;
      for (double sy : kSub) {
        for (double sx : kSub) {
          const double dx = x + sx - cx;
          const double dy = y + sy - cy;
          const double d2 = dx * dx + dy * dy;
          n += (d2 <= ro2 && d2 >= ri2) ? 1 : 0;
        }
      }
      if (n) blend(x, y, value, n / 16.0);
    }
  }
}

void Canvas::fill_convex(std::span<const Vec2> pts, float value) {
  if (pts.size() < 3) return;
  // Orient edges so that interior has positive signed distance.
  double area = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec2& a = pts[i];
    const Vec2& b = pts[(i + 1) % pts.size()];
    area += a.x() * b.y() - b.x() * a.y();
  }
  const double sign = area >= 0.0 ? 1.0 : -1.0;
  struct Edge {
    double nx, ny, c;
  };
  std::vector<Edge> edges;
  double bx0 = pts[0].x(), bx1 = bx0, by0 = pts[0].y(), by1 = by0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec2& a = pts[i];
    const Vec2& b = pts[(i + 1) % pts.size()];
    const Vec2 d = b - a;
    const double len = d.norm();
    if (len < 1e-12) continue;
    const double nx = -d.y() / len * sign;
    const double ny = d.x() / len * sign;
    edges.push_back({nx, ny, -(nx * a.x() + ny * a.y())});
    bx0 = std::min(bx0, a.x());
    bx1 = std::max(bx1, a.x());
    by0 = std::min(by0, a.y());
    by1 = std::max(by1, a.y());
  }
  const int x0 = std::max(0, static_cast<int>(std::floor(bx0)));
  const int x1 = std::min(width() - 1, static_cast<int>(std::ceil(bx1)));
  const int y0 = std::max(0, static_cast<int>(std::floor(by0)));
  const int y1 = std::min(height() - 1, static_cast<int>(std::ceil(by1)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      double sd = 1e30;
      for (const Edge& e : edges) sd = std::min(sd, e.nx * x + e.ny * y + e.c);
      if (sd < -0.75) continue;
      if (sd > 0.75) {
        blend(x, y, value, 1.0);
        continue;
      }
      int n = 0;
      for (double sy : kSub) {
        for (double sx : kSub) {
          bool inside = true;
          for (const Edge& e : edges) {
            if (e.nx * (x + sx) + e.ny * (y + sy) + e.c < 0.0) {
              inside = false;
              break;
            }
          }
          n += inside ? 1 : 0;
        }
      }
      if (n) blend(x, y, value, n / 16.0);
    }
  }
}

void Canvas::fill_bar(const Vec2& p0, const Vec2& p1, double width, float value) {
  const Vec2 d = p1 - p0;
  const double len = d.norm();
  if (len < 1e-9) return;
  const Vec2 n = Vec2(-d.y(), d.x()) / len * (0.5 * width);
  const std::array<Vec2, 4> quad = {p0 + n, p1 + n, p1 - n, p0 - n};
  fill_convex(quad, value);
}

void Canvas::fill_arc(double cx, double cy, double r_in, double r_out, double a0, double a1, float value) {
  const int steps = std::max(2, static_cast<int>(std::ceil((a1 - a0) * r_out / 6.0)));
  const Vec2 c(cx, cy);
  for (int i = 0; i < steps; ++i) {
    const double t0 = a0 + (a1 - a0) * i / steps;
    const double t1 = a0 + (a1 - a0) * (i + 1) / steps;
    const Vec2 u0(std::cos(t0), std::sin(t0));
    const Vec2 u1(std::cos(t1), std::sin(t1));
    const std::array<Vec2, 4> quad = {c + u0 * r_in, c + u0 * r_out, c + u1 * r_out, c + u1 * r_in};
    fill_convex(quad, value);
  }
}

void Canvas::draw_text(std::string_view text, double x, double y, double cell, float value) {
  double ox = x;
  for (char ch : text) {
    const std::array<int, 5>* rows = nullptr;
    if (ch >= '0' && ch <= '9') rows = &kDigits[static_cast<std::size_t>(ch - '0')];
    if (ch >= 'A' && ch <= 'Z') rows = &kLetters[static_cast<std::size_t>(ch - 'A')];
    if (rows) {
      for (int r = 0; r < 5; ++r) {
        for (int c = 0; c < 3; ++c) {
          if ((*rows)[static_cast<std::size_t>(r)] & (4 >> c)) {
            fill_rect(ox + c * cell, y + r * cell, ox + (c + 1) * cell, y + (r + 1) * cell, value);
          }
        }
      }
    }
    ox += 4.0 * cell;
  }
}

GrayImage Canvas::to_gray() const {
  GrayImage out(width(), height());
  auto px = out.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = to_intensity(img_.data[i]);
  return out;
}

}  // namespace gscout::detail
