#pragma once

// Anti-aliased drawing primitives on a float raster. Pixel (i, j) is centred
// on integer coordinates; coverage uses 4x4 supersampling on boundary pixels.

#include <span>
#include <string_view>

#include "gscout/imgcore.hpp"

namespace gscout::detail {

class Canvas {
 public:
  Canvas(int w, int h, float fill) : img_(w, h, fill) {}

  int width() const { return img_.width; }
  int height() const { return img_.height; }
  FloatImage& image() { return img_; }

  void blend(int x, int y, float value, double coverage) {
    float& p = img_.at(x, y);
    p = static_cast<float>(p + (value - p) * coverage);
  }

  /// Axis-aligned box [x0,x1]x[y0,y1] in continuous coordinates.
  void fill_rect(double x0, double y0, double x1, double y1, float value);
  void fill_disk(double cx, double cy, double r, float value);
  void fill_ring(double cx, double cy, double r_in, double r_out, float value);
  /// Convex polygon, any winding.
  void fill_convex(std::span<const Vec2> pts, float value);
  /// Rotated bar from p0 to p1 with the given full width.
  void fill_bar(const Vec2& p0, const Vec2& p1, double width, float value);
  /// Annular sector between angles a0 < a1 (radians, image orientation).
  void fill_arc(double cx, double cy, double r_in, double r_out, double a0, double a1, float value);
  /// 3x5 dot-matrix glyphs: '0'-'9' plus '#'-style pseudo letters 'A'-'Z'.
  void draw_text(std::string_view text, double x, double y, double cell, float value);

  GrayImage to_gray() const;

 private:
  FloatImage img_;
};

}  // namespace gscout::detail
