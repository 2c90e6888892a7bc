#include "gscout/imgcore.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/LU>

#include "gscout/error.hpp"

namespace gscout {

GrayImage::GrayImage(int width, int height, std::uint8_t fill)
    : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::kInvalidArgument, "image dimensions must be >= 1");
  }
  data_.assign(static_cast<std::size_t>(width) * height, fill);
}

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::kInvalidArgument, "image dimensions must be >= 1");
  }
  if (data_.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorCode::kInvalidArgument, "pixel buffer size does not match dimensions");
  }
}

// ---------------------------------------------------------------------------
// Homography

Homography Homography::translation(double tx, double ty) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(0, 2) = tx;
  m(1, 2) = ty;
  return Homography(m);
}

Homography Homography::scaling(double sx, double sy) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(0, 0) = sx;
  m(1, 1) = sy;
  return Homography(m);
}

Homography Homography::similarity(double scale, double theta, double tx, double ty) {
  const double c = scale * std::cos(theta);
  const double s = scale * std::sin(theta);
  Eigen::Matrix3d m;
  m << c, -s, tx, s, c, ty, 0, 0, 1;
  return Homography(m);
}

Homography Homography::normalized() const {
  if (m_(2, 2) != 0.0) return Homography(m_ / m_(2, 2));
  return *this;
}

double Homography::determinant() const { return normalized().m_.determinant(); }

bool Homography::invertible() const {
  const double d = determinant();
  return std::isfinite(d) && std::abs(d) > 1e-12;
}

Homography Homography::inverse() const {
  if (!invertible()) {
    throw Error(ErrorCode::kSingularTransform, "homography is not invertible");
  }
  return Homography(normalized().m_.inverse());
}

Vec2 Homography::apply(const Vec2& p) const {
  const Eigen::Vector3d q = m_ * Eigen::Vector3d(p.x(), p.y(), 1.0);
  return {q.x() / q.z(), q.y() / q.z()};
}

double Homography::apply_w(const Vec2& p) const {
  return m_(2, 0) * p.x() + m_(2, 1) * p.y() + m_(2, 2);
}

// ---------------------------------------------------------------------------
// Sampling

double bilinear_sample(const GrayImage& img, double x, double y) {
  const int w = img.width();
  const int h = img.height();
  if (!(x >= 0.0 && y >= 0.0 && x <= w - 1 && y <= h - 1)) return 0.0;
  const int x0 = std::min(static_cast<int>(x), w - 1);
  const int y0 = std::min(static_cast<int>(y), h - 1);
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double top = img.at(x0, y0) + fx * (img.at(x1, y0) - img.at(x0, y0));
  const double bot = img.at(x0, y1) + fx * (img.at(x1, y1) - img.at(x0, y1));
  return top + fy * (bot - top);
}

std::uint8_t to_intensity(double v) {
  if (!(v > 0.0)) return 0;
  if (v >= 255.0) return 255;
  return static_cast<std::uint8_t>(std::floor(v + 0.5));
}

std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return to_intensity(0.299 * r + 0.587 * g + 0.114 * b);
}

// ---------------------------------------------------------------------------
// Gradients

Gradients sobel_gradients(const GrayImage& img) {
  const int w = img.width();
  const int h = img.height();
  if (w < 3 || h < 3) {
    throw Error(ErrorCode::kImageTooSmall, "sobel needs at least 3x3, got " +
                                              std::to_string(w) + "x" + std::to_string(h));
  }
  Gradients g{FloatImage(w, h), FloatImage(w, h), FloatImage(w, h)};
  for (int y = 1; y < h - 1; ++y) {
    const std::uint8_t* r0 = &img.pixels()[static_cast<std::size_t>(y - 1) * w];
    const std::uint8_t* r1 = r0 + w;
    const std::uint8_t* r2 = r1 + w;
    for (int x = 1; x < w - 1; ++x) {
      const float gx = static_cast<float>((r0[x + 1] + 2 * r1[x + 1] + r2[x + 1]) -
                                          (r0[x - 1] + 2 * r1[x - 1] + r2[x - 1]));
      const float gy = static_cast<float>((r2[x - 1] + 2 * r2[x] + r2[x + 1]) -
                                          (r0[x - 1] + 2 * r0[x] + r0[x + 1]));
      g.gx.at(x, y) = gx;
      g.gy.at(x, y) = gy;
      g.mag.at(x, y) = std::sqrt(gx * gx + gy * gy);
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Geometric transforms

GrayImage warp_homography(const GrayImage& src, const Homography& h, int out_w, int out_h) {
  const Eigen::Matrix3d inv = h.inverse().matrix();
  GrayImage dst(out_w, out_h);
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      const double u = inv(0, 0) * x + inv(0, 1) * y + inv(0, 2);
      const double v = inv(1, 0) * x + inv(1, 1) * y + inv(1, 2);
      const double s = inv(2, 0) * x + inv(2, 1) * y + inv(2, 2);
      if (s <= 0.0) continue;
      dst.at(x, y) = to_intensity(bilinear_sample(src, u / s, v / s));
    }
  }
  return dst;
}

double iou(const Region& a, const Region& b) {
  const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  if (inter <= 0.0 || uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

Region bounding_region(std::span<const Vec2> pts) {
  if (pts.empty()) return Region{0, 0, 0, 0};
  double x0 = pts[0].x(), x1 = x0, y0 = pts[0].y(), y1 = y0;
  for (const auto& p : pts) {
    x0 = std::min(x0, p.x());
    x1 = std::max(x1, p.x());
    y0 = std::min(y0, p.y());
    y1 = std::max(y1, p.y());
  }
  return Region{x0, y0, x1 - x0, y1 - y0};
}

Region clip_region(const Region& r, int width, int height) {
  const double x0 = std::max(0.0, r.x);
  const double y0 = std::max(0.0, r.y);
  const double x1 = std::min<double>(width, r.x + r.w);
  const double y1 = std::min<double>(height, r.y + r.h);
  return Region{x0, y0, x1 - x0, y1 - y0};
}

GrayImage crop(const GrayImage& img, int x, int y, int w, int h) {
  GrayImage out(w, h);
  for (int j = 0; j < h; ++j) {
    const int sy = y + j;
    if (sy < 0 || sy >= img.height()) continue;
    for (int i = 0; i < w; ++i) {
      const int sx = x + i;
      if (sx < 0 || sx >= img.width()) continue;
      out.at(i, j) = img.at(sx, sy);
    }
  }
  return out;
}

namespace {

struct Tap {
  int index;
  float weight;
};

// Per-output-sample source taps along one axis.
std::vector<std::vector<Tap>> axis_taps(int in, int out) {
  std::vector<std::vector<Tap>> taps(static_cast<std::size_t>(out));
  const double scale = static_cast<double>(in) / out;
  for (int o = 0; o < out; ++o) {
    auto& t = taps[static_cast<std::size_t>(o)];
    if (scale > 1.0) {
      const double a = o * scale;
      const double b = a + scale;
      for (int i = static_cast<int>(std::floor(a)); i < static_cast<int>(std::ceil(b)); ++i) {
        const double cov = std::min<double>(b, i + 1) - std::max<double>(a, i);
        if (cov > 0.0 && i >= 0 && i < in) t.push_back({i, static_cast<float>(cov / scale)});
      }
    } else {
      double s = (o + 0.5) * scale - 0.5;
      s = std::clamp(s, 0.0, static_cast<double>(in - 1));
      const int i0 = static_cast<int>(s);
      const int i1 = std::min(i0 + 1, in - 1);
      const double f = s - i0;
      t.push_back({i0, static_cast<float>(1.0 - f)});
      if (f > 0.0) t.push_back({i1, static_cast<float>(f)});
    }
  }
  return taps;
}

}  // namespace

GrayImage resize(const GrayImage& img, int out_w, int out_h) {
  if (out_w < 1 || out_h < 1) throw Error(ErrorCode::kInvalidArgument, "resize to empty image");
  if (out_w == img.width() && out_h == img.height()) return img;
  const auto tx = axis_taps(img.width(), out_w);
  const auto ty = axis_taps(img.height(), out_h);
  FloatImage tmp(out_w, img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < out_w; ++x) {
      float acc = 0.0f;
      for (const Tap& t : tx[static_cast<std::size_t>(x)]) acc += t.weight * img.at(t.index, y);
      tmp.at(x, y) = acc;
    }
  }
  GrayImage out(out_w, out_h);
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      float acc = 0.0f;
      for (const Tap& t : ty[static_cast<std::size_t>(y)]) acc += t.weight * tmp.at(x, t.index);
      out.at(x, y) = to_intensity(acc);
    }
  }
  return out;
}

GrayImage downsample2(const GrayImage& img) {
  const int w = std::max(1, img.width() / 2);
  const int h = std::max(1, img.height() / 2);
  GrayImage out(w, h);
  for (int y = 0; y < h; ++y) {
    const int y0 = std::min(2 * y, img.height() - 1);
    const int y1 = std::min(2 * y + 1, img.height() - 1);
    for (int x = 0; x < w; ++x) {
      const int x0 = std::min(2 * x, img.width() - 1);
      const int x1 = std::min(2 * x + 1, img.width() - 1);
      const int sum = img.at(x0, y0) + img.at(x1, y0) + img.at(x0, y1) + img.at(x1, y1);
      out.at(x, y) = static_cast<std::uint8_t>((sum + 2) / 4);
    }
  }
  return out;
}

FloatImage to_float(const GrayImage& img, float scale) {
  FloatImage out(img.width(), img.height());
  const auto px = img.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) out.data[i] = px[i] * scale;
  return out;
}

FloatImage gaussian_blur(const FloatImage& img, double sigma) {
  if (sigma <= 0.0) return img;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<float> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * i * i / (sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = static_cast<float>(v);
    sum += v;
  }
  for (auto& v : k) v = static_cast<float>(v / sum);

  const int w = img.width;
  const int h = img.height;
  FloatImage tmp(w, h);
  std::vector<float> line(static_cast<std::size_t>(w + 2 * radius));
  for (int y = 0; y < h; ++y) {
    const float* row = &img.data[static_cast<std::size_t>(y) * w];
    for (int i = 0; i < w + 2 * radius; ++i) line[static_cast<std::size_t>(i)] = row[std::clamp(i - radius, 0, w - 1)];
    float* out = &tmp.data[static_cast<std::size_t>(y) * w];
    for (int x = 0; x < w; ++x) {
      float acc = 0.0f;
      const float* src = &line[static_cast<std::size_t>(x)];
      for (int i = 0; i <= 2 * radius; ++i) acc += k[static_cast<std::size_t>(i)] * src[i];
      out[x] = acc;
    }
  }
  FloatImage out(w, h);
  std::vector<float> acc(static_cast<std::size_t>(w));
  for (int y = 0; y < h; ++y) {
    std::fill(acc.begin(), acc.end(), 0.0f);
    for (int i = -radius; i <= radius; ++i) {
      const int sy = std::clamp(y + i, 0, h - 1);
      const float kv = k[static_cast<std::size_t>(i + radius)];
      const float* src = &tmp.data[static_cast<std::size_t>(sy) * w];
      for (int x = 0; x < w; ++x) acc[static_cast<std::size_t>(x)] += kv * src[x];
    }
    std::copy(acc.begin(), acc.end(), out.data.begin() + static_cast<std::ptrdiff_t>(y) * w);
  }
  return out;
}

}  // namespace gscout
