#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace gscout {

using Vec2 = Eigen::Vector2d;

/// 8-bit single-channel raster, row-major.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, std::uint8_t fill = 0);
  GrayImage(int width, int height, std::vector<std::uint8_t> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return data_.empty(); }

  std::uint8_t at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  std::uint8_t& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }

  std::span<const std::uint8_t> pixels() const noexcept { return data_; }
  std::span<std::uint8_t> pixels() noexcept { return data_; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Real-valued field with the same layout as GrayImage.
struct FloatImage {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  FloatImage() = default;
  FloatImage(int w, int h, float fill = 0.0f)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  float at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  float& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
};

/// Axis-aligned rectangle in pixel coordinates (top-left corner + extent).
struct Region {
  double x = 0.0;
  double y = 0.0;
  double w = 1.0;
  double h = 1.0;

  double area() const { return w * h; }
  Vec2 center() const { return {x + 0.5 * w, y + 0.5 * h}; }
  bool valid() const { return w > 0.0 && h > 0.0; }
};

/// Projective transform of the plane. Kept unnormalized; compare through
/// normalized().
class Homography {
 public:
  Homography() : m_(Eigen::Matrix3d::Identity()) {}
  explicit Homography(const Eigen::Matrix3d& m) : m_(m) {}

  static Homography identity() { return Homography(); }
  static Homography translation(double tx, double ty);
  static Homography scaling(double sx, double sy);
  /// x' = s R(theta) x + t
  static Homography similarity(double scale, double theta, double tx, double ty);

  const Eigen::Matrix3d& matrix() const { return m_; }
  Homography normalized() const;
  double determinant() const;
  bool invertible() const;
  /// Throws kSingularTransform when |det| of the normalized matrix <= 1e-12.
  Homography inverse() const;
  Vec2 apply(const Vec2& p) const;
  /// Homogeneous third coordinate of the mapped point; <= 0 means behind the camera.
  double apply_w(const Vec2& p) const;

  friend Homography operator*(const Homography& a, const Homography& b) {
    return Homography(a.m_ * b.m_);
  }

 private:
  Eigen::Matrix3d m_;
};

/// Bilinear interpolation. Coordinates outside [0,w-1]x[0,h-1] read as 0.
double bilinear_sample(const GrayImage& img, double x, double y);

/// Round-half-up and clamp to [0,255].
std::uint8_t to_intensity(double v);

struct Gradients {
  FloatImage gx;
  FloatImage gy;
  FloatImage mag;
};

/// 3x3 Sobel. Border pixels carry zero in all three fields.
Gradients sobel_gradients(const GrayImage& img);

/// Inverse-mapping warp: dst(p) = src(h^-1 p).
GrayImage warp_homography(const GrayImage& src, const Homography& h, int out_w, int out_h);

double iou(const Region& a, const Region& b);

/// Bounding box of a point set.
Region bounding_region(std::span<const Vec2> pts);

/// Clip a region to [0,w]x[0,h]. Returns an invalid (w or h <= 0) region when disjoint.
Region clip_region(const Region& r, int width, int height);

/// Crop with black fill outside the source.
GrayImage crop(const GrayImage& img, int x, int y, int w, int h);

/// Area-averaging when shrinking, bilinear when enlarging.
GrayImage resize(const GrayImage& img, int out_w, int out_h);

/// 2x2 box downsample (odd trailing row/column dropped).
GrayImage downsample2(const GrayImage& img);

FloatImage to_float(const GrayImage& img, float scale = 1.0f / 255.0f);

/// Separable Gaussian blur with replicated borders.
FloatImage gaussian_blur(const FloatImage& img, double sigma);

/// RGB(A) -> luma using 0.299/0.587/0.114.
std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b);

}  // namespace gscout
