#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <Eigen/Dense>

#include "gscout/error.hpp"
#include "gscout/features.hpp"

namespace gscout {
namespace {

constexpr int kBorder = 5;
constexpr int kMaxRefineSteps = 5;
constexpr int kOrientationBins = 36;
constexpr double kOrientationSigma = 1.5;
constexpr int kDescWidth = 4;
constexpr int kDescBins = 8;
constexpr double kDescCellScale = 3.0;
constexpr double kDescClip = 0.2;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Octave {
  std::vector<FloatImage> gauss;  // scales_per_octave + 3
  std::vector<FloatImage> dog;    // scales_per_octave + 2
};

FloatImage halve(const FloatImage& img) {
  FloatImage out(std::max(1, img.width / 2), std::max(1, img.height / 2));
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) out.at(x, y) = img.at(2 * x, 2 * y);
  }
  return out;
}

int octave_count(int w, int h, const SiftParams& p) {
  const int m = std::min(w, h);
  const int fit = static_cast<int>(std::floor(std::log2(static_cast<double>(m)))) - 2;
  return std::clamp(fit, 1, p.octaves);
}

std::vector<Octave> build_scale_space(const GrayImage& img, const SiftParams& p) {
  const int s = p.scales_per_octave;
  const int n_oct = octave_count(img.width(), img.height(), p);
  std::vector<double> inc(static_cast<std::size_t>(s + 3), 0.0);
  const double k = std::pow(2.0, 1.0 / s);
  for (int i = 1; i < s + 3; ++i) {
    const double prev = p.base_sigma * std::pow(k, i - 1);
    const double total = prev * k;
    inc[static_cast<std::size_t>(i)] = std::sqrt(total * total - prev * prev);
  }

  std::vector<Octave> octaves(static_cast<std::size_t>(n_oct));
  const double init = std::sqrt(std::max(0.01, p.base_sigma * p.base_sigma - p.assumed_blur * p.assumed_blur));
  for (int o = 0; o < n_oct; ++o) {
    auto& oct = octaves[static_cast<std::size_t>(o)];
    oct.gauss.reserve(static_cast<std::size_t>(s + 3));
    if (o == 0) {
      oct.gauss.push_back(gaussian_blur(to_float(img), init));
    } else {
      oct.gauss.push_back(halve(octaves[static_cast<std::size_t>(o - 1)].gauss[static_cast<std::size_t>(s)]));
    }
    for (int i = 1; i < s + 3; ++i) {
      oct.gauss.push_back(gaussian_blur(oct.gauss.back(), inc[static_cast<std::size_t>(i)]));
    }
    for (int i = 0; i < s + 2; ++i) {
      const auto& a = oct.gauss[static_cast<std::size_t>(i)];
      const auto& b = oct.gauss[static_cast<std::size_t>(i + 1)];
      FloatImage d(a.width, a.height);
      for (std::size_t j = 0; j < d.data.size(); ++j) d.data[j] = b.data[j] - a.data[j];
      oct.dog.push_back(std::move(d));
    }
  }
  return octaves;
}

bool is_extremum(const std::vector<FloatImage>& dog, int i, int x, int y) {
  const float v = dog[static_cast<std::size_t>(i)].at(x, y);
  const bool is_max = v > 0.0f;
  for (int di = -1; di <= 1; ++di) {
    const auto& d = dog[static_cast<std::size_t>(i + di)];
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (di == 0 && dy == 0 && dx == 0) continue;
        const float n = d.at(x + dx, y + dy);
        if (is_max ? n >= v : n <= v) return false;
      }
    }
  }
  return true;
}

struct Refined {
  double x, y, layer, response;
  int xi, yi, li;
};

bool refine_extremum(const std::vector<FloatImage>& dog, int s, int& x, int& y, int& li,
                     const SiftParams& p, Refined& out) {
  const int w = dog[0].width;
  const int h = dog[0].height;
  Eigen::Vector3d offset = Eigen::Vector3d::Zero();
  Eigen::Vector3d grad;
  bool converged = false;
  for (int step = 0; step < kMaxRefineSteps; ++step) {
    const auto& prev = dog[static_cast<std::size_t>(li - 1)];
    const auto& cur = dog[static_cast<std::size_t>(li)];
    const auto& next = dog[static_cast<std::size_t>(li + 1)];
    grad << 0.5 * (cur.at(x + 1, y) - cur.at(x - 1, y)), 0.5 * (cur.at(x, y + 1) - cur.at(x, y - 1)),
        0.5 * (next.at(x, y) - prev.at(x, y));
    const double v2 = 2.0 * cur.at(x, y);
    const double dxx = cur.at(x + 1, y) + cur.at(x - 1, y) - v2;
    const double dyy = cur.at(x, y + 1) + cur.at(x, y - 1) - v2;
    const double dss = next.at(x, y) + prev.at(x, y) - v2;
    const double dxy = 0.25 * (cur.at(x + 1, y + 1) - cur.at(x - 1, y + 1) - cur.at(x + 1, y - 1) + cur.at(x - 1, y - 1));
    const double dxs = 0.25 * (next.at(x + 1, y) - next.at(x - 1, y) - prev.at(x + 1, y) + prev.at(x - 1, y));
    const double dys = 0.25 * (next.at(x, y + 1) - next.at(x, y - 1) - prev.at(x, y + 1) + prev.at(x, y - 1));
    Eigen::Matrix3d hess;
    hess << dxx, dxy, dxs, dxy, dyy, dys, dxs, dys, dss;
    Eigen::FullPivLU<Eigen::Matrix3d> lu(hess);
    if (!lu.isInvertible()) return false;
    offset = -lu.solve(grad);
    if (std::abs(offset.x()) < 0.5 && std::abs(offset.y()) < 0.5 && std::abs(offset.z()) < 0.5) {
      converged = true;
      break;
    }
    if (!offset.allFinite() || offset.cwiseAbs().maxCoeff() > 1e4) return false;
    x += static_cast<int>(std::lround(offset.x()));
    y += static_cast<int>(std::lround(offset.y()));
    li += static_cast<int>(std::lround(offset.z()));
    if (li < 1 || li > s || x < kBorder || x >= w - kBorder || y < kBorder || y >= h - kBorder) return false;
  }
  if (!converged) return false;

  const auto& cur = dog[static_cast<std::size_t>(li)];
  const double response = cur.at(x, y) + 0.5 * grad.dot(offset);
  if (std::abs(response) < p.contrast_threshold) return false;

  const double v2 = 2.0 * cur.at(x, y);
  const double dxx = cur.at(x + 1, y) + cur.at(x - 1, y) - v2;
  const double dyy = cur.at(x, y + 1) + cur.at(x, y - 1) - v2;
  const double dxy = 0.25 * (cur.at(x + 1, y + 1) - cur.at(x - 1, y + 1) - cur.at(x + 1, y - 1) + cur.at(x - 1, y - 1));
  const double tr = dxx + dyy;
  const double det = dxx * dyy - dxy * dxy;
  const double r = p.edge_ratio;
  if (det <= 0.0 || tr * tr * r >= (r + 1.0) * (r + 1.0) * det) return false;

  out = Refined{x + offset.x(), y + offset.y(), li + offset.z(), std::abs(response), x, y, li};
  return true;
}

std::array<double, kOrientationBins> orientation_histogram(const FloatImage& img, int cx, int cy, double sigma) {
  std::array<double, kOrientationBins> raw{};
  const int radius = static_cast<int>(std::lround(3.0 * sigma));
  const double denom = -1.0 / (2.0 * sigma * sigma);
  for (int j = -radius; j <= radius; ++j) {
    const int y = cy + j;
    if (y <= 0 || y >= img.height - 1) continue;
    for (int i = -radius; i <= radius; ++i) {
      const int x = cx + i;
      if (x <= 0 || x >= img.width - 1) continue;
      const double dx = img.at(x + 1, y) - img.at(x - 1, y);
      const double dy = img.at(x, y + 1) - img.at(x, y - 1);
      const double mag = std::sqrt(dx * dx + dy * dy);
      if (mag == 0.0) continue;
      double angle = std::atan2(dy, dx);
      if (angle < 0.0) angle += kTwoPi;
      int bin = static_cast<int>(std::lround(angle * kOrientationBins / kTwoPi));
      bin = ((bin % kOrientationBins) + kOrientationBins) % kOrientationBins;
      raw[static_cast<std::size_t>(bin)] += std::exp((i * i + j * j) * denom) * mag;
    }
  }
  std::array<double, kOrientationBins> smooth{};
  const auto at = [&](int b) { return raw[static_cast<std::size_t>((b + kOrientationBins) % kOrientationBins)]; };
  for (int b = 0; b < kOrientationBins; ++b) {
    smooth[static_cast<std::size_t>(b)] =
        (at(b - 2) + at(b + 2)) / 16.0 + (at(b - 1) + at(b + 1)) * 4.0 / 16.0 + at(b) * 6.0 / 16.0;
  }
  return smooth;
}

void assign_orientations(const Octave& oct, const Refined& r, int octave, const SiftParams& p,
                         KeypointSet& out) {
  const double oct_sigma = p.base_sigma * std::pow(2.0, r.layer / p.scales_per_octave);
  const auto hist = orientation_histogram(oct.gauss[static_cast<std::size_t>(r.li)], r.xi, r.yi,
                                          kOrientationSigma * oct_sigma);
  const double peak = *std::max_element(hist.begin(), hist.end());
  if (peak <= 0.0) return;
  const double f = std::ldexp(1.0, octave);
  for (int b = 0; b < kOrientationBins; ++b) {
    const double l = hist[static_cast<std::size_t>((b + kOrientationBins - 1) % kOrientationBins)];
    const double c = hist[static_cast<std::size_t>(b)];
    const double rr = hist[static_cast<std::size_t>((b + 1) % kOrientationBins)];
    if (!(c > l && c > rr && c >= p.orientation_peak_ratio * peak)) continue;
    const double bin = b + 0.5 * (l - rr) / (l - 2.0 * c + rr);
    double angle = kTwoPi * bin / kOrientationBins;
    angle = std::fmod(angle, kTwoPi);
    if (angle < 0.0) angle += kTwoPi;
    if (angle >= kTwoPi) angle = 0.0;
    Keypoint kp;
    kp.x = r.x * f;
    kp.y = r.y * f;
    kp.scale = oct_sigma * f;
    kp.orientation = angle;
    kp.response = r.response;
    kp.octave = octave;
    kp.octave_sigma = oct_sigma;
    kp.layer = r.li;
    out.push_back(kp);
  }
}

KeypointSet detect_in(const std::vector<Octave>& octaves, int max_count, const SiftParams& p) {
  KeypointSet kps;
  const int s = p.scales_per_octave;
  const float prethresh = static_cast<float>(0.5 * p.contrast_threshold / s);
  for (int o = 0; o < static_cast<int>(octaves.size()); ++o) {
    const auto& oct = octaves[static_cast<std::size_t>(o)];
    const int w = oct.dog[0].width;
    const int h = oct.dog[0].height;
    for (int i = 1; i <= s; ++i) {
      const auto& d = oct.dog[static_cast<std::size_t>(i)];
      for (int y = kBorder; y < h - kBorder; ++y) {
        for (int x = kBorder; x < w - kBorder; ++x) {
          if (std::abs(d.at(x, y)) <= prethresh) continue;
          if (!is_extremum(oct.dog, i, x, y)) continue;
          int rx = x, ry = y, rl = i;
          Refined r{};
          if (!refine_extremum(oct.dog, s, rx, ry, rl, p, r)) continue;
          assign_orientations(oct, r, o, p, kps);
        }
      }
    }
  }
  // Strongest first; full key for a deterministic order.
  std::sort(kps.begin(), kps.end(), [](const Keypoint& a, const Keypoint& b) {
    if (a.response != b.response) return a.response > b.response;
    if (a.y != b.y) return a.y < b.y;
    if (a.x != b.x) return a.x < b.x;
    if (a.scale != b.scale) return a.scale < b.scale;
    return a.orientation < b.orientation;
  });
  if (max_count >= 0 && static_cast<int>(kps.size()) > max_count) kps.resize(static_cast<std::size_t>(max_count));
  return kps;
}

// Normalize, then clip at 0.2 and rescale the unclipped part so the result
// has unit norm with no component above the clip value.
bool normalize_and_clip(std::array<double, kDescriptorSize>& v) {
  double n2 = 0.0;
  for (double x : v) n2 += x * x;
  if (!(n2 > 0.0)) return false;
  const double inv = 1.0 / std::sqrt(n2);
  for (double& x : v) x *= inv;

  std::array<int, kDescriptorSize> order{};
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return v[static_cast<std::size_t>(a)] > v[static_cast<std::size_t>(b)];
  });
  std::array<double, kDescriptorSize + 1> tail{};  // tail[k] = sum of squares from rank k on
  for (int k = kDescriptorSize - 1; k >= 0; --k) {
    const double x = v[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])];
    tail[static_cast<std::size_t>(k)] = tail[static_cast<std::size_t>(k + 1)] + x * x;
  }
  const double c2 = kDescClip * kDescClip;
  for (int k = 0; k < kDescriptorSize; ++k) {
    const double remaining = 1.0 - c2 * k;
    const double rest = tail[static_cast<std::size_t>(k)];
    if (remaining <= 0.0 || rest <= 0.0) return false;
    const double alpha = std::sqrt(remaining / rest);
    if (alpha * v[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] <= kDescClip) {
      for (int j = 0; j < kDescriptorSize; ++j) {
        double& x = v[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])];
        x = j < k ? kDescClip : x * alpha;
      }
      return true;
    }
  }
  return false;
}

bool describe(const FloatImage& img, double x, double y, double sigma, double orientation, Descriptor& out) {
  const double hist_width = kDescCellScale * sigma;
  const double radius_f = hist_width * std::numbers::sqrt2 * (kDescWidth + 1) * 0.5;
  const int radius = static_cast<int>(std::lround(radius_f));
  const int cx = static_cast<int>(std::lround(x));
  const int cy = static_cast<int>(std::lround(y));
  const double half = 0.5 * radius_f;
  if (cx < half || cy < half || cx > img.width - 1 - half || cy > img.height - 1 - half) return false;

  const double cos_t = std::cos(orientation) / hist_width;
  const double sin_t = std::sin(orientation) / hist_width;
  const double bins_per_rad = kDescBins / kTwoPi;
  const double weight_scale = -1.0 / (0.5 * kDescWidth * kDescWidth);
  constexpr int kH = kDescWidth + 2;
  constexpr int kO = kDescBins + 2;
  std::array<double, kH * kH * kO> hist{};

  for (int j = -radius; j <= radius; ++j) {
    const int py = cy + j;
    if (py <= 0 || py >= img.height - 1) continue;
    for (int i = -radius; i <= radius; ++i) {
      const int px = cx + i;
      if (px <= 0 || px >= img.width - 1) continue;
      // Offset rotated into the keypoint frame, in cell units.
      const double c_rot = i * cos_t + j * sin_t;
      const double r_rot = -i * sin_t + j * cos_t;
      const double rbin = r_rot + 0.5 * kDescWidth - 0.5;
      const double cbin = c_rot + 0.5 * kDescWidth - 0.5;
      if (!(rbin > -1.0 && rbin < kDescWidth && cbin > -1.0 && cbin < kDescWidth)) continue;
      const double dx = img.at(px + 1, py) - img.at(px - 1, py);
      const double dy = img.at(px, py + 1) - img.at(px, py - 1);
      const double mag = std::sqrt(dx * dx + dy * dy);
      if (mag == 0.0) continue;
      double angle = std::atan2(dy, dx) - orientation;
      angle = std::fmod(angle, kTwoPi);
      if (angle < 0.0) angle += kTwoPi;
      const double obin = angle * bins_per_rad;
      const double w = mag * std::exp((c_rot * c_rot + r_rot * r_rot) * weight_scale);

      const int r0 = static_cast<int>(std::floor(rbin));
      const int c0 = static_cast<int>(std::floor(cbin));
      int o0 = static_cast<int>(std::floor(obin));
      const double fr = rbin - r0;
      const double fc = cbin - c0;
      const double fo = obin - o0;
      o0 = ((o0 % kDescBins) + kDescBins) % kDescBins;
      for (int a = 0; a < 2; ++a) {
        const double wr = a ? fr : 1.0 - fr;
        for (int b = 0; b < 2; ++b) {
          const double wc = b ? fc : 1.0 - fc;
          for (int c = 0; c < 2; ++c) {
            const double wo = c ? fo : 1.0 - fo;
            const int idx = ((r0 + 1 + a) * kH + (c0 + 1 + b)) * kO + (o0 + c);
            hist[static_cast<std::size_t>(idx)] += w * wr * wc * wo;
          }
        }
      }
    }
  }

  std::array<double, kDescriptorSize> v{};
  for (int r = 0; r < kDescWidth; ++r) {
    for (int c = 0; c < kDescWidth; ++c) {
      const int base = ((r + 1) * kH + (c + 1)) * kO;
      // Orientation bins wrap around.
      hist[static_cast<std::size_t>(base)] += hist[static_cast<std::size_t>(base + kDescBins)];
      hist[static_cast<std::size_t>(base + 1)] += hist[static_cast<std::size_t>(base + kDescBins + 1)];
      for (int o = 0; o < kDescBins; ++o) {
        v[static_cast<std::size_t>((r * kDescWidth + c) * kDescBins + o)] = hist[static_cast<std::size_t>(base + o)];
      }
    }
  }
  if (!normalize_and_clip(v)) return false;
  for (int k = 0; k < kDescriptorSize; ++k) out[static_cast<std::size_t>(k)] = static_cast<float>(v[static_cast<std::size_t>(k)]);
  return true;
}

DescriptorSet describe_in(const std::vector<Octave>& octaves, const KeypointSet& kps, const SiftParams& p) {
  DescriptorSet out;
  out.keypoints.reserve(kps.size());
  out.descriptors.reserve(kps.size());
  for (const Keypoint& kp : kps) {
    const int o = std::clamp(kp.octave, 0, static_cast<int>(octaves.size()) - 1);
    const int layer = std::clamp(kp.layer, 1, p.scales_per_octave);
    const double f = std::ldexp(1.0, o);
    Descriptor d{};
    if (describe(octaves[static_cast<std::size_t>(o)].gauss[static_cast<std::size_t>(layer)], kp.x / f, kp.y / f,
                 kp.scale / f, kp.orientation, d)) {
      out.keypoints.push_back(kp);
      out.descriptors.push_back(d);
    } else {
      ++out.dropped;
    }
  }
  return out;
}

void check_size(const GrayImage& img) {
  if (img.width() < 16 || img.height() < 16) {
    throw Error(ErrorCode::kImageTooSmall, "keypoint detection needs at least 16x16");
  }
}

}  // namespace

std::vector<Vec2> DescriptorSet::positions() const {
  std::vector<Vec2> pts;
  pts.reserve(keypoints.size());
  for (const auto& k : keypoints) pts.emplace_back(k.x, k.y);
  return pts;
}

KeypointSet detect_keypoints(const GrayImage& img, int max_count, const SiftParams& params) {
  check_size(img);
  return detect_in(build_scale_space(img, params), max_count, params);
}

DescriptorSet compute_descriptors(const GrayImage& img, const KeypointSet& kps, const SiftParams& params) {
  if (kps.empty()) return {};
  check_size(img);
  return describe_in(build_scale_space(img, params), kps, params);
}

DescriptorSet extract_features(const GrayImage& img, int max_count, const SiftParams& params) {
  check_size(img);
  const auto octaves = build_scale_space(img, params);
  return describe_in(octaves, detect_in(octaves, max_count, params), params);
}

}  // namespace gscout
