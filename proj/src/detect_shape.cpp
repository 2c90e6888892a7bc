#include "gscout/detect_shape.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <deque>
#include <numbers>

#include "gscout/error.hpp"

namespace gscout {
namespace {

struct EdgePixel {
  float x, y;
  float ux, uy;  // unit gradient direction
};

// Edge pixels thinned by non-maximum suppression along the gradient, so a
// clean circle of radius r contributes roughly 2*pi*r voters.
std::vector<EdgePixel> thin_edges(const Gradients& g, double fraction) {
  const int w = g.mag.width;
  const int h = g.mag.height;
  const float peak = *std::max_element(g.mag.data.begin(), g.mag.data.end());
  std::vector<EdgePixel> edges;
  if (peak <= 0.0f) return edges;
  const float thr = static_cast<float>(fraction) * peak;
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      const float m = g.mag.at(x, y);
      if (m <= thr) continue;
      const float gx = g.gx.at(x, y);
      const float gy = g.gy.at(x, y);
      // Quantize the gradient direction to one of four neighbour axes.
      const double a = std::atan2(gy, gx);
      const int sector = static_cast<int>(std::lround(a / (std::numbers::pi / 4))) & 3;
      static constexpr std::array<std::array<int, 2>, 4> kDir = {{{1, 0}, {1, 1}, {0, 1}, {-1, 1}}};
      const int dx = kDir[static_cast<std::size_t>(sector)][0];
      const int dy = kDir[static_cast<std::size_t>(sector)][1];
      if (m < g.mag.at(x + dx, y + dy) || m <= g.mag.at(x - dx, y - dy)) continue;
      edges.push_back({static_cast<float>(x), static_cast<float>(y), gx / m, gy / m});
    }
  }
  return edges;
}

inline void splat(FloatImage& acc, float x, float y) {
  // Truncation equals floor once negatives are rejected.
  if (!(x >= 0.0f && y >= 0.0f)) return;
  const int x0 = static_cast<int>(x);
  const int y0 = static_cast<int>(y);
  if (x0 + 1 >= acc.width || y0 + 1 >= acc.height) return;
  const float tx = x - static_cast<float>(x0);
  const float ty = y - static_cast<float>(y0);
  float* row = &acc.data[static_cast<std::size_t>(y0) * acc.width + x0];
  const float a = (1 - tx) * (1 - ty);
  const float b = tx * (1 - ty);
  const float c = (1 - tx) * ty;
  row[0] += a;
  row[1] += b;
  row[acc.width] += c;
  row[acc.width + 1] += 1.0f - a - b - c;
}

// Votes of every edge pixel at one radius, spread over a fan of rays spaced
// about one pixel apart along the arc. Bilinear splatting makes each voter
// contribute close to one unit to the cell under the true centre regardless
// of sub-pixel alignment.
void vote_layer(const std::vector<EdgePixel>& edges, double rho, double fan_rad, FloatImage& acc) {
  std::fill(acc.data.begin(), acc.data.end(), 0.0f);
  const int half = static_cast<int>(std::floor(rho * fan_rad));
  std::vector<float> c(static_cast<std::size_t>(2 * half + 1));
  std::vector<float> s(c.size());
  for (int k = -half; k <= half; ++k) {
    c[static_cast<std::size_t>(k + half)] = static_cast<float>(rho * std::cos(k / rho));
    s[static_cast<std::size_t>(k + half)] = static_cast<float>(rho * std::sin(k / rho));
  }
  for (const EdgePixel& e : edges) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      const float dx = c[i] * e.ux - s[i] * e.uy;
      const float dy = c[i] * e.uy + s[i] * e.ux;
      splat(acc, e.x + dx, e.y + dy);
      splat(acc, e.x - dx, e.y - dy);
    }
  }
}

struct Peak {
  int x, y, bin;
  double votes;  // normalized, unclamped
};

}  // namespace

std::vector<CircleHypothesis> hough_circles(const GrayImage& img, double r_min, double r_max,
                                            const HoughParams& params) {
  if (!(r_min >= 4.0) || !(r_min < r_max) || r_max > 0.5 * std::min(img.width(), img.height())) {
    throw Error(ErrorCode::kBadRadiusRange, "need 4 <= r_min < r_max <= min(w,h)/2");
  }
  const std::vector<EdgePixel> edges = thin_edges(sobel_gradients(img), params.edge_fraction);
  if (edges.empty()) return {};

  const int w = img.width();
  const int h = img.height();
  const double fan = params.fan_deg * std::numbers::pi / 180.0;
  // Radius bin b is centred on r_min + 2b + 0.5 and sums the four unit-spaced
  // layers r_min + 2b - 1 .. r_min + 2b + 2, so neighbouring bins overlap and
  // a thin ring always falls entirely inside at least one bin.
  const int bins = static_cast<int>(std::floor((r_max - r_min) / 2.0)) + 1;
  const auto bin_radius = [&](int b) { return r_min + 2.0 * b + 0.5; };

  std::deque<FloatImage> layers;  // last four unit layers
  std::deque<FloatImage> window;  // normalized bins b-1, b, b+1
  std::vector<Peak> peaks;
  FloatImage layer(w, h);

  // Peaks of bin b against a 5x5 neighbourhood in bins b-1..b+1; either
  // neighbour bin may be absent at the ends of the range.
  const auto find_peaks = [&](int b, const FloatImage* prev, const FloatImage& cur, const FloatImage* next) {
    const std::array<const FloatImage*, 3> nbs = {prev, &cur, next};
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const float v = cur.at(x, y);
        if (v < params.vote_threshold) continue;
        bool is_max = true;
        for (int k = 0; k < 3 && is_max; ++k) {
          if (!nbs[static_cast<std::size_t>(k)]) continue;
          const FloatImage& nb = *nbs[static_cast<std::size_t>(k)];
          for (int dy = -2; dy <= 2 && is_max; ++dy) {
            const int yy = y + dy;
            if (yy < 0 || yy >= h) continue;
            for (int dx = -2; dx <= 2; ++dx) {
              const int xx = x + dx;
              if (xx < 0 || xx >= w || (k == 1 && dx == 0 && dy == 0)) continue;
              // Strict against earlier positions, non-strict against later
              // ones, so a plateau yields exactly one peak.
              const bool earlier = k < 1 || (k == 1 && (dy < 0 || (dy == 0 && dx < 0)));
              const float o = nb.at(xx, yy);
              if (earlier ? o >= v : o > v) {
                is_max = false;
                break;
              }
            }
          }
        }
        if (is_max) peaks.push_back({x, y, b, v});
      }
    }
  };

  for (int k = 0; k < 2 * bins + 2; ++k) {
    vote_layer(edges, std::max(1.0, r_min - 1.0 + k), fan, layer);
    layers.push_back(layer);
    if (layers.size() > 4) layers.pop_front();
    if (k < 3 || (k - 3) % 2 != 0) continue;
    const int b = (k - 3) / 2;
    FloatImage sum(w, h);
    const float norm = static_cast<float>(1.0 / (2.0 * std::numbers::pi * bin_radius(b)));
    for (std::size_t i = 0; i < sum.data.size(); ++i) {
      sum.data[i] = (layers[0].data[i] + layers[1].data[i] + layers[2].data[i] + layers[3].data[i]) * norm;
    }
    window.push_back(std::move(sum));
    if (window.size() > 3) window.pop_front();
    // Bin b-1 now has both neighbours.
    if (b == 1) find_peaks(0, nullptr, window[0], &window[1]);
    if (b >= 2) find_peaks(b - 1, &window[0], window[1], &window[2]);
  }
  if (bins == 1) find_peaks(0, nullptr, window.back(), nullptr);
  if (bins >= 2) find_peaks(bins - 1, &window[window.size() - 2], window.back(), nullptr);

  std::stable_sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.votes > b.votes; });
  if (static_cast<int>(peaks.size()) > params.max_circles) peaks.resize(static_cast<std::size_t>(params.max_circles));

  std::vector<CircleHypothesis> out;
  for (const Peak& p : peaks) {
    const double rb = bin_radius(p.bin);
    // Radius from the median distance of edge pixels whose gradient points
    // at the centre cell.
    std::vector<double> dist;
    const double cos_fan = std::cos(fan);
    for (const EdgePixel& e : edges) {
      const double dx = e.x - p.x;
      const double dy = e.y - p.y;
      const double d = std::hypot(dx, dy);
      if (d < rb - 2.0 || d > rb + 2.0 || d <= 0.0) continue;
      if (std::abs(dx * e.ux + dy * e.uy) / d < cos_fan) continue;
      dist.push_back(d);
    }
    double r = rb;
    if (dist.size() >= 8) {
      auto mid = dist.begin() + static_cast<std::ptrdiff_t>(dist.size() / 2);
      std::nth_element(dist.begin(), mid, dist.end());
      r = *mid;
    }
    out.push_back({static_cast<double>(p.x), static_cast<double>(p.y), std::clamp(r, r_min, r_max),
                   std::min(1.0, p.votes)});
  }
  return out;
}

CircleScore score_circle(const GrayImage& img, const CircleHypothesis& c, const MeterTemplate& tmpl, double ratio,
                         double margin) {
  CircleScore score;
  score.region = Region{c.cx - c.r, c.cy - c.r, 2.0 * c.r, 2.0 * c.r};
  const double pad = margin * 2.0 * c.r;
  const int x0 = static_cast<int>(std::floor(c.cx - c.r - pad));
  const int y0 = static_cast<int>(std::floor(c.cy - c.r - pad));
  const int side = std::max(1, static_cast<int>(std::ceil(c.cx + c.r + pad)) - x0);
  const double s = tmpl.nominal_diameter / (2.0 * c.r);
  const int out = std::max(16, static_cast<int>(std::lround(side * s)));
  try {
    const GrayImage patch = resize(crop(img, x0, y0, side, side), out, out);
    const DescriptorSet feats = extract_features(patch);
    if (feats.size() == 0) return score;
    score.match_count = static_cast<int>(match_ratio(feats.descriptors, tmpl.features.descriptors, ratio).size());
  } catch (const Error&) {
    score.match_count = 0;
  }
  return score;
}

DetectionResult detect_shape(const GrayImage& view, const MeterTemplate& tmpl, const ShapeConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  DetectionResult res;
  res.method = "shape";
  const double r_max = cfg.r_max > 0.0 ? cfg.r_max : std::min(view.width(), view.height()) / 3.0;
  const std::vector<CircleHypothesis> circles = hough_circles(view, cfg.r_min, r_max, cfg.hough);

  int best = -1;
  CircleScore best_score;
  for (std::size_t i = 0; i < circles.size(); ++i) {
    const CircleScore s = score_circle(view, circles[i], tmpl, cfg.ratio, cfg.margin);
    if (s.match_count > best_score.match_count) {
      best = static_cast<int>(i);
      best_score = s;
    }
  }
  RoundTrace tr;
  tr.note = std::to_string(circles.size()) + " circles";
  tr.matches = best_score.match_count;
  res.trace.push_back(tr);
  if (circles.empty()) {
    res.reason = "NoCircles";
  } else if (best < 0 || best_score.match_count < cfg.min_matches) {
    res.reason = "BelowMinMatches";
  } else {
    res.found = true;
    res.region = best_score.region;
    res.confidence = best_score.match_count / (best_score.match_count + 10.0);
  }
  if (cfg.keep_views) res.views.emplace_back("wide", view);
  res.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

DetectionResult detect_shape(CameraProvider& camera, const PtzState& ptz, const MeterTemplate& tmpl,
                             const ShapeConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  DetectionResult res = detect_shape(camera.capture(ptz), tmpl, cfg);
  res.final_ptz = ptz;
  res.trace.front().ptz = ptz;
  res.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace gscout
