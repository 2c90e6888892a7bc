#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "gscout/error.hpp"
#include "gscout/features.hpp"

namespace gscout {
namespace {

// Hartley normalisation: centroid to origin, mean distance sqrt(2).
Eigen::Matrix3d normalizer(std::span<const Vec2> pts) {
  Vec2 c = Vec2::Zero();
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  double d = 0.0;
  for (const auto& p : pts) d += (p - c).norm();
  d /= static_cast<double>(pts.size());
  const double s = d > 1e-12 ? std::numbers::sqrt2 / d : 1.0;
  Eigen::Matrix3d t;
  t << s, 0, -s * c.x(), 0, s, -s * c.y(), 0, 0, 1;
  return t;
}

double cross(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

// Rejects minimal samples that cannot define a stable homography: nearly
// collinear triples, or orientation flips between the two point sets.
bool good_quad(const std::array<Vec2, 4>& s, const std::array<Vec2, 4>& d) {
  static constexpr int kTriples[4][3] = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
  for (const auto& t : kTriples) {
    const double cs = cross(s[t[0]], s[t[1]], s[t[2]]);
    const double cd = cross(d[t[0]], d[t[1]], d[t[2]]);
    if (std::abs(cs) < 1.0 || std::abs(cd) < 1.0) return false;
    if ((cs > 0) != (cd > 0)) return false;
  }
  return true;
}

double transfer_error(const Homography& h, const Vec2& s, const Vec2& d) {
  if (h.apply_w(s) <= 0.0) return std::numeric_limits<double>::infinity();
  return (h.apply(s) - d).norm();
}

}  // namespace

Homography fit_similarity(std::span<const Vec2> src, std::span<const Vec2> dst) {
  const auto n = static_cast<Eigen::Index>(src.size());
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "similarity needs 2 correspondences");
  Eigen::MatrixXd a(2 * n, 4);
  Eigen::VectorXd b(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec2& s = src[static_cast<std::size_t>(i)];
    const Vec2& d = dst[static_cast<std::size_t>(i)];
    a.row(2 * i) << s.x(), -s.y(), 1.0, 0.0;
    a.row(2 * i + 1) << s.y(), s.x(), 0.0, 1.0;
    b(2 * i) = d.x();
    b(2 * i + 1) = d.y();
  }
  const Eigen::Vector4d x = a.colPivHouseholderQr().solve(b);
  Eigen::Matrix3d m;
  m << x(0), -x(1), x(2), x(1), x(0), x(3), 0, 0, 1;
  return Homography(m);
}

Homography fit_homography(std::span<const Vec2> src, std::span<const Vec2> dst) {
  const auto n = static_cast<Eigen::Index>(src.size());
  if (n < 4) throw Error(ErrorCode::kInvalidArgument, "homography needs 4 correspondences");
  const Eigen::Matrix3d ts = normalizer(src);
  const Eigen::Matrix3d td = normalizer(dst);
  Eigen::MatrixXd a(2 * n, 9);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector3d s = ts * Eigen::Vector3d(src[static_cast<std::size_t>(i)].x(), src[static_cast<std::size_t>(i)].y(), 1.0);
    const Eigen::Vector3d d = td * Eigen::Vector3d(dst[static_cast<std::size_t>(i)].x(), dst[static_cast<std::size_t>(i)].y(), 1.0);
    a.row(2 * i) << -s.x(), -s.y(), -1.0, 0.0, 0.0, 0.0, d.x() * s.x(), d.x() * s.y(), d.x();
    a.row(2 * i + 1) << 0.0, 0.0, 0.0, -s.x(), -s.y(), -1.0, d.y() * s.x(), d.y() * s.y(), d.y();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  const Eigen::Matrix3d m = td.inverse() * hn * ts;
  return Homography(m).normalized();
}

RobustTransform estimate_transform_ransac(std::span<const Vec2> src, std::span<const Vec2> dst,
                                          const RansacParams& params, std::mt19937_64& rng) {
  if (src.size() != dst.size()) throw Error(ErrorCode::kInvalidArgument, "correspondence size mismatch");
  const bool similarity = params.model == TransformModel::kSimilarity;
  const std::size_t sample_size = similarity ? 2 : 4;
  const std::size_t n = src.size();
  if (n < sample_size || static_cast<int>(n) < params.min_inliers) {
    throw Error(ErrorCode::kNoRobustTransform, "only " + std::to_string(n) + " correspondences");
  }

  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  int best_count = -1;
  double best_err = 0.0;
  Homography best;
  std::array<std::size_t, 4> idx{};
  for (int it = 0; it < params.iterations; ++it) {
    for (std::size_t k = 0; k < sample_size; ++k) {
      bool fresh;
      do {
        idx[k] = pick(rng);
        fresh = std::find(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx[k]) ==
                idx.begin() + static_cast<std::ptrdiff_t>(k);
      } while (!fresh);
    }
    Homography h;
    if (similarity) {
      const std::array<Vec2, 2> s{src[idx[0]], src[idx[1]]};
      const std::array<Vec2, 2> d{dst[idx[0]], dst[idx[1]]};
      if ((s[0] - s[1]).norm() < 1e-6 || (d[0] - d[1]).norm() < 1e-6) continue;
      h = fit_similarity(s, d);
    } else {
      const std::array<Vec2, 4> s{src[idx[0]], src[idx[1]], src[idx[2]], src[idx[3]]};
      const std::array<Vec2, 4> d{dst[idx[0]], dst[idx[1]], dst[idx[2]], dst[idx[3]]};
      if (!good_quad(s, d)) continue;
      h = fit_homography(s, d);
    }
    if (!h.invertible() || !h.matrix().allFinite()) continue;
    int count = 0;
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = transfer_error(h, src[i], dst[i]);
      if (e < params.inlier_px) {
        ++count;
        err += e;
      }
    }
    if (count > best_count || (count == best_count && err < best_err)) {
      best_count = count;
      best_err = err;
      best = h;
    }
  }
  if (best_count < params.min_inliers) {
    throw Error(ErrorCode::kNoRobustTransform,
                "best consensus " + std::to_string(std::max(best_count, 0)) + " < " + std::to_string(params.min_inliers));
  }

  RobustTransform out;
  out.transform = best;
  for (int pass = 0; pass < 2; ++pass) {
    std::vector<Vec2> s_in;
    std::vector<Vec2> d_in;
    for (std::size_t i = 0; i < n; ++i) {
      if (transfer_error(out.transform, src[i], dst[i]) < params.inlier_px) {
        s_in.push_back(src[i]);
        d_in.push_back(dst[i]);
      }
    }
    if (s_in.size() < sample_size) break;
    const Homography refit = similarity ? fit_similarity(s_in, d_in) : fit_homography(s_in, d_in);
    if (!refit.invertible() || !refit.matrix().allFinite()) break;
    out.transform = refit;
  }
  out.inlier_mask.assign(n, false);
  out.inliers = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (transfer_error(out.transform, src[i], dst[i]) < params.inlier_px) {
      out.inlier_mask[i] = true;
      ++out.inliers;
    }
  }
  if (out.inliers < params.min_inliers) {
    throw Error(ErrorCode::kNoRobustTransform, "refit lost consensus");
  }
  return out;
}

RobustTransform estimate_transform_ransac(const MatchSet& matches, std::span<const Vec2> query_points,
                                          std::span<const Vec2> train_points, const RansacParams& params,
                                          std::mt19937_64& rng) {
  std::vector<Vec2> src;
  std::vector<Vec2> dst;
  src.reserve(matches.size());
  dst.reserve(matches.size());
  for (const Match& m : matches.pairs) {
    src.push_back(query_points[static_cast<std::size_t>(m.query)]);
    dst.push_back(train_points[static_cast<std::size_t>(m.train)]);
  }
  return estimate_transform_ransac(src, dst, params, rng);
}

}  // namespace gscout
