#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <thread>

#include "gscout/error.hpp"
#include "gscout/features.hpp"

namespace gscout {
namespace {

constexpr int kCheckStride = 32;

// Squared distance accumulated in index order; gives up (returning a value
// > bound) once the running sum exceeds bound. The running sum is monotone,
// so the decision matches a full scan.
inline float bounded_sq_distance(const Descriptor& a, const Descriptor& b, float bound) {
  float acc = 0.0f;
  for (int base = 0; base < kDescriptorSize; base += kCheckStride) {
    for (int i = base; i < base + kCheckStride; ++i) {
      const float d = a[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(i)];
      acc += d * d;
    }
    if (acc > bound) return acc;
  }
  return acc;
}

void match_range(std::span<const Descriptor> query, std::span<const Descriptor> train, double ratio,
                 std::size_t begin, std::size_t end, std::vector<Match>& slots, std::vector<char>& keep) {
  for (std::size_t q = begin; q < end; ++q) {
    float best = std::numeric_limits<float>::infinity();
    float second = std::numeric_limits<float>::infinity();
    int best_idx = -1;
    for (std::size_t t = 0; t < train.size(); ++t) {
      const float d = bounded_sq_distance(query[q], train[t], second);
      if (d < best) {
        second = best;
        best = d;
        best_idx = static_cast<int>(t);
      } else if (d < second) {
        second = d;
      }
    }
    const double d1 = std::sqrt(static_cast<double>(best));
    const double d2 = std::sqrt(static_cast<double>(second));
    if (best_idx >= 0 && d1 < ratio * d2) {
      slots[q] = Match{static_cast<int>(q), best_idx, d1};
      keep[q] = 1;
    }
  }
}

}  // namespace

std::vector<Match> MatchSet::sorted_by_distance() const {
  std::vector<Match> out = pairs;
  std::stable_sort(out.begin(), out.end(), [](const Match& a, const Match& b) { return a.distance < b.distance; });
  return out;
}

MatchSet match_ratio(std::span<const Descriptor> query, std::span<const Descriptor> train, double ratio,
                     int threads) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "ratio must lie in (0, 1)");
  }
  MatchSet out;
  if (train.size() < 2) {
    out.insufficient_train_set = true;
    return out;
  }
  std::vector<Match> slots(query.size());
  std::vector<char> keep(query.size(), 0);
  const std::size_t n_threads =
      std::clamp<std::size_t>(threads > 0 ? static_cast<std::size_t>(threads) : 1, 1, std::max<std::size_t>(1, query.size()));
  if (n_threads == 1) {
    match_range(query, train, ratio, 0, query.size(), slots, keep);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (query.size() + n_threads - 1) / n_threads;
    for (std::size_t t = 0; t < n_threads; ++t) {
      const std::size_t b = t * chunk;
      const std::size_t e = std::min(query.size(), b + chunk);
      if (b >= e) break;
      pool.emplace_back([&, b, e] { match_range(query, train, ratio, b, e, slots, keep); });
    }
  }
  for (std::size_t q = 0; q < query.size(); ++q) {
    if (keep[q]) out.pairs.push_back(slots[q]);
  }
  return out;
}

Concentration concentration_score(const MatchSet& matches, std::span<const Vec2> frame_points,
                                  double expected_radius, ConcentrationStrategy strategy) {
  Concentration out;
  if (matches.empty()) return out;
  std::vector<Vec2> pts;
  pts.reserve(matches.size());
  for (const Match& m : matches.pairs) pts.push_back(frame_points[static_cast<std::size_t>(m.train)]);

  Vec2 c = Vec2::Zero();
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());

  const double window = 1.5 * expected_radius;
  const auto count_within = [&](const Vec2& center) {
    int n = 0;
    for (const auto& p : pts) n += (p - center).norm() <= window ? 1 : 0;
    return n;
  };

  if (strategy == ConcentrationStrategy::kMeanShift) {
    // Start from the densest match, then shift to the mean of its window.
    int best = -1;
    for (const auto& p : pts) {
      const int n = count_within(p);
      if (n > best) {
        best = n;
        c = p;
      }
    }
    for (int it = 0; it < 20; ++it) {
      Vec2 acc = Vec2::Zero();
      int n = 0;
      for (const auto& p : pts) {
        if ((p - c).norm() <= window) {
          acc += p;
          ++n;
        }
      }
      const Vec2 next = acc / std::max(1, n);
      if ((next - c).norm() < 1e-6) break;
      c = next;
    }
  }
  out.centroid = c;
  out.has_centroid = true;
  out.score = static_cast<double>(count_within(c)) / static_cast<double>(pts.size());
  return out;
}

// ---------------------------------------------------------------------------
// Binary fixtures

namespace {

constexpr char kMagic[4] = {'G', 'S', 'D', 'S'};

void put_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw Error(ErrorCode::kIo, "truncated descriptor blob");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void write_descriptor_blob(std::ostream& out, std::span<const Descriptor> descriptors) {
  out.write(kMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(descriptors.size()));
  for (const auto& d : descriptors) {
    for (float f : d) {
      std::uint32_t bits;
      std::memcpy(&bits, &f, sizeof bits);
      put_u32(out, bits);
    }
  }
}

std::vector<Descriptor> read_descriptor_blob(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw Error(ErrorCode::kIo, "bad descriptor blob magic");
  }
  const std::uint32_t count = get_u32(in);
  std::vector<Descriptor> out(count);
  for (auto& d : out) {
    for (float& f : d) {
      const std::uint32_t bits = get_u32(in);
      std::memcpy(&f, &bits, sizeof f);
    }
  }
  return out;
}

void save_descriptors(const std::string& path, std::span<const Descriptor> descriptors) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot create " + path);
  write_descriptor_blob(out, descriptors);
}

std::vector<Descriptor> load_descriptors(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  return read_descriptor_blob(in);
}

}  // namespace gscout
