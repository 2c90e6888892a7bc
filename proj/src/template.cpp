#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "gscout/detection.hpp"
#include "gscout/error.hpp"
#include "gscout/png_io.hpp"
#include "json_util.hpp"

namespace gscout {

using nlohmann::json;

namespace {
constexpr double kTemplateFill = 128.0;
}  // namespace

std::uint64_t content_hash(const GrayImage& img) {
  // FNV-1a over the dimensions and the pixels.
  std::uint64_t h = 1469598103934665603ULL;
  const auto mix = [&h](std::uint64_t byte) {
    h ^= byte;
    h *= 1099511628211ULL;
  };
  for (int v : {img.width(), img.height()}) {
    for (int s = 0; s < 32; s += 8) mix(static_cast<std::uint64_t>((v >> s) & 0xff));
  }
  for (std::uint8_t p : img.pixels()) mix(p);
  return h;
}

bool MeterTemplate::coherent() const { return !image.empty() && features_hash == content_hash(image); }

MeterTemplate make_template(GrayImage image, double nominal_diameter, const Region& meter_region) {
  if (!(nominal_diameter > 0.0)) throw Error(ErrorCode::kInvalidArgument, "nominal_diameter must be positive");
  MeterTemplate t;
  t.image = std::move(image);
  t.nominal_diameter = nominal_diameter;
  t.meter_region = meter_region;
  t.features = extract_features(t.image);
  t.features_hash = content_hash(t.image);
  return t;
}

MeterTemplate make_template(GrayImage image, double nominal_diameter) {
  const double w = image.width();
  const double h = image.height();
  const double mh = nominal_diameter * std::min(1.0, h / w);
  const Region r{0.5 * (w - nominal_diameter), 0.5 * (h - mh), nominal_diameter, mh};
  return make_template(std::move(image), nominal_diameter, r);
}

MeterTemplate template_from_scene(const SceneSpec& scene, int meter_id, double nominal_diameter, double margin) {
  const MeterPlacement& m = scene.meter(meter_id);
  const double pad = margin * m.diameter;
  const int x0 = static_cast<int>(std::floor(m.center.x() - 0.5 * m.width() - pad));
  const int y0 = static_cast<int>(std::floor(m.center.y() - 0.5 * m.height - pad));
  const int x1 = static_cast<int>(std::ceil(m.center.x() + 0.5 * m.width() + pad));
  const int y1 = static_cast<int>(std::ceil(m.center.y() + 0.5 * m.height + pad));
  const double s = nominal_diameter / m.diameter;
  const int out_w = std::max(16, static_cast<int>(std::lround((x1 - x0) * s)));
  const int out_h = std::max(16, static_cast<int>(std::lround((y1 - y0) * s)));
  const double sx = static_cast<double>(out_w) / (x1 - x0);
  const double sy = static_cast<double>(out_h) / (y1 - y0);
  // Pixel centres sit on integers, so a pixel's left edge is at -0.5.
  const Region meter{(m.center.x() - 0.5 * m.width() - x0 + 0.5) * sx - 0.5,
                     (m.center.y() - 0.5 * m.height - y0 + 0.5) * sy - 0.5, m.width() * sx, m.height * sy};
  GrayImage img = resize(crop(scene.wall(), x0, y0, x1 - x0, y1 - y0), out_w, out_h);
  // The reference shows the meter alone: everything outside its outline is
  // replaced by a neutral fill, with a one-pixel soft edge.
  const Vec2 c = meter.center();
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      double inside;
      if (m.shape == MeterShape::kCircle) {
        inside = 0.5 * meter.w - std::hypot(x - c.x(), y - c.y());
      } else {
        inside = std::min(0.5 * meter.w - std::abs(x - c.x()), 0.5 * meter.h - std::abs(y - c.y()));
      }
      const double cover = std::clamp(inside + 0.5, 0.0, 1.0);
      img.at(x, y) = to_intensity(kTemplateFill + cover * (img.at(x, y) - kTemplateFill));
    }
  }
  return make_template(std::move(img), nominal_diameter, meter);
}

void save_template(const MeterTemplate& tmpl, const std::string& png_path) {
  write_png(png_path, tmpl.image);
  const json doc = {{"schema", "gauge-scout-template/1"},
                    {"nominal_diameter", tmpl.nominal_diameter},
                    {"meter_region", detail::region_to_json(tmpl.meter_region)}};
  std::ofstream out(png_path + ".json");
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + png_path + ".json");
  out << doc.dump(2) << "\n";
}

MeterTemplate load_template(const std::string& png_path) {
  const json doc = detail::read_json_file(png_path + ".json");
  GrayImage img = read_png(png_path);
  try {
    const double d = doc.at("nominal_diameter").get<double>();
    if (doc.contains("meter_region")) {
      return make_template(std::move(img), d, detail::region_from_json(doc.at("meter_region")));
    }
    return make_template(std::move(img), d);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("malformed template sidecar: ") + e.what());
  }
}

}  // namespace gscout
