#include <cstring>
#include <string>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gscout/bench.hpp"
#include "gscout/detect_background.hpp"
#include "gscout/detect_shape.hpp"
#include "gscout/detect_texture.hpp"
#include "gscout/error.hpp"
#include "gscout/features.hpp"
#include "gscout/png_io.hpp"
#include "gscout/ptzsim.hpp"

namespace py = pybind11;
using namespace gscout;

namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

GrayImage from_array(const U8Array& a) {
  if (a.ndim() != 2) throw Error(ErrorCode::kInvalidArgument, "expected a 2-D uint8 array");
  const int h = static_cast<int>(a.shape(0)), w = static_cast<int>(a.shape(1));
  std::vector<std::uint8_t> data(a.data(), a.data() + a.size());
  return GrayImage(w, h, std::move(data));
}

py::array_t<std::uint8_t> to_array(const GrayImage& img) {
  py::array_t<std::uint8_t> out({img.height(), img.width()});
  std::memcpy(out.mutable_data(), img.pixels().data(), img.pixels().size());
  return out;
}

py::array_t<float> descriptors_array(const std::vector<Descriptor>& ds) {
  py::array_t<float> out({static_cast<py::ssize_t>(ds.size()), static_cast<py::ssize_t>(kDescriptorSize)});
  for (std::size_t i = 0; i < ds.size(); ++i) {
    std::memcpy(out.mutable_data(static_cast<py::ssize_t>(i)), ds[i].data(), sizeof(float) * kDescriptorSize);
  }
  return out;
}

std::vector<Descriptor> descriptors_from(const py::array_t<float, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2 || a.shape(1) != kDescriptorSize) {
    throw Error(ErrorCode::kInvalidArgument, "expected an (n, " + std::to_string(kDescriptorSize) + ") float array");
  }
  std::vector<Descriptor> out(static_cast<std::size_t>(a.shape(0)));
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::memcpy(out[i].data(), a.data(static_cast<py::ssize_t>(i)), sizeof(float) * kDescriptorSize);
  }
  return out;
}

ExperimentConfig config_from(const std::string& text) {
  return text.empty() ? ExperimentConfig{} : experiment_config_from_json(text);
}

py::dict result_dict(const DetectionResult& r) {
  py::dict d;
  d["found"] = r.found;
  d["region"] = r.region;
  d["confidence"] = r.confidence;
  d["method"] = r.method;
  d["reason"] = r.reason;
  d["final_ptz"] = r.final_ptz;
  d["ms"] = r.ms;
  py::list trace;
  for (const auto& t : r.trace) {
    py::dict e;
    e["round"] = t.round;
    e["ptz"] = t.ptz;
    e["keypoints"] = t.keypoints;
    e["matches"] = t.matches;
    e["weights"] = t.weights;
    e["note"] = t.note;
    trace.append(e);
  }
  d["trace"] = trace;
  py::dict views;
  for (const auto& [name, img] : r.views) views[py::str(name)] = to_array(img);
  d["views"] = views;
  return d;
}

}  // namespace

PYBIND11_MODULE(_gscout, m) {
  m.doc() = "Meter localization with a pan-tilt-zoom camera: simulator, detectors and benchmark";
  py::register_exception<Error>(m, "GscoutError", PyExc_RuntimeError);

  py::enum_<MeterShape>(m, "MeterShape").value("CIRCLE", MeterShape::kCircle).value("RECT", MeterShape::kRect);
  py::enum_<Method>(m, "Method")
      .value("SHAPE", Method::kShape)
      .value("TEXTURE", Method::kTexture)
      .value("BACKGROUND", Method::kBackground);

  py::class_<Region>(m, "Region")
      .def(py::init<>())
      .def(py::init([](double x, double y, double w, double h) { return Region{x, y, w, h}; }), py::arg("x"),
           py::arg("y"), py::arg("w"), py::arg("h"))
      .def_readwrite("x", &Region::x)
      .def_readwrite("y", &Region::y)
      .def_readwrite("w", &Region::w)
      .def_readwrite("h", &Region::h)
      .def("center", &Region::center)
      .def("__repr__", [](const Region& r) {
        return "Region(x=" + std::to_string(r.x) + ", y=" + std::to_string(r.y) + ", w=" + std::to_string(r.w) +
               ", h=" + std::to_string(r.h) + ")";
      });

  py::class_<PtzState>(m, "PtzState")
      .def(py::init<>())
      .def(py::init([](double pan, double tilt, double zoom) { return PtzState{pan, tilt, zoom}; }), py::arg("pan"),
           py::arg("tilt"), py::arg("zoom"))
      .def_readwrite("pan", &PtzState::pan)
      .def_readwrite("tilt", &PtzState::tilt)
      .def_readwrite("zoom", &PtzState::zoom);

  py::class_<RobotPose>(m, "RobotPose")
      .def(py::init<>())
      .def(py::init([](double x, double y, double yaw, double standoff) { return RobotPose{x, y, yaw, standoff}; }),
           py::arg("x"), py::arg("y"), py::arg("yaw"), py::arg("standoff") = 5.0)
      .def_readwrite("x", &RobotPose::x)
      .def_readwrite("y", &RobotPose::y)
      .def_readwrite("yaw", &RobotPose::yaw)
      .def_readwrite("standoff", &RobotPose::standoff);

  py::class_<CameraConfig>(m, "CameraConfig")
      .def(py::init<>())
      .def_readwrite("view_w", &CameraConfig::view_w)
      .def_readwrite("view_h", &CameraConfig::view_h)
      .def_readwrite("hfov_deg", &CameraConfig::hfov_deg)
      .def_readwrite("zoom_max", &CameraConfig::zoom_max)
      .def_readwrite("blur_sigma", &CameraConfig::blur_sigma)
      .def_readwrite("noise_sigma", &CameraConfig::noise_sigma)
      .def("base_focal", &CameraConfig::base_focal);

  py::class_<SceneOptions>(m, "SceneOptions")
      .def(py::init<>())
      .def_readwrite("camera", &SceneOptions::camera)
      .def_readwrite("nominal_pose", &SceneOptions::nominal_pose)
      .def_readwrite("wall_w", &SceneOptions::wall_w)
      .def_readwrite("wall_h", &SceneOptions::wall_h);

  py::class_<GroundTruth>(m, "GroundTruth")
      .def_readonly("meter_id", &GroundTruth::meter_id)
      .def_readonly("region", &GroundTruth::region)
      .def_readonly("in_front", &GroundTruth::in_front)
      .def_readonly("fully_in_view", &GroundTruth::fully_in_view);

  py::class_<SceneSpec>(m, "Scene")
      .def_readonly("seed", &SceneSpec::seed)
      .def_readonly("shape", &SceneSpec::shape)
      .def_readonly("meter_diameter_at_wide", &SceneSpec::meter_diameter_at_wide)
      .def_readonly("camera", &SceneSpec::camera)
      .def_readonly("nominal_pose", &SceneSpec::nominal_pose)
      .def_readonly("nominal_ptz", &SceneSpec::nominal_ptz)
      .def("wall", [](const SceneSpec& s) { return to_array(s.wall()); })
      .def("save", [](const SceneSpec& s, const std::string& dir) { save_scene(s, dir); }, py::arg("dir"));

  m.def("generate_scene", &generate_scene, py::arg("seed"), py::arg("shape"), py::arg("diameter"),
        py::arg("clutter") = 0.5, py::arg("options") = SceneOptions{});
  m.def("load_scene", &load_scene, py::arg("dir"));
  m.def(
      "render_view", [](const SceneSpec& s, const RobotPose& p, const PtzState& z) { return to_array(render_view(s, p, z)); },
      py::arg("scene"), py::arg("pose"), py::arg("ptz"));
  m.def("ground_truth", &ground_truth, py::arg("scene"), py::arg("meter_id"), py::arg("pose"), py::arg("ptz"));
  m.def("perturb_pose", &perturb_pose, py::arg("nominal"), py::arg("seed"), py::arg("sigma_xy") = 0.15,
        py::arg("sigma_yaw") = 0.05235987755982989);
  m.def("point_zoom_command", &point_zoom_command, py::arg("target"), py::arg("current"), py::arg("zoom_factor"),
        py::arg("camera"));
  m.def("iou", &iou, py::arg("a"), py::arg("b"));

  m.def("read_png", [](const std::string& path) { return to_array(read_png(path)); }, py::arg("path"));
  m.def("write_png", [](const std::string& path, const U8Array& img) { write_png(path, from_array(img)); },
        py::arg("path"), py::arg("image"));

  m.def(
      "extract_features",
      [](const U8Array& img) {
        const DescriptorSet f = extract_features(from_array(img));
        py::array_t<double> kps({static_cast<py::ssize_t>(f.size()), static_cast<py::ssize_t>(4)});
        auto k = kps.mutable_unchecked<2>();
        for (std::size_t i = 0; i < f.size(); ++i) {
          const auto& kp = f.keypoints[i];
          const auto r = static_cast<py::ssize_t>(i);
          k(r, 0) = kp.x;
          k(r, 1) = kp.y;
          k(r, 2) = kp.scale;
          k(r, 3) = kp.orientation;
        }
        return py::make_tuple(kps, descriptors_array(f.descriptors));
      },
      py::arg("image"), "Returns (keypoints (n, 4): x, y, scale, orientation; descriptors (n, 128)).");
  m.def(
      "match_ratio",
      [](const py::array_t<float, py::array::c_style | py::array::forcecast>& q,
         const py::array_t<float, py::array::c_style | py::array::forcecast>& t, double ratio, int threads) {
        const auto qd = descriptors_from(q), td = descriptors_from(t);
        py::list out;
        for (const auto& mt : match_ratio(qd, td, ratio, threads).pairs) out.append(py::make_tuple(mt.query, mt.train, mt.distance));
        return out;
      },
      py::arg("query"), py::arg("train"), py::arg("ratio") = 0.75, py::arg("threads") = 1,
      "Returns a list of (query index, train index, distance).");
  m.def(
      "hough_circles",
      [](const U8Array& img, double r_min, double r_max) {
        py::list out;
        for (const auto& h : hough_circles(from_array(img), r_min, r_max)) out.append(py::make_tuple(h.cx, h.cy, h.r, h.votes));
        return out;
      },
      py::arg("image"), py::arg("r_min"), py::arg("r_max"), "Returns a list of (cx, cy, r, votes).");
  m.def("update_weights", [](std::vector<double> weights, const std::vector<double>& scores, double eps,
                             double prune_ratio) {
    const auto keep = update_weights(weights, scores, eps, prune_ratio);
    return py::make_tuple(weights, keep);
  }, py::arg("weights"), py::arg("scores"), py::arg("eps") = 1e-3, py::arg("prune_ratio") = 1e-4,
     "Returns (surviving weights, surviving indices).");

  m.def(
      "detect",
      [](const SceneSpec& scene, const std::string& method, const RobotPose& pose, const std::string& config_json,
         std::uint64_t seed, bool keep_views) {
        const ExperimentConfig cfg = config_from(config_json);
        const Method meth = parse_method(method);
        const MeterTemplate tmpl = template_from_scene(scene, 0, cfg.template_diameter);
        SimulatedCamera camera(scene, pose);
        DetectionResult r;
        {
          py::gil_scoped_release release;
          if (meth == Method::kShape) {
            ShapeConfig c = cfg.shape;
            c.keep_views = keep_views;
            r = detect_shape(camera, scene.nominal_ptz, tmpl, c);
          } else if (meth == Method::kTexture) {
            TextureConfig c = cfg.texture;
            c.keep_views = keep_views;
            c.candidate_seed = seed;
            r = detect_texture(camera, scene.nominal_pose, scene.nominal_ptz, tmpl, map_entry_from_scene(scene, 0), c);
          } else {
            BackgroundConfig c = cfg.background;
            c.keep_views = keep_views;
            c.seed = seed;
            r = detect_background(camera, scene.nominal_ptz, annotation_from_scene(scene, scene.nominal_ptz), 0, tmpl, c);
          }
        }
        return result_dict(r);
      },
      py::arg("scene"), py::arg("method"), py::arg("pose"), py::arg("config_json") = std::string(),
      py::arg("seed") = 0, py::arg("keep_views") = false,
      "Runs one detection episode against meter 0 of a scene; an empty config means defaults.");

  m.def("default_config_json", [] { return experiment_config_to_json(ExperimentConfig{}); });
  m.def(
      "run_cell",
      [](double diameter, const std::string& method, const std::string& shape, const std::string& config_json) {
        const ExperimentConfig cfg = config_from(config_json);
        CellResult c;
        {
          py::gil_scoped_release release;
          c = run_cell(cfg, parse_meter_shape(shape), diameter, parse_method(method));
        }
        py::dict d;
        d["successes"] = c.successes;
        d["trials"] = c.trials;
        d["mean_iou"] = c.mean_iou;
        d["mean_ms"] = c.mean_ms;
        py::list runs;
        for (const auto& t : c.runs) {
          py::dict r;
          r["seed"] = t.seed;
          r["found"] = t.found;
          r["success"] = t.success;
          r["iou"] = t.iou;
          r["reason"] = t.reason;
          runs.append(r);
        }
        d["runs"] = runs;
        return d;
      },
      py::arg("diameter"), py::arg("method"), py::arg("shape") = "circle", py::arg("config_json") = std::string());
  m.def(
      "run_grid_csv",
      [](const std::string& config_json) {
        const ExperimentConfig cfg = config_from(config_json);
        py::gil_scoped_release release;
        return to_csv(run_grid(cfg));
      },
      py::arg("config_json"), "Runs the configured grid and returns the CSV text.");
}
