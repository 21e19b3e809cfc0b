#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <string>

#include "laserpath/error.hpp"
#include "laserpath/io.hpp"
#include "laserpath/pipeline.hpp"

namespace py = pybind11;
using namespace laserpath;

namespace {

using PointsArray = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

std::vector<Point3> to_points(const Eigen::Ref<const PointsArray>& a) {
  std::vector<Point3> out(static_cast<std::size_t>(a.rows()));
  for (Eigen::Index i = 0; i < a.rows(); ++i) out[static_cast<std::size_t>(i)] = a.row(i).transpose();
  return out;
}

PointsArray to_array(std::span<const Point3> pts) {
  PointsArray a(static_cast<Eigen::Index>(pts.size()), 3);
  for (std::size_t i = 0; i < pts.size(); ++i) a.row(static_cast<Eigen::Index>(i)) = pts[i].transpose();
  return a;
}

using Grid = py::array_t<double, py::array::c_style | py::array::forcecast>;
using Mask = py::array_t<bool, py::array::c_style | py::array::forcecast>;

CostField field_from_arrays(const Mask& lethal, const std::optional<Grid>& penalty) {
  if (lethal.ndim() != 2) throw Error(ErrorCode::kInvalidArgument, "lethal mask must be 2-D");
  const auto h = static_cast<int>(lethal.shape(0));
  const auto w = static_cast<int>(lethal.shape(1));
  CostField field(GridFrame{}, w, h);
  auto l = lethal.unchecked<2>();
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) field.set_lethal({r, c}, l(r, c));
  }
  if (penalty) {
    if (penalty->ndim() != 2 || penalty->shape(0) != h || penalty->shape(1) != w) {
      throw Error(ErrorCode::kLengthMismatch, "penalty array must match the lethal mask");
    }
    auto p = penalty->unchecked<2>();
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) field.set_penalty({r, c}, p(r, c));
    }
  }
  return field;
}

py::array_t<double> penalty_array(const CostField& f) {
  py::array_t<double> out({f.height(), f.width()});
  auto o = out.mutable_unchecked<2>();
  for (int r = 0; r < f.height(); ++r) {
    for (int c = 0; c < f.width(); ++c) o(r, c) = f.penalty({r, c});
  }
  return out;
}

py::array_t<bool> lethal_array(const CostField& f) {
  py::array_t<bool> out({f.height(), f.width()});
  auto o = out.mutable_unchecked<2>();
  for (int r = 0; r < f.height(); ++r) {
    for (int c = 0; c < f.width(); ++c) o(r, c) = f.lethal({r, c});
  }
  return out;
}

std::vector<std::pair<int, int>> path_cells(const GridPath& path) {
  std::vector<std::pair<int, int>> out;
  for (const auto& v : path.vertices) out.emplace_back(v.row, v.col);
  return out;
}

PipelineConfig config_from(const std::map<std::string, std::string>& settings) {
  PipelineConfig c;
  for (const auto& [k, v] : settings) apply_setting(c, k, v);
  c.validate();
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Point-cloud registration, top-down mapping and D* Lite planning";

  static py::exception<Error> error_type(m, "LaserpathError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type.ptr())(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  py::class_<PointCloud>(m, "PointCloud")
      .def(py::init([](const Eigen::Ref<const PointsArray>& pts) { return PointCloud(to_points(pts)); }),
           py::arg("points"))
      .def(py::init([](const Eigen::Ref<const PointsArray>& pts,
                       const Eigen::Ref<const PointsArray>& normals) {
             return PointCloud(to_points(pts), to_points(normals));
           }),
           py::arg("points"), py::arg("normals"))
      .def("__len__", &PointCloud::size)
      .def_property_readonly("has_normals", &PointCloud::has_normals)
      .def_property_readonly("points", [](const PointCloud& c) { return to_array(c.points()); })
      .def_property_readonly("normals", [](const PointCloud& c) { return to_array(c.normals()); });

  py::class_<RigidTransform>(m, "RigidTransform")
      .def(py::init<>())
      .def(py::init([](const Eigen::Matrix4d& m4) {
             return RigidTransform(RigidTransform::orthonormalize(m4.topLeftCorner<3, 3>()),
                                   m4.topRightCorner<3, 1>());
           }),
           py::arg("matrix"))
      .def_static("from_rpy", &RigidTransform::from_rpy, py::arg("roll"), py::arg("pitch"),
                  py::arg("yaw"), py::arg("translation") = Vector3::Zero())
      .def_property_readonly("rotation", &RigidTransform::rotation)
      .def_property_readonly("translation", &RigidTransform::translation)
      .def("matrix", &RigidTransform::matrix)
      .def("inverse", &RigidTransform::inverse)
      .def("rotation_angle", &RigidTransform::rotation_angle)
      .def("apply", [](const RigidTransform& t, const Eigen::Ref<const PointsArray>& pts) {
        PointsArray out(pts.rows(), 3);
        for (Eigen::Index i = 0; i < pts.rows(); ++i) out.row(i) = t.apply(pts.row(i).transpose()).transpose();
        return out;
      })
      .def("__mul__", [](const RigidTransform& a, const RigidTransform& b) { return compose(a, b); });

  m.def("transform_error", [](const RigidTransform& est, const RigidTransform& truth) {
    const TransformError e = transform_error(est, truth);
    return py::make_tuple(e.rotation_deg, e.translation_m);
  });

  m.def("voxel_downsample", &voxel_downsample, py::arg("cloud"), py::arg("edge"));
  m.def("estimate_normals", &estimate_normals, py::arg("cloud"), py::arg("k"),
        py::arg("viewpoint") = Point3(Point3::Zero()));
  m.def("compute_fpfh", [](const PointCloud& cloud, double radius) {
    const auto f = compute_fpfh(cloud, radius);
    Eigen::Matrix<double, Eigen::Dynamic, kFpfhSize, Eigen::RowMajor> a(
        static_cast<Eigen::Index>(f.size()), kFpfhSize);
    for (std::size_t i = 0; i < f.size(); ++i) a.row(static_cast<Eigen::Index>(i)) = f[i].transpose();
    return a;
  }, py::arg("cloud"), py::arg("radius"));

  m.def("estimate_rigid_svd",
        [](const Eigen::Ref<const PointsArray>& src, const Eigen::Ref<const PointsArray>& dst) {
          return estimate_rigid_svd(to_points(src), to_points(dst));
        },
        py::arg("source"), py::arg("target"));

  m.def("coarse_align",
        [](const PointCloud& src, const PointCloud& dst, double feature_radius,
           std::size_t iterations, double inlier_threshold, std::uint64_t seed) {
          CoarseAlignParams p;
          p.feature_radius = feature_radius;
          p.iterations = iterations;
          p.inlier_threshold = inlier_threshold;
          p.seed = seed;
          const CoarseAlignResult r = coarse_align(src, dst, p);
          return py::make_tuple(r.transform, r.inlier_fraction);
        },
        py::arg("source"), py::arg("target"), py::arg("feature_radius") = 0.4,
        py::arg("iterations") = 20000, py::arg("inlier_threshold") = 0.10, py::arg("seed") = 7);

  m.def("icp_point_to_plane",
        [](const PointCloud& src, const PointCloud& dst, const RigidTransform& init,
           double max_distance, std::size_t max_iterations, bool surface_gating) {
          IcpParams p;
          p.max_correspondence_distance = max_distance;
          p.max_iterations = max_iterations;
          p.surface_gating = surface_gating;
          const IcpResult r = icp_point_to_plane(src, dst, init, p);
          py::dict d;
          d["transform"] = r.transform;
          d["rms_residual"] = r.rms_residual;
          d["iterations"] = r.iterations;
          d["converged"] = r.converged;
          d["residual_history"] = r.residual_history;
          return d;
        },
        py::arg("source"), py::arg("target"), py::arg("init") = RigidTransform(),
        py::arg("max_distance") = 0.10, py::arg("max_iterations") = 50,
        py::arg("surface_gating") = true);

  m.def("ransac_plane",
        [](const PointCloud& cloud, double threshold, std::size_t iterations, std::uint64_t seed) {
          const PlaneFit fit = ransac_plane(cloud, threshold, iterations, Vector3::UnitZ(),
                                            0.2617993877991494, seed);
          return py::make_tuple(fit.plane.normal, fit.plane.offset, fit.inliers);
        },
        py::arg("cloud"), py::arg("threshold") = 0.01, py::arg("iterations") = 200,
        py::arg("seed") = 1);

  m.def("filter_heights",
        [](const PointCloud& cloud, const Vector3& normal, double offset, double band_low,
           double band_high, double ceiling) {
          return filter_heights(cloud, PlaneModel::make(normal, offset),
                                HeightBand{band_low, band_high, ceiling});
        },
        py::arg("cloud"), py::arg("normal"), py::arg("offset"), py::arg("band_low") = -0.01,
        py::arg("band_high") = 0.03, py::arg("ceiling") = 1.5);

  m.def("embodiment_radius_cells",
        [](double length, double width, double resolution) {
          return embodiment_radius_cells({length, width}, resolution);
        },
        py::arg("length") = 0.40, py::arg("width") = 0.41, py::arg("resolution") = 0.01);

  m.def("inflate",
        [](const Mask& occupied, int radius, double sigma_x, double sigma_y) {
          const CostField base = field_from_arrays(occupied, std::nullopt);
          OccupancyGrid grid(GridFrame{}, base.width(), base.height());
          for (int r = 0; r < base.height(); ++r) {
            for (int c = 0; c < base.width(); ++c) grid.set_occupied({r, c}, base.lethal({r, c}));
          }
          const CostField f = inflate(grid, radius, {sigma_x, sigma_y, radius});
          return py::make_tuple(lethal_array(f), penalty_array(f));
        },
        py::arg("occupied"), py::arg("radius"), py::arg("sigma_x") = 1.0,
        py::arg("sigma_y") = 1.0);

  m.def("plan",
        [](const Mask& lethal, const std::optional<Grid>& penalty, std::pair<int, int> start,
           std::pair<int, int> goal) {
          const CostField f = field_from_arrays(lethal, penalty);
          const auto [path, state] =
              plan(f, Cell{start.first, start.second}, Cell{goal.first, goal.second});
          return py::make_tuple(path_cells(path), path.total_cost);
        },
        py::arg("lethal"), py::arg("penalty") = std::nullopt, py::arg("start"), py::arg("goal"));

  m.def("octile_distance", [](std::pair<int, int> a, std::pair<int, int> b) {
    return octile_distance({a.first, a.second}, {b.first, b.second});
  });

  m.def("synthetic_scene",
        [](const std::map<std::string, std::string>& settings) {
          const PipelineConfig c = config_from(settings);
          const Scene s = generate_scene(random_scene_spec(c.scene));
          return py::make_tuple(s.scans, s.ground_truth);
        },
        py::arg("settings") = std::map<std::string, std::string>{},
        "Seeded synthetic scans and their scan-to-first transforms; keys as in the config file.");

  m.def("run_pipeline",
        [](const std::vector<PointCloud>& scans, const std::map<std::string, std::string>& settings,
           const std::optional<std::vector<RigidTransform>>& ground_truth) {
          const PipelineConfig c = config_from(settings);
          PipelineOptions opt;
          opt.ground_truth = ground_truth;
          const PipelineResult r = run_pipeline(c, scans, opt);
          py::dict d;
          d["path"] = path_cells(r.path);
          d["path_cost"] = r.path.total_cost;
          d["transforms"] = r.transforms;
          d["lethal"] = lethal_array(r.field);
          d["penalty"] = penalty_array(r.field);
          d["report"] = r.report.to_text();
          return d;
        },
        py::arg("scans"), py::arg("settings") = std::map<std::string, std::string>{},
        py::arg("ground_truth") = std::nullopt);

  m.def("load_cloud", [](const std::string& path) { return load_cloud(path); });
  m.def("save_cloud", [](const PointCloud& c, const std::string& path) { save_cloud(c, path); });
}
