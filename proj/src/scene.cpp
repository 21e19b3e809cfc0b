#include "laserpath/scene.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <random>

#include "laserpath/error.hpp"

namespace laserpath {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t pose_seed(std::uint64_t seed, const RigidTransform& pose) {
  std::uint64_t h = splitmix64(seed);
  const Eigen::Matrix4d m = pose.matrix();
  for (int i = 0; i < 12; ++i) {
    h = splitmix64(h ^ std::bit_cast<std::uint64_t>(m(i % 3, i / 3)));
  }
  return h;
}

struct Face {
  Point3 origin;
  Vector3 e1;
  Vector3 e2;
  Vector3 normal;
  double area;
  int box;  // -1 for the ground
};

Eigen::Matrix2d yaw_matrix(double yaw) {
  Eigen::Matrix2d r;
  r << std::cos(yaw), -std::sin(yaw), std::sin(yaw), std::cos(yaw);
  return r;
}

// Point in box-local coordinates, z measured from the ground.
Vector3 to_box_local(const Box& box, const Point3& p) {
  const Eigen::Vector2d xy = yaw_matrix(box.yaw).transpose() * (p.head<2>() - box.center);
  return {xy.x(), xy.y(), p.z()};
}

bool inside_footprint(const Box& box, const Point3& p, double margin) {
  const Vector3 l = to_box_local(box, p);
  return std::abs(l.x()) < box.size.x() / 2 + margin && std::abs(l.y()) < box.size.y() / 2 + margin;
}

bool inside_box(const Box& box, const Point3& p) {
  return inside_footprint(box, p, 0.0) && p.z() > 0.0 && p.z() < box.size.z();
}

std::vector<Face> build_faces(const SceneSpec& spec) {
  std::vector<Face> faces;
  const double e = spec.ground_half_extent;
  faces.push_back({Point3(-e, -e, 0), Vector3(2 * e, 0, 0), Vector3(0, 2 * e, 0),
                   Vector3::UnitZ(), 4 * e * e, -1});
  for (std::size_t b = 0; b < spec.boxes.size(); ++b) {
    const Box& box = spec.boxes[b];
    const Eigen::Matrix2d r = yaw_matrix(box.yaw);
    const Vector3 ax(r(0, 0), r(1, 0), 0);
    const Vector3 ay(r(0, 1), r(1, 1), 0);
    const Vector3 az = Vector3::UnitZ();
    const Point3 c(box.center.x(), box.center.y(), box.size.z() / 2);
    const Vector3 hx = ax * box.size.x() / 2;
    const Vector3 hy = ay * box.size.y() / 2;
    const Vector3 hz = az * box.size.z() / 2;
    const int id = static_cast<int>(b);
    auto add = [&](const Vector3& n, const Vector3& half_n, const Vector3& h1, const Vector3& h2) {
      faces.push_back({c + half_n - h1 - h2, 2 * h1, 2 * h2, n, 4 * h1.norm() * h2.norm(), id});
    };
    add(az, hz, hx, hy);
    add(ax, hx, hy, hz);
    add(-ax, -hx, hy, hz);
    add(ay, hy, hx, hz);
    add(-ay, -hy, hx, hz);
  }
  return faces;
}

}  // namespace

void SceneSpec::validate() const {
  if (poses.empty()) throw Error(ErrorCode::kInvalidArgument, "a scene needs at least one pose");
  if (!(ground_half_extent > 0.0) || !(sensor_range > 0.0) || !(noise_sigma >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "scene extents must be positive");
  }
  if (points_per_scan == 0) throw Error(ErrorCode::kInvalidArgument, "points_per_scan is zero");
  for (const auto& b : boxes) {
    if (!(b.size.minCoeff() > 0.0)) throw Error(ErrorCode::kInvalidArgument, "box size <= 0");
  }
}

Scene generate_scene(const SceneSpec& spec) {
  spec.validate();
  const std::vector<Face> faces = build_faces(spec);
  std::vector<double> areas;
  for (const auto& f : faces) areas.push_back(f.area);

  Scene scene;
  const RigidTransform world_to_first = spec.poses.front().inverse();
  for (const auto& pose : spec.poses) {
    std::mt19937_64 rng(pose_seed(spec.seed, pose));
    std::discrete_distribution<std::size_t> pick_face(areas.begin(), areas.end());
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 1.0);
    const Point3 sensor = pose.translation();
    const RigidTransform world_to_sensor = pose.inverse();

    std::vector<Point3> points;
    points.reserve(spec.points_per_scan);
    const std::size_t max_attempts = 400 * spec.points_per_scan;
    for (std::size_t attempt = 0; attempt < max_attempts && points.size() < spec.points_per_scan;
         ++attempt) {
      const Face& f = faces[pick_face(rng)];
      const double a = unit(rng);
      const double b = unit(rng);
      const Point3 p = f.origin + a * f.e1 + b * f.e2;
      if ((p - sensor).norm() > spec.sensor_range) continue;
      if (f.normal.dot(sensor - p) <= 0.0) continue;
      bool hidden = false;
      for (std::size_t k = 0; k < spec.boxes.size() && !hidden; ++k) {
        if (static_cast<int>(k) == f.box) continue;
        hidden = f.box < 0 ? inside_footprint(spec.boxes[k], p, 0.0) : inside_box(spec.boxes[k], p);
      }
      if (hidden) continue;
      Point3 local = world_to_sensor.apply(p);
      if (spec.noise_sigma > 0.0) {
        local += spec.noise_sigma * Vector3(noise(rng), noise(rng), noise(rng));
      }
      points.push_back(local);
    }
    scene.scans.emplace_back(std::move(points));
    scene.ground_truth.push_back(compose(world_to_first, pose));
  }
  scene.ground_truth.front() = RigidTransform::identity();
  return scene;
}

SceneSpec random_scene_spec(const RandomSceneParams& params) {
  if (params.scans < 1) throw Error(ErrorCode::kInvalidArgument, "at least one scan is required");
  std::mt19937_64 rng(splitmix64(params.seed));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  constexpr double kPi = std::numbers::pi;

  SceneSpec spec;
  spec.seed = params.seed;
  spec.points_per_scan = params.points_per_scan;
  spec.noise_sigma = params.noise_sigma;
  spec.ground_half_extent = params.ground_half_extent;
  spec.sensor_range = params.sensor_range;

  const RigidTransform first = RigidTransform::from_rpy(
      0.0, 0.0, uniform(-kPi, kPi), Vector3(0.0, 0.0, params.sensor_height));
  spec.poses.push_back(first);
  const double tilt = std::min(params.max_rotation, 5.0 * kPi / 180.0);
  for (std::size_t k = 1; k < params.scans; ++k) {
    RigidTransform delta;
    do {
      delta = RigidTransform::from_rpy(uniform(-tilt, tilt), uniform(-tilt, tilt),
                                       uniform(-params.max_rotation, params.max_rotation));
    } while (delta.rotation_angle() > params.max_rotation);
    const double heading = uniform(-kPi, kPi);
    const double dz = uniform(-0.05, 0.05);
    const double planar =
        std::sqrt(std::max(0.0, params.max_translation * params.max_translation - dz * dz));
    const double dist = uniform(0.2 * planar, planar);
    const Vector3 t(dist * std::cos(heading), dist * std::sin(heading), dz);
    spec.poses.push_back(compose(first, RigidTransform(delta.rotation(), t)));
  }

  const double ring = std::max(1.5, params.sensor_range * 0.7);
  for (std::size_t attempt = 0; spec.boxes.size() < params.boxes && attempt < 1000; ++attempt) {
    Box box;
    box.size = Vector3(uniform(0.3, 1.2), uniform(0.3, 1.2), uniform(0.3, 1.8));
    box.yaw = uniform(-kPi, kPi);
    const double r = uniform(1.0, ring);
    const double a = uniform(-kPi, kPi);
    box.center = Eigen::Vector2d(r * std::cos(a), r * std::sin(a));
    const double reach = box.size.head<2>().norm() / 2;
    if (box.center.cwiseAbs().maxCoeff() + reach > params.ground_half_extent) continue;
    bool clear = true;
    for (const auto& pose : spec.poses) {
      clear = clear && (box.center - pose.translation().head<2>()).norm() > reach + 0.6;
    }
    for (const auto& other : spec.boxes) {
      clear = clear && (box.center - other.center).norm() >
                           reach + other.size.head<2>().norm() / 2 + 0.3;
    }
    if (clear) spec.boxes.push_back(box);
  }
  return spec;
}

}  // namespace laserpath
