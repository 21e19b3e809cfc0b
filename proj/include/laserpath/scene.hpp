#pragma once

#include <cstdint>
#include <vector>

#include "laserpath/cloud.hpp"

namespace laserpath {

/// Upright box standing on the ground plane z = 0.
struct Box {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  Vector3 size = Vector3::Ones();  // extents along its local x, y and z
  double yaw = 0.0;
};

struct SceneSpec {
  std::uint64_t seed = 1;
  double ground_half_extent = 6.0;  // ground is the square [-e, e]^2 at z = 0
  std::vector<Box> boxes;
  /// World-from-sensor poses, one scan per pose.
  std::vector<RigidTransform> poses;
  std::size_t points_per_scan = 30000;
  double noise_sigma = 0.002;
  double sensor_range = 8.0;

  /// Throws InvalidArgument for fewer than one pose or non-positive extents.
  void validate() const;
};

struct Scene {
  std::vector<PointCloud> scans;  // each in its own sensor frame
  /// ground_truth[k] maps scan k into the frame of scan 0; ground_truth[0] is the identity.
  std::vector<RigidTransform> ground_truth;
};

/// Area-weighted sampling of the ground and the box faces facing each sensor, within
/// range, plus isotropic Gaussian noise. Deterministic in (seed, pose).
Scene generate_scene(const SceneSpec& spec);

struct RandomSceneParams {
  std::uint64_t seed = 1;
  std::size_t scans = 2;
  std::size_t boxes = 8;
  std::size_t points_per_scan = 30000;
  double noise_sigma = 0.005;
  double max_rotation = 0.5235987755982988;  // 30 degrees
  double max_translation = 2.0;
  double sensor_height = 0.5;
  double ground_half_extent = 6.0;
  double sensor_range = 8.0;
};

/// Seeded cluttered scene whose scans are related by rotations up to `max_rotation`
/// (mostly yaw) and translations up to `max_translation`.
SceneSpec random_scene_spec(const RandomSceneParams& params);

}  // namespace laserpath
