#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "laserpath/cloud.hpp"

namespace laserpath {

/// Plane n · x + d = 0 with unit normal n.
struct PlaneModel {
  Vector3 normal = Vector3::UnitZ();
  double offset = 0.0;

  /// Throws InvalidArgument unless |normal| = 1 within 1e-9.
  static PlaneModel make(const Vector3& normal, double offset);
  /// Plane through three points; nullopt when they are collinear.
  static std::optional<PlaneModel> through(const Point3& a, const Point3& b, const Point3& c);

  double signed_distance(const Point3& p) const { return normal.dot(p) + offset; }
  PlaneModel flipped() const { return {-normal, -offset}; }
  /// Same plane with normal on the side of `viewpoint`.
  PlaneModel oriented_toward(const Point3& viewpoint) const;
};

/// Signed height of a point above an upward-oriented plane: n · p + d.
inline double signed_height(const Point3& p, const PlaneModel& plane) {
  return plane.signed_distance(p);
}

/// Total least-squares plane over the given points (smallest covariance eigenvector).
/// Returns nullopt for fewer than 3 points or rank < 2.
std::optional<PlaneModel> fit_plane_least_squares(std::span<const Point3> points,
                                                  std::span<const std::size_t> ids);

struct PlaneFit {
  PlaneModel plane;
  std::vector<std::size_t> inliers;  // ascending ids
};

struct RansacPlaneParams {
  double distance_threshold = 0.01;
  std::size_t iterations = 200;
  std::uint64_t seed = 1;
  /// When set, only sample planes whose normal lies within max_tilt of this axis count.
  std::optional<Vector3> axis;
  double max_tilt = 0.2617993877991494;  // 15 degrees
  std::optional<Point3> viewpoint;       // orients the returned normal
};

/// Best plane by inlier count among seeded 3-point samples, refined by least squares
/// over its inliers. Ties keep the first plane found. Returns nullopt when no sample
/// satisfies the axis constraint (or no sample is non-collinear).
///
/// Throws TooFewPoints for fewer than 3 points.
std::optional<PlaneFit> fit_plane_ransac(std::span<const Point3> points,
                                         const RansacPlaneParams& params);

/// Same as fit_plane_ransac but only over the listed point ids; returned inliers are
/// ids into `points`.
std::optional<PlaneFit> fit_plane_ransac(std::span<const Point3> points,
                                         std::span<const std::size_t> candidates,
                                         const RansacPlaneParams& params);

}  // namespace laserpath
