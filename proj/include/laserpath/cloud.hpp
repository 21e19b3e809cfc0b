#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace laserpath {

using Point3 = Eigen::Vector3d;
using Vector3 = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;

/// Ordered set of 3D points in meters, optionally carrying one unit normal per point.
///
/// Construction validates that every coordinate is finite and that normals, when
/// given, match the point count and have unit length within 1e-9.
class PointCloud {
 public:
  PointCloud() = default;
  explicit PointCloud(std::vector<Point3> points);
  PointCloud(std::vector<Point3> points, std::vector<Vector3> normals);

  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  bool has_normals() const noexcept { return normals_.has_value(); }

  std::span<const Point3> points() const noexcept { return points_; }
  const Point3& point(std::size_t i) const { return points_[i]; }

  /// Throws MissingNormals when the cloud has none.
  std::span<const Vector3> normals() const;
  const Vector3& normal(std::size_t i) const { return normals().data()[i]; }

  PointCloud without_normals() const { return PointCloud(points_); }
  PointCloud subset(std::span<const std::size_t> ids) const;

 private:
  std::vector<Point3> points_;
  std::optional<std::vector<Vector3>> normals_;
};

/// Element of SE(3): x -> R x + t.
class RigidTransform {
 public:
  RigidTransform() : rotation_(Matrix3::Identity()), translation_(Vector3::Zero()) {}
  /// Throws InvalidArgument unless R'R = I and det(R) = +1 within 1e-9.
  RigidTransform(const Matrix3& rotation, const Vector3& translation);

  static RigidTransform identity() { return {}; }
  static RigidTransform from_axis_angle(const Vector3& axis, double angle,
                                        const Vector3& translation = Vector3::Zero());
  /// Rotation R = Rz(yaw) Ry(pitch) Rx(roll).
  static RigidTransform from_rpy(double roll, double pitch, double yaw,
                                 const Vector3& translation = Vector3::Zero());
  /// Projects an arbitrary 3x3 matrix onto SO(3) (nearest rotation in Frobenius norm).
  static Matrix3 orthonormalize(const Matrix3& m);

  const Matrix3& rotation() const noexcept { return rotation_; }
  const Vector3& translation() const noexcept { return translation_; }

  Point3 apply(const Point3& p) const { return rotation_ * p + translation_; }
  Vector3 rotate(const Vector3& v) const { return rotation_ * v; }

  RigidTransform inverse() const;
  Eigen::Matrix4d matrix() const;

  /// Angle of the rotation part, radians in [0, pi].
  double rotation_angle() const;

 private:
  Matrix3 rotation_;
  Vector3 translation_;
};

/// (T2 ∘ T1)(x) = T2(T1(x)).
RigidTransform compose(const RigidTransform& t2, const RigidTransform& t1);
RigidTransform invert(const RigidTransform& t);
inline RigidTransform operator*(const RigidTransform& t2, const RigidTransform& t1) {
  return compose(t2, t1);
}

/// Rotation angle of a⁻¹∘b in degrees and translation difference norm in meters.
struct TransformError {
  double rotation_deg;
  double translation_m;
};
TransformError transform_error(const RigidTransform& estimate, const RigidTransform& truth);

/// One centroid per nonempty voxel of the origin-anchored grid with cell index
/// floor(coord / edge), ordered by ascending (ix, iy, iz). Normals are dropped.
PointCloud voxel_downsample(const PointCloud& cloud, double edge);

PointCloud apply_transform(const PointCloud& cloud, const RigidTransform& transform);

/// Smallest-eigenvalue eigenvector of each point's k-neighborhood covariance,
/// flipped so that n · (viewpoint - p) >= 0.
PointCloud estimate_normals(const PointCloud& cloud, std::size_t k,
                            const Point3& viewpoint = Point3::Zero());

}  // namespace laserpath
