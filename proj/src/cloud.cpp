#include "laserpath/cloud.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "laserpath/error.hpp"
#include "laserpath/kdtree.hpp"

namespace laserpath {

namespace {

void check_finite(std::span<const Point3> points) {
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points[i].allFinite()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "point " + std::to_string(i) + " has a non-finite coordinate");
    }
  }
}

}  // namespace

PointCloud::PointCloud(std::vector<Point3> points) : points_(std::move(points)) {
  check_finite(points_);
}

PointCloud::PointCloud(std::vector<Point3> points, std::vector<Vector3> normals)
    : points_(std::move(points)) {
  check_finite(points_);
  if (normals.size() != points_.size()) {
    throw Error(ErrorCode::kLengthMismatch, "normals count differs from point count");
  }
  for (std::size_t i = 0; i < normals.size(); ++i) {
    if (!normals[i].allFinite() || std::abs(normals[i].norm() - 1.0) > 1e-9) {
      throw Error(ErrorCode::kInvalidArgument,
                  "normal " + std::to_string(i) + " is not unit length");
    }
  }
  normals_ = std::move(normals);
}

std::span<const Vector3> PointCloud::normals() const {
  if (!normals_) throw Error(ErrorCode::kMissingNormals, "cloud has no normals");
  return *normals_;
}

PointCloud PointCloud::subset(std::span<const std::size_t> ids) const {
  std::vector<Point3> pts;
  pts.reserve(ids.size());
  for (auto id : ids) pts.push_back(points_.at(id));
  if (!normals_) return PointCloud(std::move(pts));
  std::vector<Vector3> nrm;
  nrm.reserve(ids.size());
  for (auto id : ids) nrm.push_back((*normals_)[id]);
  return PointCloud(std::move(pts), std::move(nrm));
}

RigidTransform::RigidTransform(const Matrix3& rotation, const Vector3& translation)
    : rotation_(rotation), translation_(translation) {
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "transform has non-finite entries");
  }
  const Matrix3 gram = rotation.transpose() * rotation - Matrix3::Identity();
  if (gram.cwiseAbs().maxCoeff() > 1e-9 || std::abs(rotation.determinant() - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "rotation is not a proper orthonormal matrix");
  }
}

RigidTransform RigidTransform::from_axis_angle(const Vector3& axis, double angle,
                                               const Vector3& translation) {
  const double n = axis.norm();
  if (!(n > 0.0)) return RigidTransform(Matrix3::Identity(), translation);
  return RigidTransform(Eigen::AngleAxisd(angle, axis / n).toRotationMatrix(), translation);
}

RigidTransform RigidTransform::from_rpy(double roll, double pitch, double yaw,
                                        const Vector3& translation) {
  const Matrix3 r = (Eigen::AngleAxisd(yaw, Vector3::UnitZ()) *
                     Eigen::AngleAxisd(pitch, Vector3::UnitY()) *
                     Eigen::AngleAxisd(roll, Vector3::UnitX()))
                        .toRotationMatrix();
  return RigidTransform(orthonormalize(r), translation);
}

Matrix3 RigidTransform::orthonormalize(const Matrix3& m) {
  Eigen::JacobiSVD<Matrix3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix3& u = svd.matrixU();
  const Matrix3& v = svd.matrixV();
  Matrix3 fix = Matrix3::Identity();
  fix(2, 2) = (u * v.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return u * fix * v.transpose();
}

RigidTransform RigidTransform::inverse() const {
  const Matrix3 rt = rotation_.transpose();
  RigidTransform out;
  out.rotation_ = rt;
  out.translation_ = -(rt * translation_);
  return out;
}

Eigen::Matrix4d RigidTransform::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

double RigidTransform::rotation_angle() const {
  const double c = std::clamp((rotation_.trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c);
}

RigidTransform compose(const RigidTransform& t2, const RigidTransform& t1) {
  // Products of valid rotations drift by ~1e-16 per step; re-validate only loosely.
  Matrix3 r = t2.rotation() * t1.rotation();
  const Matrix3 gram = r.transpose() * r - Matrix3::Identity();
  if (gram.cwiseAbs().maxCoeff() > 1e-12) r = RigidTransform::orthonormalize(r);
  return RigidTransform(r, t2.rotation() * t1.translation() + t2.translation());
}

RigidTransform invert(const RigidTransform& t) { return t.inverse(); }

TransformError transform_error(const RigidTransform& estimate, const RigidTransform& truth) {
  const RigidTransform delta = compose(invert(truth), estimate);
  constexpr double kRadToDeg = 180.0 / 3.14159265358979323846;
  return {delta.rotation_angle() * kRadToDeg,
          (estimate.translation() - truth.translation()).norm()};
}

PointCloud voxel_downsample(const PointCloud& cloud, double edge) {
  if (!(edge > 0.0)) throw Error(ErrorCode::kNonPositiveEdge, "voxel edge must be > 0");
  const auto pts = cloud.points();
  using Key = std::array<std::int64_t, 3>;
  std::vector<Key> keys(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (int a = 0; a < 3; ++a) {
      keys[i][a] = static_cast<std::int64_t>(std::floor(pts[i][a] / edge));
    }
  }
  std::vector<std::size_t> order(pts.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });

  std::vector<Point3> out;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    Point3 sum = Point3::Zero();
    while (j < order.size() && keys[order[j]] == keys[order[i]]) {
      sum += pts[order[j]];
      ++j;
    }
    out.push_back(sum / static_cast<double>(j - i));
    i = j;
  }
  return PointCloud(std::move(out));
}

PointCloud apply_transform(const PointCloud& cloud, const RigidTransform& transform) {
  std::vector<Point3> pts;
  pts.reserve(cloud.size());
  for (const auto& p : cloud.points()) pts.push_back(transform.apply(p));
  if (!cloud.has_normals()) return PointCloud(std::move(pts));
  std::vector<Vector3> nrm;
  nrm.reserve(cloud.size());
  for (const auto& n : cloud.normals()) nrm.push_back((transform.rotate(n)).normalized());
  return PointCloud(std::move(pts), std::move(nrm));
}

PointCloud estimate_normals(const PointCloud& cloud, std::size_t k, const Point3& viewpoint) {
  if (k < 3 || cloud.size() < k) {
    throw Error(ErrorCode::kTooFewPoints, "normal estimation needs cloud size >= k >= 3");
  }
  const auto pts = cloud.points();
  const NeighborIndex index(pts);
  std::vector<Vector3> normals(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto nbrs = index.knn(pts[i], k);
    Point3 mean = Point3::Zero();
    for (const auto& nb : nbrs) mean += pts[nb.id];
    mean /= static_cast<double>(nbrs.size());
    Matrix3 cov = Matrix3::Zero();
    for (const auto& nb : nbrs) {
      const Vector3 d = pts[nb.id] - mean;
      cov.noalias() += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Matrix3> eig(cov);
    Vector3 n = eig.eigenvectors().col(0).normalized();
    if (n.dot(viewpoint - pts[i]) < 0.0) n = -n;
    normals[i] = n;
  }
  return PointCloud(std::vector<Point3>(pts.begin(), pts.end()), std::move(normals));
}

}  // namespace laserpath
