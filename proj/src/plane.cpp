#include "laserpath/plane.hpp"

#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>

#include "laserpath/error.hpp"

namespace laserpath {

PlaneModel PlaneModel::make(const Vector3& normal, double offset) {
  if (!normal.allFinite() || !std::isfinite(offset) || std::abs(normal.norm() - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "plane normal must be finite and unit length");
  }
  return {normal, offset};
}

std::optional<PlaneModel> PlaneModel::through(const Point3& a, const Point3& b,
                                              const Point3& c) {
  const Vector3 ab = b - a;
  const Vector3 ac = c - a;
  const Vector3 n = ab.cross(ac);
  const double norm = n.norm();
  // Relative collinearity test, scale free.
  if (!(norm > 1e-12 * ab.norm() * ac.norm()) || norm == 0.0) return std::nullopt;
  const Vector3 unit = n / norm;
  return PlaneModel{unit, -unit.dot(a)};
}

PlaneModel PlaneModel::oriented_toward(const Point3& viewpoint) const {
  return signed_distance(viewpoint) < 0.0 ? flipped() : *this;
}

std::optional<PlaneModel> fit_plane_least_squares(std::span<const Point3> points,
                                                  std::span<const std::size_t> ids) {
  if (ids.size() < 3) return std::nullopt;
  Point3 mean = Point3::Zero();
  for (auto id : ids) mean += points[id];
  mean /= static_cast<double>(ids.size());
  Matrix3 cov = Matrix3::Zero();
  for (auto id : ids) {
    const Vector3 d = points[id] - mean;
    cov.noalias() += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Matrix3> eig(cov);
  const auto& values = eig.eigenvalues();
  if (!(values[1] > 1e-18 * std::max(1.0, values[2]))) return std::nullopt;
  const Vector3 n = eig.eigenvectors().col(0).normalized();
  return PlaneModel{n, -n.dot(mean)};
}

namespace {

std::vector<std::size_t> collect_inliers(std::span<const Point3> points,
                                         std::span<const std::size_t> candidates,
                                         const PlaneModel& plane, double threshold) {
  std::vector<std::size_t> inliers;
  for (auto id : candidates) {
    if (std::abs(plane.signed_distance(points[id])) <= threshold) inliers.push_back(id);
  }
  return inliers;
}

bool within_tilt(const PlaneModel& plane, const RansacPlaneParams& params) {
  if (!params.axis) return true;
  return std::abs(plane.normal.dot(*params.axis)) >= std::cos(params.max_tilt);
}

}  // namespace

std::optional<PlaneFit> fit_plane_ransac(std::span<const Point3> points,
                                         const RansacPlaneParams& params) {
  std::vector<std::size_t> all(points.size());
  std::iota(all.begin(), all.end(), 0);
  return fit_plane_ransac(points, all, params);
}

std::optional<PlaneFit> fit_plane_ransac(std::span<const Point3> points,
                                         std::span<const std::size_t> candidates,
                                         const RansacPlaneParams& params) {
  if (candidates.size() < 3) {
    throw Error(ErrorCode::kTooFewPoints, "plane fitting needs at least 3 points");
  }
  if (!(params.distance_threshold > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "distance threshold must be > 0");
  }
  RansacPlaneParams normalized = params;
  if (params.axis) normalized.axis = params.axis->normalized();

  std::mt19937_64 rng(params.seed);
  const std::size_t n = candidates.size();
  auto pick = [&rng](std::size_t bound) {
    return std::uniform_int_distribution<std::size_t>(0, bound - 1)(rng);
  };

  std::optional<PlaneModel> best;
  std::size_t best_count = 0;
  for (std::size_t it = 0; it < params.iterations; ++it) {
    // Three distinct indices.
    const std::size_t i = pick(n);
    std::size_t j = pick(n - 1);
    if (j >= i) ++j;
    std::size_t k = pick(n - 2);
    for (std::size_t taken : {std::min(i, j), std::max(i, j)}) {
      if (k >= taken) ++k;
    }
    const auto plane =
        PlaneModel::through(points[candidates[i]], points[candidates[j]], points[candidates[k]]);
    if (!plane || !within_tilt(*plane, normalized)) continue;
    std::size_t count = 0;
    for (auto id : candidates) {
      if (std::abs(plane->signed_distance(points[id])) <= params.distance_threshold) ++count;
    }
    if (count > best_count) {
      best_count = count;
      best = plane;
    }
  }
  if (!best) return std::nullopt;

  PlaneFit fit{*best, collect_inliers(points, candidates, *best, params.distance_threshold)};
  if (auto refined = fit_plane_least_squares(points, fit.inliers);
      refined && within_tilt(*refined, normalized)) {
    auto refined_inliers =
        collect_inliers(points, candidates, *refined, params.distance_threshold);
    if (refined_inliers.size() >= fit.inliers.size()) {
      fit = {*refined, std::move(refined_inliers)};
    }
  }
  if (params.viewpoint && fit.plane.signed_distance(*params.viewpoint) != 0.0) {
    fit.plane = fit.plane.oriented_toward(*params.viewpoint);
  } else if (normalized.axis && fit.plane.normal.dot(*normalized.axis) < 0.0) {
    fit.plane = fit.plane.flipped();
  }
  return fit;
}

}  // namespace laserpath
