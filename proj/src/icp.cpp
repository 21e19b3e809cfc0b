#include "laserpath/icp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "laserpath/error.hpp"
#include "laserpath/kdtree.hpp"

namespace laserpath {

namespace {

Matrix3 skew(const Vector3& w) {
  Matrix3 m;
  m << 0.0, -w.z(), w.y(), w.z(), 0.0, -w.x(), -w.y(), w.x(), 0.0;
  return m;
}

struct Evaluation {
  IndexPairs pairs;
  double objective = 0.0;
};

// One nearest-neighbor pass: the capped pairs drive the next step, while the objective is
// the RMS of point-to-plane residuals clipped at the cap over every participating source
// point. Clipping instead of dropping keeps the value continuous when points cross the cap.
Evaluation evaluate(const PointCloud& source, const PointCloud& target, const NeighborIndex& index,
                    const RigidTransform& transform, double cap, const std::vector<bool>* src_mask,
                    const std::vector<bool>* dst_mask) {
  Evaluation e;
  e.pairs.reserve(source.size());
  const double cap_sq = cap * cap;
  double sum = 0.0;
  std::size_t participating = 0;
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (src_mask && !(*src_mask)[i]) continue;
    ++participating;
    const Point3 p = transform.apply(source.point(i));
    const Neighbor nb = index.nearest(p);
    if (dst_mask && !(*dst_mask)[nb.id]) {
      sum += cap_sq;
      continue;
    }
    const double r = target.normal(nb.id).dot(p - target.point(nb.id));
    sum += std::min(r * r, cap_sq);
    if (nb.distance <= cap) e.pairs.emplace_back(i, nb.id);
  }
  e.objective = participating == 0 ? cap : std::sqrt(sum / static_cast<double>(participating));
  return e;
}

}  // namespace

std::vector<Surface> segment_surfaces(const PointCloud& cloud,
                                      const SurfaceSegmentationParams& params) {
  if (cloud.empty()) throw Error(ErrorCode::kEmptyCloud, "cannot segment an empty cloud");
  if (!(params.distance_threshold > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "segmentation threshold must be > 0");
  }
  const auto pts = cloud.points();
  std::vector<std::size_t> remaining(pts.size());
  std::iota(remaining.begin(), remaining.end(), 0);

  std::vector<Surface> surfaces;
  const std::size_t min_inliers = std::max<std::size_t>(params.min_inliers, 3);
  for (std::size_t k = 0; k < params.max_planes && remaining.size() >= min_inliers; ++k) {
    RansacPlaneParams ransac;
    ransac.distance_threshold = params.distance_threshold;
    ransac.iterations = params.iterations;
    ransac.seed = params.seed + k;
    const auto fit = fit_plane_ransac(pts, remaining, ransac);
    if (!fit || fit->inliers.size() < min_inliers) break;
    std::vector<std::size_t> rest;
    rest.reserve(remaining.size() - fit->inliers.size());
    std::set_difference(remaining.begin(), remaining.end(), fit->inliers.begin(),
                        fit->inliers.end(), std::back_inserter(rest));
    surfaces.push_back({fit->plane, fit->inliers});
    remaining = std::move(rest);
  }
  std::stable_sort(surfaces.begin(), surfaces.end(), [](const Surface& a, const Surface& b) {
    return a.members.size() > b.members.size();
  });
  return surfaces;
}

void IcpParams::validate() const {
  if (max_iterations == 0 || !(max_correspondence_distance > 0.0) ||
      !std::isfinite(max_correspondence_distance) || !(translation_epsilon > 0.0) ||
      !(rotation_epsilon > 0.0) || !(gating_max_angle > 0.0) || !(gating_offset_factor > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid ICP parameters");
  }
}

SurfaceGate gate_surfaces(const PointCloud& source, const PointCloud& target,
                          const IcpParams& params) {
  SurfaceGate gate{std::vector<bool>(source.size(), false),
                   std::vector<bool>(target.size(), false), 0};
  if (source.empty() || target.empty()) return gate;
  const auto src_surfaces = segment_surfaces(source, params.surfaces);
  const auto dst_surfaces = segment_surfaces(target, params.surfaces);
  const double cos_limit = std::cos(params.gating_max_angle);
  const double offset_limit = params.gating_offset_factor * params.surfaces.distance_threshold;

  std::vector<bool> src_used(src_surfaces.size(), false);
  std::vector<bool> dst_used(dst_surfaces.size(), false);
  for (std::size_t i = 0; i < src_surfaces.size(); ++i) {
    for (std::size_t j = 0; j < dst_surfaces.size(); ++j) {
      PlaneModel a = src_surfaces[i].plane;
      const PlaneModel& b = dst_surfaces[j].plane;
      if (a.normal.dot(b.normal) < 0.0) a = a.flipped();
      if (a.normal.dot(b.normal) <= cos_limit) continue;
      if (std::abs(a.offset - b.offset) >= offset_limit) continue;
      src_used[i] = dst_used[j] = true;
      ++gate.overlapping_pairs;
    }
  }
  for (std::size_t i = 0; i < src_surfaces.size(); ++i) {
    if (!src_used[i]) continue;
    for (auto id : src_surfaces[i].members) gate.source[id] = true;
  }
  for (std::size_t j = 0; j < dst_surfaces.size(); ++j) {
    if (!dst_used[j]) continue;
    for (auto id : dst_surfaces[j].members) gate.target[id] = true;
  }
  return gate;
}

IndexPairs find_correspondences(const PointCloud& source, const NeighborIndex& target_index,
                                const RigidTransform& transform, double max_distance,
                                const std::vector<bool>* source_mask,
                                const std::vector<bool>* target_mask) {
  IndexPairs pairs;
  if (target_index.empty()) return pairs;
  pairs.reserve(source.size());
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (source_mask && !(*source_mask)[i]) continue;
    const Neighbor nb = target_index.nearest(transform.apply(source.point(i)));
    if (nb.distance > max_distance) continue;
    if (target_mask && !(*target_mask)[nb.id]) continue;
    pairs.emplace_back(i, nb.id);
  }
  return pairs;
}

double point_to_plane_objective(const PointCloud& source, const PointCloud& target,
                                const IndexPairs& pairs, const RigidTransform& transform) {
  double sum = 0.0;
  for (const auto& [s, t] : pairs) {
    const double r = target.normal(t).dot(transform.apply(source.point(s)) - target.point(t));
    sum += r * r;
  }
  return sum;
}

Eigen::Matrix<double, 6, 1> LinearSystem::solve() const {
  // Pseudo-inverse: directions the correspondences do not constrain get no update.
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> eig(jtj);
  const auto& values = eig.eigenvalues();
  const auto& vectors = eig.eigenvectors();
  const double limit = 1e-10 * std::max(values.maxCoeff(), 0.0);
  Eigen::Matrix<double, 6, 1> x = Eigen::Matrix<double, 6, 1>::Zero();
  for (int i = 0; i < 6; ++i) {
    if (values[i] > limit && values[i] > 0.0) {
      x -= vectors.col(i) * (vectors.col(i).dot(jtr) / values[i]);
    }
  }
  return x;
}

LinearSystem build_point_to_plane_system(const PointCloud& source, const PointCloud& target,
                                         const IndexPairs& pairs,
                                         const RigidTransform& transform) {
  LinearSystem sys;
  for (const auto& [s, t] : pairs) {
    const Point3 p = transform.apply(source.point(s));
    const Vector3& n = target.normal(t);
    const double r = n.dot(p - target.point(t));
    Eigen::Matrix<double, 6, 1> row;
    row << p.cross(n), n;
    sys.jtj.noalias() += row * row.transpose();
    sys.jtr.noalias() += row * r;
    sys.objective += r * r;
  }
  return sys;
}

RigidTransform apply_increment(const RigidTransform& transform,
                               const Eigen::Matrix<double, 6, 1>& x) {
  const Matrix3 r = RigidTransform::orthonormalize(Matrix3::Identity() + skew(x.head<3>()));
  return compose(RigidTransform(r, x.tail<3>()), transform);
}

RigidTransform apply_increment_exact(const RigidTransform& transform,
                                     const Eigen::Matrix<double, 6, 1>& x) {
  const Vector3 w = x.head<3>();
  return compose(RigidTransform::from_axis_angle(w, w.norm(), x.tail<3>()), transform);
}

IcpResult icp_point_to_plane(const PointCloud& source, const PointCloud& target,
                             const RigidTransform& init, const IcpParams& params) {
  params.validate();
  if (!target.has_normals()) throw Error(ErrorCode::kMissingNormals, "ICP target needs normals");
  if (source.empty() || target.empty()) {
    throw Error(ErrorCode::kNoCorrespondences, "ICP on an empty cloud");
  }

  SurfaceGate gate;
  const std::vector<bool>* src_mask = nullptr;
  const std::vector<bool>* dst_mask = nullptr;
  if (params.surface_gating) {
    gate = gate_surfaces(apply_transform(source.without_normals(), init), target.without_normals(),
                         params);
    src_mask = &gate.source;
    dst_mask = &gate.target;
  }

  const NeighborIndex index(target.points());
  const double cap = params.max_correspondence_distance;

  IcpResult result;
  RigidTransform current = init;
  Evaluation state = evaluate(source, target, index, current, cap, src_mask, dst_mask);
  if (state.pairs.empty()) {
    throw Error(ErrorCode::kNoCorrespondences, "no source point within the correspondence cap");
  }
  result.residual_history.push_back(state.objective);

  constexpr int kMaxHalvings = 10;
  for (std::size_t iter = 1; iter <= params.max_iterations; ++iter) {
    result.iterations = iter;
    Eigen::Matrix<double, 6, 1> step =
        build_point_to_plane_system(source, target, state.pairs, current).solve();

    bool accepted = false;
    RigidTransform candidate;
    Evaluation next;
    for (int h = 0; h <= kMaxHalvings; ++h) {
      candidate = apply_increment(current, step);
      next = evaluate(source, target, index, candidate, cap, src_mask, dst_mask);
      if (next.objective <= state.objective && !next.pairs.empty()) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No descent direction left at this iterate.
      result.converged = true;
      break;
    }
    current = candidate;
    state = std::move(next);
    result.residual_history.push_back(state.objective);
    if (step.tail<3>().norm() < params.translation_epsilon &&
        step.head<3>().norm() < params.rotation_epsilon) {
      result.converged = true;
      break;
    }
  }

  const IndexPairs& pairs = state.pairs;
  result.transform = current;
  result.correspondences = pairs.size();
  result.rms_residual = std::sqrt(point_to_plane_objective(source, target, pairs, current) /
                                  static_cast<double>(pairs.size()));
  return result;
}

}  // namespace laserpath
