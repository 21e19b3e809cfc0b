#include "laserpath/coarse_align.hpp"

#include <array>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "laserpath/error.hpp"
#include "laserpath/kdtree.hpp"

namespace laserpath {

namespace {

constexpr double kPi = 3.14159265358979323846;

using DescriptorIndex = KdTree<kFpfhSize>;

bool spans_plane(const Matrix3& scatter) {
  Eigen::SelfAdjointEigenSolver<Matrix3> eig(scatter, Eigen::EigenvaluesOnly);
  const auto& values = eig.eigenvalues();  // ascending
  return values[2] > 0.0 && values[1] > 1e-12 * values[2];
}

}  // namespace

RigidTransform OrientationPrior::rotation() const {
  for (double angle : {roll, pitch, yaw}) {
    if (!(std::abs(angle) <= kPi)) {
      throw Error(ErrorCode::kInvalidArgument, "orientation prior angles must lie in [-pi, pi]");
    }
  }
  return RigidTransform::from_rpy(roll, pitch, yaw);
}

void CoarseAlignParams::validate() const {
  if (!(feature_radius > 0.0)) throw Error(ErrorCode::kNonPositiveRadius, "feature radius <= 0");
  if (iterations == 0 || !(inlier_threshold > 0.0) || !(min_inlier_fraction > 0.0) ||
      min_inlier_fraction > 1.0 || !(edge_similarity > 0.0) || edge_similarity > 1.0 ||
      !(prior_tolerance > 0.0) || (salient_beta && !std::isfinite(*salient_beta))) {
    throw Error(ErrorCode::kInvalidArgument, "invalid coarse alignment parameters");
  }
}

CorrespondenceSet match_correspondences(std::span<const FpfhDescriptor> source,
                                        std::span<const FpfhDescriptor> target) {
  if (source.empty() || target.empty()) {
    throw Error(ErrorCode::kEmptyDescriptors, "descriptor lists must be nonempty");
  }
  const DescriptorIndex index(target, 8);
  CorrespondenceSet out;
  out.reserve(source.size());
  for (std::size_t i = 0; i < source.size(); ++i) {
    const Neighbor nb = index.nearest(source[i]);
    out.push_back({i, nb.id, nb.distance});
  }
  return out;
}

CorrespondenceSet mutual_filter(const CorrespondenceSet& forward,
                                std::span<const FpfhDescriptor> source,
                                std::span<const FpfhDescriptor> target) {
  if (forward.empty()) return {};
  const DescriptorIndex index(source, 8);
  CorrespondenceSet out;
  for (const auto& c : forward) {
    if (index.nearest(target[c.target]).id == c.source) out.push_back(c);
  }
  return out;
}

RigidTransform estimate_rigid_svd(std::span<const Point3> source, std::span<const Point3> target,
                                  const CorrespondenceSet& pairs) {
  if (pairs.size() < 3) {
    throw Error(ErrorCode::kDegenerateGeometry, "need at least 3 correspondences");
  }
  Point3 src_mean = Point3::Zero();
  Point3 dst_mean = Point3::Zero();
  for (const auto& c : pairs) {
    src_mean += source[c.source];
    dst_mean += target[c.target];
  }
  src_mean /= static_cast<double>(pairs.size());
  dst_mean /= static_cast<double>(pairs.size());

  Matrix3 cross = Matrix3::Zero();
  Matrix3 src_scatter = Matrix3::Zero();
  Matrix3 dst_scatter = Matrix3::Zero();
  for (const auto& c : pairs) {
    const Vector3 p = source[c.source] - src_mean;
    const Vector3 q = target[c.target] - dst_mean;
    cross.noalias() += p * q.transpose();
    src_scatter.noalias() += p * p.transpose();
    dst_scatter.noalias() += q * q.transpose();
  }
  if (!spans_plane(src_scatter) || !spans_plane(dst_scatter)) {
    throw Error(ErrorCode::kDegenerateGeometry, "correspondence points are collinear");
  }

  Eigen::JacobiSVD<Matrix3> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix3& u = svd.matrixU();
  const Matrix3& v = svd.matrixV();
  Matrix3 reflect = Matrix3::Identity();
  reflect(2, 2) = (v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  const Matrix3 rotation = v * reflect * u.transpose();
  return RigidTransform(rotation, dst_mean - rotation * src_mean);
}

RigidTransform estimate_rigid_svd(std::span<const Point3> source,
                                  std::span<const Point3> target) {
  if (source.size() != target.size()) {
    throw Error(ErrorCode::kLengthMismatch, "index-aligned point lists differ in length");
  }
  CorrespondenceSet pairs;
  pairs.reserve(source.size());
  for (std::size_t i = 0; i < source.size(); ++i) pairs.push_back({i, i, 0.0});
  return estimate_rigid_svd(source, target, pairs);
}

namespace {

std::vector<std::size_t> all_ids(std::size_t n) {
  std::vector<std::size_t> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = i;
  return ids;
}

CorrespondenceSet salient_correspondences(std::span<const FpfhDescriptor> source,
                                          std::span<const FpfhDescriptor> target,
                                          const CoarseAlignParams& params) {
  std::vector<std::size_t> src_ids;
  std::vector<std::size_t> dst_ids;
  if (params.salient_beta) {
    src_ids = salient_features(source, *params.salient_beta);
    dst_ids = salient_features(target, *params.salient_beta);
  }
  // Too few distinctive points (tiny or uniform clouds): match everything instead.
  if (src_ids.size() < 3 || dst_ids.size() < 3) {
    src_ids = all_ids(source.size());
    dst_ids = all_ids(target.size());
  }
  std::vector<FpfhDescriptor> src_sel;
  std::vector<FpfhDescriptor> dst_sel;
  src_sel.reserve(src_ids.size());
  dst_sel.reserve(dst_ids.size());
  for (auto i : src_ids) src_sel.push_back(source[i]);
  for (auto i : dst_ids) dst_sel.push_back(target[i]);

  CorrespondenceSet pairs = match_correspondences(src_sel, dst_sel);
  if (params.mutual_filter) pairs = mutual_filter(pairs, src_sel, dst_sel);
  for (auto& c : pairs) {
    c.source = src_ids[c.source];
    c.target = dst_ids[c.target];
  }
  return pairs;
}

// `source` is already pre-rotated by `pre`; the returned transform includes it.
CoarseAlignResult align_features(const PointCloud& source,
                                 std::span<const FpfhDescriptor> source_features,
                                 const PointCloud& target,
                                 std::span<const FpfhDescriptor> target_features,
                                 const CoarseAlignParams& params, const RigidTransform& pre,
                                 bool constrain_rotation) {
  if (!source.has_normals() || !target.has_normals()) {
    throw Error(ErrorCode::kMissingNormals, "coarse alignment needs normals on both clouds");
  }
  if (source_features.size() != source.size() || target_features.size() != target.size()) {
    throw Error(ErrorCode::kLengthMismatch, "descriptor count differs from point count");
  }

  const auto src_pts = source.points();
  const auto dst_pts = target.points();

  CorrespondenceSet pairs = salient_correspondences(source_features, target_features, params);

  CoarseAlignResult result;
  result.correspondences = pairs.size();
  if (pairs.size() < 3) {
    throw Error(ErrorCode::kInsufficientInliers, "fewer than 3 feature correspondences");
  }

  const double sq_threshold = params.inlier_threshold * params.inlier_threshold;
  auto inliers_of = [&](const RigidTransform& t) {
    CorrespondenceSet inliers;
    for (const auto& c : pairs) {
      if ((t.apply(src_pts[c.source]) - dst_pts[c.target]).squaredNorm() < sq_threshold) {
        inliers.push_back(c);
      }
    }
    return inliers;
  };
  auto count_inliers = [&](const RigidTransform& t) {
    std::size_t count = 0;
    for (const auto& c : pairs) {
      if ((t.apply(src_pts[c.source]) - dst_pts[c.target]).squaredNorm() < sq_threshold) ++count;
    }
    return count;
  };
  auto edges_agree = [&](const std::array<std::size_t, 3>& sample) {
    for (int a = 0; a < 3; ++a) {
      const auto& ca = pairs[sample[a]];
      const auto& cb = pairs[sample[(a + 1) % 3]];
      const double ls = (src_pts[ca.source] - src_pts[cb.source]).norm();
      const double ld = (dst_pts[ca.target] - dst_pts[cb.target]).norm();
      if (ls < params.inlier_threshold || ld < params.inlier_threshold) return false;
      if (std::min(ls, ld) < params.edge_similarity * std::max(ls, ld)) return false;
    }
    return true;
  };

  std::mt19937_64 rng(params.seed);
  const std::size_t n = pairs.size();
  auto pick = [&rng](std::size_t bound) {
    return std::uniform_int_distribution<std::size_t>(0, bound - 1)(rng);
  };

  std::optional<RigidTransform> best;
  std::size_t best_count = 0;
  for (std::size_t it = 0; it < params.iterations; ++it) {
    std::array<std::size_t, 3> sample{pick(n), pick(n - 1), pick(n - 2)};
    if (sample[1] >= sample[0]) ++sample[1];
    for (std::size_t taken : {std::min(sample[0], sample[1]), std::max(sample[0], sample[1])}) {
      if (sample[2] >= taken) ++sample[2];
    }
    if (!edges_agree(sample)) continue;
    const CorrespondenceSet minimal{pairs[sample[0]], pairs[sample[1]], pairs[sample[2]]};
    RigidTransform hypothesis;
    try {
      hypothesis = estimate_rigid_svd(src_pts, dst_pts, minimal);
    } catch (const Error&) {
      continue;
    }
    if (constrain_rotation && hypothesis.rotation_angle() > params.prior_tolerance) continue;
    const std::size_t count = count_inliers(hypothesis);
    if (count > best_count) {
      best_count = count;
      best = hypothesis;
    }
  }
  if (!best) {
    throw Error(ErrorCode::kInsufficientInliers, "no consistent correspondence sample found");
  }

  RigidTransform final_transform = *best;
  const CorrespondenceSet inliers = inliers_of(*best);
  if (inliers.size() >= 3) {
    try {
      const RigidTransform refined = estimate_rigid_svd(src_pts, dst_pts, inliers);
      if (count_inliers(refined) >= best_count) {
        final_transform = refined;
        best_count = count_inliers(refined);
      }
    } catch (const Error&) {
      // keep the sample hypothesis
    }
  }

  result.transform = compose(final_transform, pre);
  result.inliers = best_count;
  result.inlier_fraction = static_cast<double>(best_count) / static_cast<double>(n);
  if (result.inlier_fraction < params.min_inlier_fraction) {
    throw Error(ErrorCode::kInsufficientInliers,
                "inlier fraction " + std::to_string(result.inlier_fraction) + " below minimum " +
                    std::to_string(params.min_inlier_fraction));
  }
  return result;
}

}  // namespace

CoarseAlignResult coarse_align(const PointCloud& source, const PointCloud& target,
                               const CoarseAlignParams& params,
                               const std::optional<OrientationPrior>& prior) {
  params.validate();
  const RigidTransform pre = prior ? prior->rotation() : RigidTransform::identity();
  const PointCloud rotated = prior ? apply_transform(source, pre) : source;
  const auto src_features = compute_fpfh(rotated, params.feature_radius);
  const auto dst_features = compute_fpfh(target, params.feature_radius);
  return align_features(rotated, src_features, target, dst_features, params, pre,
                        prior.has_value());
}

CoarseAlignResult coarse_align_with_features(
    const PointCloud& source, std::span<const FpfhDescriptor> source_features,
    const PointCloud& target, std::span<const FpfhDescriptor> target_features,
    const CoarseAlignParams& params, const std::optional<OrientationPrior>& prior) {
  params.validate();
  const RigidTransform pre = prior ? prior->rotation() : RigidTransform::identity();
  const PointCloud rotated = prior ? apply_transform(source, pre) : source;
  return align_features(rotated, source_features, target, target_features, params, pre,
                        prior.has_value());
}

}  // namespace laserpath
