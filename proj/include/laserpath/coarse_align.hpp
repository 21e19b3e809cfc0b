#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "laserpath/cloud.hpp"
#include "laserpath/fpfh.hpp"

namespace laserpath {

struct Correspondence {
  std::size_t source;
  std::size_t target;
  double distance;

  friend bool operator==(const Correspondence&, const Correspondence&) = default;
};

using CorrespondenceSet = std::vector<Correspondence>;

/// Relative orientation from an attitude sensor, radians; R = Rz(yaw) Ry(pitch) Rx(roll).
struct OrientationPrior {
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;

  /// Throws InvalidArgument when an angle falls outside [-pi, pi].
  RigidTransform rotation() const;
};

struct CoarseAlignParams {
  double feature_radius = 0.25;
  std::size_t iterations = 20000;
  double inlier_threshold = 0.10;
  double min_inlier_fraction = 0.05;
  std::uint64_t seed = 7;
  /// Keep only source/target pairs that are each other's nearest descriptor.
  bool mutual_filter = true;
  /// Samples are discarded unless every source/target edge-length ratio reaches this.
  double edge_similarity = 0.9;
  /// With a prior, hypotheses rotating further than this from it are discarded.
  double prior_tolerance = 0.2617993877991494;  // 15 degrees
  /// When set, only salient_features(beta) of each cloud take part in matching.
  std::optional<double> salient_beta = 1.0;

  void validate() const;
};

struct CoarseAlignResult {
  RigidTransform transform;
  double inlier_fraction = 0.0;
  std::size_t inliers = 0;
  std::size_t correspondences = 0;
};

/// L2-nearest target descriptor for every source descriptor, ties to the lower target id.
/// Throws EmptyDescriptors.
CorrespondenceSet match_correspondences(std::span<const FpfhDescriptor> source,
                                        std::span<const FpfhDescriptor> target);

/// Subset of `forward` whose pairs are also nearest in the target-to-source direction.
CorrespondenceSet mutual_filter(const CorrespondenceSet& forward,
                                std::span<const FpfhDescriptor> source,
                                std::span<const FpfhDescriptor> target);

/// Least-squares rigid transform mapping source onto target over the given pairs
/// (Kabsch with reflection guard). Throws DegenerateGeometry for fewer than 3 pairs or
/// collinear configurations.
RigidTransform estimate_rigid_svd(std::span<const Point3> source, std::span<const Point3> target,
                                  const CorrespondenceSet& pairs);

/// Index-aligned overload: source[i] corresponds to target[i].
RigidTransform estimate_rigid_svd(std::span<const Point3> source,
                                  std::span<const Point3> target);

/// Feature-based rough alignment of source onto target via seeded 3-sample consensus.
/// Throws InsufficientInliers when the final inlier fraction is below the minimum.
CoarseAlignResult coarse_align(const PointCloud& source, const PointCloud& target,
                               const CoarseAlignParams& params,
                               const std::optional<OrientationPrior>& prior = std::nullopt);

/// Same as coarse_align with descriptors already computed for the (unrotated) clouds.
CoarseAlignResult coarse_align_with_features(
    const PointCloud& source, std::span<const FpfhDescriptor> source_features,
    const PointCloud& target, std::span<const FpfhDescriptor> target_features,
    const CoarseAlignParams& params, const std::optional<OrientationPrior>& prior = std::nullopt);

}  // namespace laserpath
