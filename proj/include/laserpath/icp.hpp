#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "laserpath/cloud.hpp"
#include "laserpath/coarse_align.hpp"
#include "laserpath/kdtree.hpp"
#include "laserpath/plane.hpp"

namespace laserpath {

struct Surface {
  PlaneModel plane;
  std::vector<std::size_t> members;  // ascending point ids
};

struct SurfaceSegmentationParams {
  double distance_threshold = 0.02;
  std::size_t min_inliers = 30;
  std::size_t max_planes = 40;
  std::size_t iterations = 300;
  std::uint64_t seed = 11;
};

/// Greedy repeated RANSAC plane extraction, largest surface first. May return an empty list.
std::vector<Surface> segment_surfaces(const PointCloud& cloud,
                                      const SurfaceSegmentationParams& params);

struct IcpParams {
  std::size_t max_iterations = 50;
  double max_correspondence_distance = 0.10;
  double translation_epsilon = 1e-6;
  double rotation_epsilon = 1e-6;
  bool surface_gating = true;
  SurfaceSegmentationParams surfaces;
  /// Overlapping surfaces differ by less than this normal angle (radians) ...
  double gating_max_angle = 0.2617993877991494;  // 15 degrees
  /// ... and by less than this many segmentation thresholds in plane offset.
  double gating_offset_factor = 3.0;

  void validate() const;
};

struct IcpResult {
  RigidTransform transform;
  double rms_residual = 0.0;  // point-to-plane RMS over the final correspondences
  std::size_t iterations = 0;
  bool converged = false;
  /// Objective per accepted iterate, starting with the initial transform.
  std::vector<double> residual_history;
  std::size_t correspondences = 0;
};

/// Source/target index pairs selected for one iteration.
using IndexPairs = std::vector<std::pair<std::size_t, std::size_t>>;

/// Per-point participation masks from surface gating.
struct SurfaceGate {
  std::vector<bool> source;
  std::vector<bool> target;
  std::size_t overlapping_pairs = 0;
};

/// Marks points lying on segmented planes of `source` (already in the target frame) and
/// `target` that have an overlapping counterpart surface in the other cloud.
SurfaceGate gate_surfaces(const PointCloud& source, const PointCloud& target,
                          const IcpParams& params);

/// Nearest target point within the distance cap for every (gated) source point, with the
/// source points mapped by `transform`.
IndexPairs find_correspondences(const PointCloud& source, const NeighborIndex& target_index,
                                const RigidTransform& transform, double max_distance,
                                const std::vector<bool>* source_mask = nullptr,
                                const std::vector<bool>* target_mask = nullptr);

/// Σ (n_q · (T p - q))² over the pairs.
double point_to_plane_objective(const PointCloud& source, const PointCloud& target,
                                const IndexPairs& pairs, const RigidTransform& transform);

/// Normal equations of the point-to-plane objective linearized at `transform` in the
/// left-perturbation x = (ω, τ): T' = (I + [ω]×, τ) ∘ T.
struct LinearSystem {
  Eigen::Matrix<double, 6, 6> jtj = Eigen::Matrix<double, 6, 6>::Zero();
  Eigen::Matrix<double, 6, 1> jtr = Eigen::Matrix<double, 6, 1>::Zero();
  double objective = 0.0;

  /// Gradient of the objective with respect to x at x = 0.
  Eigen::Matrix<double, 6, 1> gradient() const { return 2.0 * jtr; }
  /// Minimizer of the linearized objective.
  Eigen::Matrix<double, 6, 1> solve() const;
};

LinearSystem build_point_to_plane_system(const PointCloud& source, const PointCloud& target,
                                         const IndexPairs& pairs, const RigidTransform& transform);

/// Applies a 6-vector perturbation (ω, τ) on the left of `transform`, with the rotation
/// I + [ω]× projected back onto SO(3).
RigidTransform apply_increment(const RigidTransform& transform,
                               const Eigen::Matrix<double, 6, 1>& x);

/// Exact-rotation variant used for finite-difference checks: (exp([ω]×), τ) ∘ T.
RigidTransform apply_increment_exact(const RigidTransform& transform,
                                     const Eigen::Matrix<double, 6, 1>& x);

/// Point-to-plane ICP of source onto target. Throws MissingNormals when the target has
/// no normals, NoCorrespondences when nothing lies within the cap at the first iterate.
IcpResult icp_point_to_plane(const PointCloud& source, const PointCloud& target,
                             const RigidTransform& init, const IcpParams& params);

}  // namespace laserpath
