#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "laserpath/cloud.hpp"

namespace laserpath {

inline constexpr int kFpfhBinsPerFeature = 11;
inline constexpr int kFpfhSize = 3 * kFpfhBinsPerFeature;

/// 33-bin histogram: blocks of 11 bins for the angular features (alpha, phi, theta).
/// Each block sums to 100, or is all zero when the point had no neighbors.
using FpfhDescriptor = Eigen::Matrix<double, kFpfhSize, 1>;

/// Darboux-frame angular features between two oriented points.
struct PairFeatures {
  double alpha;  // v · n_t, in [-1, 1]
  double phi;    // u · d / |d|, in [-1, 1]
  double theta;  // atan2(w · n_t, u · n_t), in [-pi, pi]
};

/// nullopt when the points coincide.
std::optional<PairFeatures> compute_pair_features(const Point3& p_s, const Vector3& n_s,
                                                  const Point3& p_t, const Vector3& n_t);

/// Bin index in [0, bins) of a feature value over its full range [lo, hi].
int feature_bin(double value, double lo, double hi, int bins = kFpfhBinsPerFeature);

/// Simplified point feature histograms over radius neighbors, each block in percent.
std::vector<FpfhDescriptor> compute_spfh(const PointCloud& cloud, double radius);

/// FPFH(p) = SPFH(p) + (1/k) Σ SPFH(p_k) / |p - p_k|, blocks renormalized to 100.
///
/// Throws MissingNormals or NonPositiveRadius.
std::vector<FpfhDescriptor> compute_fpfh(const PointCloud& cloud, double radius);

/// Ids of descriptors whose L2 distance from the mean descriptor exceeds the mean of
/// those distances by more than `beta` standard deviations, ascending. Points on large
/// uniform surfaces all share one histogram, so they end up near the mean and drop out.
std::vector<std::size_t> salient_features(std::span<const FpfhDescriptor> features, double beta);

}  // namespace laserpath
