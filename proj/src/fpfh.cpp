#include "laserpath/fpfh.hpp"

#include <algorithm>
#include <cmath>

#include "laserpath/error.hpp"
#include "laserpath/kdtree.hpp"

namespace laserpath {

namespace {

constexpr double kPi = 3.14159265358979323846;

using NeighborLists = std::vector<std::vector<Neighbor>>;

NeighborLists radius_neighbors(const PointCloud& cloud, double radius) {
  const NeighborIndex index(cloud.points());
  NeighborLists lists(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    auto found = index.radius_search(cloud.point(i), radius);
    std::erase_if(found, [&](const Neighbor& nb) { return nb.id == i || nb.distance == 0.0; });
    lists[i] = std::move(found);
  }
  return lists;
}

void check_inputs(const PointCloud& cloud, double radius) {
  if (!cloud.has_normals()) throw Error(ErrorCode::kMissingNormals, "FPFH needs normals");
  if (!(radius > 0.0)) throw Error(ErrorCode::kNonPositiveRadius, "FPFH radius must be > 0");
}

std::vector<FpfhDescriptor> spfh_from_lists(const PointCloud& cloud, const NeighborLists& lists) {
  constexpr int kBins = kFpfhBinsPerFeature;
  std::vector<FpfhDescriptor> spfh(cloud.size(), FpfhDescriptor::Zero());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& nbrs = lists[i];
    if (nbrs.empty()) continue;
    const double increment = 100.0 / static_cast<double>(nbrs.size());
    FpfhDescriptor& h = spfh[i];
    for (const auto& nb : nbrs) {
      const auto f = compute_pair_features(cloud.point(i), cloud.normal(i), cloud.point(nb.id),
                                           cloud.normal(nb.id));
      // Coincident points were filtered out with the zero distances.
      h[feature_bin(f->alpha, -1.0, 1.0)] += increment;
      h[kBins + feature_bin(f->phi, -1.0, 1.0)] += increment;
      h[2 * kBins + feature_bin(f->theta, -kPi, kPi)] += increment;
    }
  }
  return spfh;
}

}  // namespace

std::optional<PairFeatures> compute_pair_features(const Point3& p_s, const Vector3& n_s,
                                                  const Point3& p_t, const Vector3& n_t) {
  Vector3 d = p_t - p_s;
  const double dist = d.norm();
  if (dist == 0.0) return std::nullopt;

  const double angle_s = n_s.dot(d) / dist;
  const double angle_t = n_t.dot(d) / dist;
  // The source of the Darboux frame is the point whose normal makes the smaller
  // angle with the connecting line.
  Vector3 u = n_s;
  Vector3 nt = n_t;
  double phi = angle_s;
  if (std::acos(std::min(1.0, std::abs(angle_s))) > std::acos(std::min(1.0, std::abs(angle_t)))) {
    u = n_t;
    nt = n_s;
    d = -d;
    phi = -angle_t;
  }
  Vector3 v = d.cross(u);
  const double v_norm = v.norm();
  if (v_norm == 0.0) return PairFeatures{0.0, phi, 0.0};
  v /= v_norm;
  const Vector3 w = u.cross(v);
  return PairFeatures{v.dot(nt), phi, std::atan2(w.dot(nt), u.dot(nt))};
}

int feature_bin(double value, double lo, double hi, int bins) {
  const int bin = static_cast<int>(std::floor(bins * (value - lo) / (hi - lo)));
  return std::clamp(bin, 0, bins - 1);
}

std::vector<FpfhDescriptor> compute_spfh(const PointCloud& cloud, double radius) {
  check_inputs(cloud, radius);
  if (cloud.empty()) return {};
  return spfh_from_lists(cloud, radius_neighbors(cloud, radius));
}

std::vector<FpfhDescriptor> compute_fpfh(const PointCloud& cloud, double radius) {
  check_inputs(cloud, radius);
  if (cloud.empty()) return {};
  const NeighborLists lists = radius_neighbors(cloud, radius);
  const std::vector<FpfhDescriptor> spfh = spfh_from_lists(cloud, lists);

  constexpr int kBins = kFpfhBinsPerFeature;
  std::vector<FpfhDescriptor> fpfh(cloud.size(), FpfhDescriptor::Zero());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& nbrs = lists[i];
    if (nbrs.empty()) continue;
    FpfhDescriptor weighted = FpfhDescriptor::Zero();
    for (const auto& nb : nbrs) weighted += spfh[nb.id] / nb.distance;
    FpfhDescriptor h = spfh[i] + weighted / static_cast<double>(nbrs.size());
    for (int block = 0; block < 3; ++block) {
      auto segment = h.segment<kBins>(block * kBins);
      const double sum = segment.sum();
      if (sum > 0.0) segment *= 100.0 / sum;
    }
    fpfh[i] = h;
  }
  return fpfh;
}

std::vector<std::size_t> salient_features(std::span<const FpfhDescriptor> features,
                                          double beta) {
  std::vector<std::size_t> out;
  if (features.empty()) return out;
  const double n = static_cast<double>(features.size());
  FpfhDescriptor mean = FpfhDescriptor::Zero();
  for (const auto& f : features) mean += f;
  mean /= n;
  std::vector<double> dist;
  dist.reserve(features.size());
  double mu = 0.0;
  for (const auto& f : features) {
    dist.push_back((f - mean).norm());
    mu += dist.back();
  }
  mu /= n;
  double var = 0.0;
  for (double d : dist) var += (d - mu) * (d - mu);
  const double cutoff = mu + beta * std::sqrt(var / n);
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist[i] > cutoff) out.push_back(i);
  }
  return out;
}

}  // namespace laserpath
