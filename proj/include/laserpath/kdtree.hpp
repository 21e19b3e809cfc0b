#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <queue>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "laserpath/error.hpp"

namespace laserpath {

struct Neighbor {
  std::size_t id;
  double distance;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

namespace detail {

// Summation runs in coordinate order; the pruning bound in KdTree relies on each
// single-axis term never exceeding the accumulated total.
template <int Dim>
inline double squared_distance(const Eigen::Matrix<double, Dim, 1>& a,
                               const Eigen::Matrix<double, Dim, 1>& b) {
  double sum = 0.0;
  for (int i = 0; i < Dim; ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

struct Candidate {
  double sq_distance;
  std::uint32_t id;

  bool operator<(const Candidate& other) const {
    return sq_distance < other.sq_distance ||
           (sq_distance == other.sq_distance && id < other.id);
  }
};

}  // namespace detail

/// Static k-d tree over fixed-dimension points.
///
/// Results are exact: identical ids and ordering to a brute-force scan, sorted by
/// nondecreasing distance with ties broken by the lower point id.
template <int Dim>
class KdTree {
 public:
  using Vector = Eigen::Matrix<double, Dim, 1>;

  KdTree() = default;
  explicit KdTree(std::span<const Vector> points, std::size_t leaf_size = 12)
      : leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
    if (points.size() >= std::numeric_limits<std::uint32_t>::max()) {
      throw Error(ErrorCode::kInvalidArgument, "too many points for KdTree");
    }
    points_.assign(points.begin(), points.end());
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0u);
    if (!points_.empty()) {
      nodes_.reserve(2 * points_.size() / leaf_size_ + 1);
      build(0, static_cast<std::uint32_t>(points_.size()));
    }
  }

  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  const Vector& point(std::size_t id) const { return points_[id]; }

  std::vector<Neighbor> knn(const Vector& query, std::size_t k) const {
    if (empty()) throw Error(ErrorCode::kEmptyIndex, "knn on empty index");
    if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be at least 1");
    if (k > size()) throw Error(ErrorCode::kKExceedsSize, "k exceeds index size");
    std::priority_queue<detail::Candidate> heap;  // worst candidate on top
    knn_recurse(0, query, k, heap);
    std::vector<Neighbor> out(heap.size());
    for (std::size_t i = out.size(); i-- > 0;) {
      out[i] = {heap.top().id, std::sqrt(heap.top().sq_distance)};
      heap.pop();
    }
    return out;
  }

  Neighbor nearest(const Vector& query) const { return knn(query, 1).front(); }

  /// All points with distance <= radius.
  std::vector<Neighbor> radius_search(const Vector& query, double radius) const {
    if (empty()) throw Error(ErrorCode::kEmptyIndex, "radius search on empty index");
    if (!(radius > 0.0)) throw Error(ErrorCode::kNonPositiveRadius, "radius must be > 0");
    std::vector<detail::Candidate> found;
    radius_recurse(0, query, radius * radius, found);
    std::sort(found.begin(), found.end());
    std::vector<Neighbor> out;
    out.reserve(found.size());
    for (const auto& c : found) out.push_back({c.id, std::sqrt(c.sq_distance)});
    return out;
  }

 private:
  struct Node {
    std::uint32_t begin;
    std::uint32_t end;
    std::int32_t left = -1;
    std::int32_t right = -1;
    int axis = -1;
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end) {
    const auto index = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back({begin, end});
    if (end - begin <= leaf_size_) return index;

    Vector lo = points_[order_[begin]];
    Vector hi = lo;
    for (std::uint32_t i = begin + 1; i < end; ++i) {
      lo = lo.cwiseMin(points_[order_[i]]);
      hi = hi.cwiseMax(points_[order_[i]]);
    }
    int axis = 0;
    (hi - lo).maxCoeff(&axis);
    if (hi[axis] == lo[axis]) return index;  // all coincident

    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                       return points_[a][axis] < points_[b][axis];
                     });
    // Left holds coordinates <= split, right holds coordinates >= split.
    const double split = points_[order_[mid]][axis];
    const std::int32_t left = build(begin, mid);
    const std::int32_t right = build(mid, end);
    Node& node = nodes_[index];
    node.axis = axis;
    node.split = split;
    node.left = left;
    node.right = right;
    return index;
  }

  void knn_recurse(std::int32_t index, const Vector& q, std::size_t k,
                   std::priority_queue<detail::Candidate>& heap) const {
    const Node& node = nodes_[index];
    if (node.axis < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const detail::Candidate c{detail::squared_distance<Dim>(q, points_[order_[i]]),
                                  order_[i]};
        if (heap.size() < k) {
          heap.push(c);
        } else if (c < heap.top()) {
          heap.pop();
          heap.push(c);
        }
      }
      return;
    }
    const double diff = q[node.axis] - node.split;
    const std::int32_t near = diff <= 0.0 ? node.left : node.right;
    const std::int32_t far = diff <= 0.0 ? node.right : node.left;
    knn_recurse(near, q, k, heap);
    // Equal bounds are still visited: the far side may hold a tie with a lower id.
    if (heap.size() < k || diff * diff <= heap.top().sq_distance) {
      knn_recurse(far, q, k, heap);
    }
  }

  void radius_recurse(std::int32_t index, const Vector& q, double sq_radius,
                      std::vector<detail::Candidate>& found) const {
    const Node& node = nodes_[index];
    if (node.axis < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const double d2 = detail::squared_distance<Dim>(q, points_[order_[i]]);
        if (d2 <= sq_radius) found.push_back({d2, order_[i]});
      }
      return;
    }
    const double diff = q[node.axis] - node.split;
    const std::int32_t near = diff <= 0.0 ? node.left : node.right;
    const std::int32_t far = diff <= 0.0 ? node.right : node.left;
    radius_recurse(near, q, sq_radius, found);
    if (diff * diff <= sq_radius) radius_recurse(far, q, sq_radius, found);
  }

  std::size_t leaf_size_ = 12;
  std::vector<Vector> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

/// Spatial index over the points of a PointCloud.
using NeighborIndex = KdTree<3>;

}  // namespace laserpath
