#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <tuple>
#include <vector>

#include "laserpath/costmap.hpp"

namespace laserpath {

/// Sentinel for untraversable edges and unreached vertices.
inline constexpr double kInfiniteCost = std::numeric_limits<double>::infinity();

/// Sum that stays at the sentinel when either operand is infinite.
inline double add_costs(double a, double b) {
  return (a == kInfiniteCost || b == kInfiniteCost) ? kInfiniteCost : a + b;
}

using GridVertex = Cell;

/// Neighbor scan order: N, NE, E, SE, S, SW, W, NW (north = row - 1).
inline constexpr std::array<std::array<int, 2>, 8> kNeighborOffsets{{
    {-1, 0}, {-1, 1}, {0, 1}, {1, 1}, {1, 0}, {1, -1}, {0, -1}, {-1, -1}}};

/// Octile distance between two cells.
double octile_distance(const GridVertex& a, const GridVertex& b);

/// Cost of moving between 8-neighbors: L · (1 + (p(u) + p(v)) / 2), L = 1 or √2.
/// Infinite if either cell is lethal or a diagonal move would cut a lethal corner.
/// Throws NotNeighbors.
double edge_cost(const CostField& field, const GridVertex& u, const GridVertex& v);

struct GridPath {
  std::vector<GridVertex> vertices;
  double total_cost = 0.0;  // forward sum of edge costs
};

/// Sum of edge costs along consecutive vertices.
double path_cost(const CostField& field, const std::vector<GridVertex>& vertices);

struct CellChange {
  GridVertex cell;
  bool lethal = false;
  double penalty = 0.0;
};

/// Lexicographic D* Lite priority.
struct Key {
  double k1 = kInfiniteCost;
  double k2 = kInfiniteCost;

  friend auto operator<=>(const Key&, const Key&) = default;
};

/// D* Lite search state over an owned cost field. Searches from the goal so that g(v)
/// is the cost-to-goal; the start may move between repairs.
class PlannerState {
 public:
  /// Throws LethalEndpoint or InvalidArgument (out-of-bounds endpoints).
  PlannerState(CostField field, GridVertex start, GridVertex goal);

  const CostField& field() const noexcept { return field_; }
  const GridVertex& start() const noexcept { return start_; }
  const GridVertex& goal() const noexcept { return goal_; }
  double km() const noexcept { return km_; }
  double g(const GridVertex& v) const { return g_[index(v)]; }
  double rhs(const GridVertex& v) const { return rhs_[index(v)]; }
  Key calculate_key(const GridVertex& v) const;
  bool key_precedes_start(const Key& k) const;

  /// Queued vertices with their stored keys, in priority order.
  std::vector<std::pair<Key, GridVertex>> queue_entries() const;
  std::size_t expansions() const noexcept { return expansions_; }

  void compute_shortest_path();
  /// Moves the start, adding h(old, new) to the key modifier.
  void move_start(const GridVertex& new_start);
  /// Applies cell changes, updates every vertex whose outgoing edges changed, and recomputes.
  void update_cells(const std::vector<CellChange>& changes);

 private:
  std::size_t index(const GridVertex& v) const { return field_.index(v); }
  GridVertex vertex(std::size_t i) const {
    return {static_cast<int>(i / static_cast<std::size_t>(field_.width())),
            static_cast<int>(i % static_cast<std::size_t>(field_.width()))};
  }
  void update_vertex(const GridVertex& v);
  double best_successor_value(const GridVertex& v) const;
  void queue_insert(std::size_t i, const Key& key);
  void queue_erase(std::size_t i);

  CostField field_;
  GridVertex start_;
  GridVertex goal_;
  double km_ = 0.0;
  std::vector<double> g_;
  std::vector<double> rhs_;
  std::set<std::tuple<double, double, std::size_t>> queue_;
  std::vector<std::optional<Key>> queued_key_;
  std::size_t expansions_ = 0;
};

/// Greedy descent from the start choosing the successor minimizing c(u, s') + g(s'),
/// ties broken by the scan order. Throws NoPath when g(start) is infinite,
/// InconsistentState when the descent exceeds width·height steps.
GridPath extract_path(const PlannerState& state);

/// From-scratch D* Lite plan. Throws LethalEndpoint or NoPath.
std::pair<GridPath, PlannerState> plan(const CostField& field, const GridVertex& start,
                                       const GridVertex& goal);

/// Applies changes (and an optional start move) to a prior plan and repairs it.
GridPath update_cells(PlannerState& state, const std::vector<CellChange>& changes,
                      const std::optional<GridVertex>& new_start = std::nullopt);

}  // namespace laserpath
