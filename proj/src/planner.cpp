#include "laserpath/planner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "laserpath/error.hpp"

namespace laserpath {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

bool is_lethal(const CostField& field, int row, int col) {
  return field.lethal({row, col});
}

}  // namespace

double octile_distance(const GridVertex& a, const GridVertex& b) {
  const int dr = std::abs(a.row - b.row);
  const int dc = std::abs(a.col - b.col);
  return std::max(dr, dc) + (kSqrt2 - 1.0) * std::min(dr, dc);
}

double edge_cost(const CostField& field, const GridVertex& u, const GridVertex& v) {
  const int dr = v.row - u.row;
  const int dc = v.col - u.col;
  if (std::abs(dr) > 1 || std::abs(dc) > 1 || (dr == 0 && dc == 0) || !field.in_bounds(u) ||
      !field.in_bounds(v)) {
    throw Error(ErrorCode::kNotNeighbors, "edge_cost needs two in-bounds 8-neighbors");
  }
  if (field.lethal(u) || field.lethal(v)) return kInfiniteCost;
  const bool diagonal = dr != 0 && dc != 0;
  if (diagonal && (is_lethal(field, u.row, v.col) || is_lethal(field, v.row, u.col))) {
    return kInfiniteCost;
  }
  const double length = diagonal ? kSqrt2 : 1.0;
  return length * (1.0 + (field.penalty(u) + field.penalty(v)) / 2.0);
}

double path_cost(const CostField& field, const std::vector<GridVertex>& vertices) {
  double total = 0.0;
  for (std::size_t i = 1; i < vertices.size(); ++i) {
    total = add_costs(total, edge_cost(field, vertices[i - 1], vertices[i]));
  }
  return total;
}

PlannerState::PlannerState(CostField field, GridVertex start, GridVertex goal)
    : field_(std::move(field)), start_(start), goal_(goal) {
  if (!field_.in_bounds(start_) || !field_.in_bounds(goal_)) {
    throw Error(ErrorCode::kInvalidArgument, "start or goal outside the field");
  }
  if (field_.lethal(start_) || field_.lethal(goal_)) {
    throw Error(ErrorCode::kLethalEndpoint, "start or goal lies on a lethal cell");
  }
  g_.assign(field_.cell_count(), kInfiniteCost);
  rhs_.assign(field_.cell_count(), kInfiniteCost);
  queued_key_.assign(field_.cell_count(), std::nullopt);
  rhs_[index(goal_)] = 0.0;
  queue_insert(index(goal_), calculate_key(goal_));
}

Key PlannerState::calculate_key(const GridVertex& v) const {
  const double m = std::min(g(v), rhs(v));
  return {add_costs(add_costs(m, octile_distance(start_, v)), km_), m};
}

std::vector<std::pair<Key, GridVertex>> PlannerState::queue_entries() const {
  std::vector<std::pair<Key, GridVertex>> out;
  out.reserve(queue_.size());
  for (const auto& [k1, k2, i] : queue_) out.push_back({Key{k1, k2}, vertex(i)});
  return out;
}

void PlannerState::queue_insert(std::size_t i, const Key& key) {
  queue_erase(i);
  queue_.emplace(key.k1, key.k2, i);
  queued_key_[i] = key;
}

void PlannerState::queue_erase(std::size_t i) {
  if (const auto& key = queued_key_[i]) {
    queue_.erase({key->k1, key->k2, i});
    queued_key_[i].reset();
  }
}

double PlannerState::best_successor_value(const GridVertex& v) const {
  double best = kInfiniteCost;
  for (const auto& [dr, dc] : kNeighborOffsets) {
    const GridVertex s{v.row + dr, v.col + dc};
    if (!field_.in_bounds(s)) continue;
    best = std::min(best, add_costs(edge_cost(field_, v, s), g(s)));
  }
  return best;
}

void PlannerState::update_vertex(const GridVertex& v) {
  const std::size_t i = index(v);
  if (g_[i] != rhs_[i]) {
    queue_insert(i, calculate_key(v));
  } else {
    queue_erase(i);
  }
}

// Keys built along different routes can disagree in the last bits even when they tie
// exactly in real arithmetic, so near-ties with the start key are still expanded.
bool PlannerState::key_precedes_start(const Key& k) const {
  const Key s = calculate_key(start_);
  const double tol1 = 1e-9 * (1.0 + std::abs(s.k1));
  const double tol2 = 1e-9 * (1.0 + std::abs(s.k2));
  if (k.k1 < s.k1 - tol1) return true;
  if (!(k.k1 < s.k1 + tol1)) return false;
  return k.k2 < s.k2 + tol2;
}

void PlannerState::compute_shortest_path() {
  const std::size_t s = index(start_);
  while (!queue_.empty()) {
    const auto& [k1, k2, ui] = *queue_.begin();
    const Key k_old{k1, k2};
    if (!key_precedes_start(k_old) && rhs_[s] == g_[s]) break;

    const std::size_t i = ui;
    const GridVertex u = vertex(i);
    const Key k_new = calculate_key(u);
    ++expansions_;
    if (k_old < k_new) {
      queue_insert(i, k_new);
    } else if (g_[i] > rhs_[i]) {
      g_[i] = rhs_[i];
      queue_erase(i);
      for (const auto& [dr, dc] : kNeighborOffsets) {
        const GridVertex p{u.row + dr, u.col + dc};
        if (!field_.in_bounds(p) || p == goal_) continue;
        const std::size_t pi = index(p);
        rhs_[pi] = std::min(rhs_[pi], add_costs(edge_cost(field_, p, u), g_[i]));
        update_vertex(p);
      }
    } else {
      const double g_old = g_[i];
      g_[i] = kInfiniteCost;
      auto refresh = [&](const GridVertex& p, double via_u) {
        const std::size_t pi = index(p);
        if (p != goal_ && (p == u || rhs_[pi] == via_u)) rhs_[pi] = best_successor_value(p);
        update_vertex(p);
      };
      for (const auto& [dr, dc] : kNeighborOffsets) {
        const GridVertex p{u.row + dr, u.col + dc};
        if (!field_.in_bounds(p)) continue;
        refresh(p, add_costs(edge_cost(field_, p, u), g_old));
      }
      refresh(u, kInfiniteCost);
    }
  }
}

void PlannerState::move_start(const GridVertex& new_start) {
  if (!field_.in_bounds(new_start)) {
    throw Error(ErrorCode::kInvalidArgument, "new start outside the field");
  }
  km_ += octile_distance(start_, new_start);
  start_ = new_start;
}

void PlannerState::update_cells(const std::vector<CellChange>& changes) {
  std::vector<std::size_t> touched;
  for (const auto& change : changes) {
    if (!field_.in_bounds(change.cell)) {
      throw Error(ErrorCode::kInvalidArgument, "changed cell outside the field");
    }
    field_.set_lethal(change.cell, change.lethal);
    field_.set_penalty(change.cell, change.penalty);
    // Edges incident to the cell and diagonals cutting its corner all lie in its 3x3 block.
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        const GridVertex v{change.cell.row + dr, change.cell.col + dc};
        if (field_.in_bounds(v)) touched.push_back(index(v));
      }
    }
  }
  if (field_.lethal(start_) || field_.lethal(goal_)) {
    throw Error(ErrorCode::kLethalEndpoint, "update made the start or goal lethal");
  }
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  for (std::size_t i : touched) {
    const GridVertex v = vertex(i);
    if (v != goal_) rhs_[i] = best_successor_value(v);
    update_vertex(v);
  }
  compute_shortest_path();
}

GridPath extract_path(const PlannerState& state) {
  const CostField& field = state.field();
  GridPath path;
  GridVertex u = state.start();
  path.vertices.push_back(u);
  if (u == state.goal()) return path;
  if (state.g(u) == kInfiniteCost) throw Error(ErrorCode::kNoPath, "goal unreachable from start");

  const std::size_t limit = field.cell_count();
  for (std::size_t step = 0; u != state.goal(); ++step) {
    if (step >= limit) throw Error(ErrorCode::kInconsistentState, "path descent does not end");
    GridVertex best_vertex = u;
    double best = kInfiniteCost;
    double best_edge = kInfiniteCost;
    for (const auto& [dr, dc] : kNeighborOffsets) {
      const GridVertex s{u.row + dr, u.col + dc};
      if (!field.in_bounds(s)) continue;
      const double c = edge_cost(field, u, s);
      const double value = add_costs(c, state.g(s));
      if (value < best) {
        best = value;
        best_vertex = s;
        best_edge = c;
      }
    }
    if (best == kInfiniteCost) {
      throw Error(ErrorCode::kInconsistentState, "descent reached a vertex with no finite successor");
    }
    path.total_cost += best_edge;
    u = best_vertex;
    path.vertices.push_back(u);
  }
  return path;
}

std::pair<GridPath, PlannerState> plan(const CostField& field, const GridVertex& start,
                                       const GridVertex& goal) {
  PlannerState state(field, start, goal);
  state.compute_shortest_path();
  GridPath path = extract_path(state);
  return {std::move(path), std::move(state)};
}

GridPath update_cells(PlannerState& state, const std::vector<CellChange>& changes,
                      const std::optional<GridVertex>& new_start) {
  if (new_start) state.move_start(*new_start);
  state.update_cells(changes);
  return extract_path(state);
}

}  // namespace laserpath
