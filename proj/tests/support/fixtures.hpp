#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "laserpath/cloud.hpp"
#include "laserpath/costmap.hpp"
#include "laserpath/pipeline.hpp"
#include "laserpath/scene.hpp"
#include "oracles.hpp"

namespace fixtures {

using laserpath::Point3;
using laserpath::PointCloud;
using laserpath::RigidTransform;

inline std::vector<Point3> uniform_points(std::mt19937_64& rng, std::size_t n, double lo = 0.0,
                                          double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<Point3> pts(n);
  for (auto& p : pts) p = {u(rng), u(rng), u(rng)};
  return pts;
}

inline RigidTransform random_transform(std::mt19937_64& rng, double max_angle = std::numbers::pi,
                                       double max_translation = 5.0) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::Vector3d axis(n(rng), n(rng), n(rng));
  axis.normalize();
  const double angle = max_angle * std::abs(u(rng));
  return RigidTransform::from_axis_angle(axis, angle,
                                         {max_translation * u(rng), max_translation * u(rng),
                                          max_translation * u(rng)});
}

/// Regular grid on z = 0 with `n`×`n` points spaced `step`.
inline std::vector<Point3> plane_grid(int n, double step, double z = 0.0) {
  std::vector<Point3> pts;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) pts.push_back({i * step, j * step, z});
  }
  return pts;
}

/// Random field: `lethal_fraction` lethal cells, other penalties uniform in [0, max_penalty].
inline laserpath::CostField random_field(std::mt19937_64& rng, int width, int height,
                                         double lethal_fraction, double max_penalty) {
  laserpath::CostField field({}, width, height);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      if (u(rng) < lethal_fraction) {
        field.set_lethal({r, c}, true);
      } else {
        field.set_penalty({r, c}, max_penalty * u(rng));
      }
    }
  }
  return field;
}

inline oracle::Grid to_oracle(const laserpath::CostField& field) {
  oracle::Grid g;
  g.width = field.width();
  g.height = field.height();
  for (std::size_t i = 0; i < field.cell_count(); ++i) {
    g.lethal.push_back(field.lethal_data()[i] != 0);
    g.penalty.push_back(field.penalty_data()[i]);
  }
  return g;
}

/// Two sensors about 1.6 m apart on open ground between a handful of boxes.
inline laserpath::SceneSpec street_scene(std::size_t points = 20000, double noise = 0.002) {
  using laserpath::Box;
  laserpath::SceneSpec spec;
  spec.seed = 42;
  spec.ground_half_extent = 6.0;
  spec.points_per_scan = points;
  spec.noise_sigma = noise;
  spec.boxes = {
      Box{{2.5, 2.0}, {1.2, 0.8, 1.0}, 0.3},    Box{{-2.0, 1.8}, {0.6, 1.4, 0.7}, -0.5},
      Box{{0.8, -2.2}, {1.8, 0.5, 1.2}, 0.1},   Box{{-3.2, -1.5}, {0.9, 0.9, 0.5}, 0.8},
      Box{{4.0, -1.0}, {0.4, 1.6, 0.9}, -0.2},  Box{{-0.5, 3.5}, {1.0, 0.6, 1.4}, 1.1},
  };
  spec.poses = {
      RigidTransform::from_rpy(0.0, 0.0, 0.2, {0.0, 0.0, 0.5}),
      RigidTransform::from_rpy(0.01, -0.02, 0.45, {1.5, 0.4, 0.52}),
  };
  return spec;
}

/// Builds a CostField from row strings: '#' lethal, '.' free.
inline laserpath::CostField field_from_rows(const std::vector<std::string>& rows) {
  laserpath::CostField field({}, static_cast<int>(rows.front().size()),
                             static_cast<int>(rows.size()));
  for (int r = 0; r < field.height(); ++r) {
    for (int c = 0; c < field.width(); ++c) {
      if (rows[r][c] == '#') field.set_lethal({r, c}, true);
    }
  }
  return field;
}

inline laserpath::OccupancyGrid grid_from_rows(const std::vector<std::string>& rows) {
  laserpath::OccupancyGrid grid({}, static_cast<int>(rows.front().size()),
                                static_cast<int>(rows.size()));
  for (int r = 0; r < grid.height(); ++r) {
    for (int c = 0; c < grid.width(); ++c) {
      if (rows[r][c] == '#') grid.set_occupied({r, c});
    }
  }
  return grid;
}

}  // namespace fixtures

namespace fixtures {

/// 60×34 map split by a long block. The upper corridor is two cells wide and hugs
/// obstacles on both sides; the lower one is wide open but further from the straight line.
inline laserpath::OccupancyGrid two_corridor_grid() {
  laserpath::OccupancyGrid grid({}, 60, 34);
  for (int c = 0; c < 60; ++c) grid.set_occupied({7, c});
  for (int r = 10; r <= 20; ++r) {
    for (int c = 10; c <= 50; ++c) grid.set_occupied({r, c});
  }
  return grid;
}

inline constexpr laserpath::Cell kCorridorStart{12, 3};
inline constexpr laserpath::Cell kCorridorGoal{12, 56};

/// Geometric length of a path in cells.
inline double path_length(const std::vector<laserpath::Cell>& path) {
  double total = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const bool diagonal = path[i].row != path[i - 1].row && path[i].col != path[i - 1].col;
    total += diagonal ? std::sqrt(2.0) : 1.0;
  }
  return total;
}

inline double penalty_sum(const laserpath::CostField& field,
                          const std::vector<laserpath::Cell>& path) {
  double total = 0.0;
  for (const auto& c : path) total += field.penalty(c);
  return total;
}

}  // namespace fixtures
