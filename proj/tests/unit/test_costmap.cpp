#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "laserpath/costmap.hpp"
#include "oracles.hpp"

using namespace laserpath;

namespace {

OccupancyGrid single_obstacle(int size, Cell at) {
  OccupancyGrid grid({}, size, size);
  grid.set_occupied(at);
  return grid;
}

}  // namespace

TEST(Embodiment, RadiusExamples) {
  EXPECT_EQ(embodiment_radius_cells({0.40, 0.41}, 0.01), 29);
  EXPECT_EQ(embodiment_radius_cells({0.20, 0.20}, 0.01), 14);
  EXPECT_EQ(embodiment_radius_cells({0.001, 0.001}, 0.01), 0);
  EXPECT_EQ(embodiment_radius_cells({0.40, 0.41}, 0.02), 14);  // 14.32 cells
}

TEST(Inflate, SpotValues) {
  const CostField f = inflate(single_obstacle(11, {5, 5}), 29);
  EXPECT_NEAR(f.penalty({5, 6}), 0.6065307, 5e-8);
  EXPECT_DOUBLE_EQ(f.penalty({5, 6}), std::exp(-0.5));
  EXPECT_NEAR(f.penalty({6, 6}), 0.3678794, 5e-8);
  EXPECT_TRUE(f.lethal({5, 5}));
  EXPECT_EQ(f.penalty({5, 5}), 0.0);

  OccupancyGrid two({}, 5, 1);
  two.set_occupied({0, 0});
  two.set_occupied({0, 2});
  const CostField g = inflate(two, 29);
  EXPECT_NEAR(g.penalty({0, 1}), 1.2130613, 5e-8);
}

TEST(Inflate, ZeroBeyondTruncation) {
  const int radius = 3;
  const CostField f = inflate(single_obstacle(15, {7, 7}), radius);
  EXPECT_GT(f.penalty({7, 7 + radius}), 0.0);
  EXPECT_EQ(f.penalty({7, 7 + radius + 1}), 0.0);
  EXPECT_EQ(f.penalty({7 - radius - 1, 7 - radius - 1}), 0.0);
  for (int r = 0; r < 15; ++r) {
    for (int c = 0; c < 15; ++c) {
      if (std::max(std::abs(r - 7), std::abs(c - 7)) > radius) EXPECT_EQ(f.penalty({r, c}), 0.0);
    }
  }
}

TEST(Inflate, MatchesDoubleLoopOracle) {
  std::mt19937_64 rng(60);
  std::uniform_int_distribution<int> count(0, 50);
  std::uniform_int_distribution<int> coord(0, 63);
  std::uniform_int_distribution<int> radius(0, 12);
  for (int trial = 0; trial < 20; ++trial) {
    OccupancyGrid grid({}, 64, 64);
    std::vector<bool> occ(64 * 64, false);
    for (int i = count(rng); i > 0; --i) {
      const Cell c{coord(rng), coord(rng)};
      grid.set_occupied(c);
      occ[grid.index(c)] = true;
    }
    const int r = radius(rng);
    const double sx = trial % 2 ? 1.0 : 2.5;
    const double sy = trial % 3 ? 1.0 : 1.7;
    const CostField f = inflate(grid, r, {sx, sy, r});
    const auto want = oracle::inflation(occ, 64, 64, r, sx, sy);
    for (std::size_t i = 0; i < want.size(); ++i) {
      ASSERT_NEAR(f.penalty_data()[i], want[i], 1e-12);
      ASSERT_EQ(f.lethal_data()[i] != 0, occ[i]);
    }
  }
}

TEST(Inflate, Superposition) {
  std::mt19937_64 rng(61);
  std::uniform_int_distribution<int> coord(0, 39);
  for (int trial = 0; trial < 10; ++trial) {
    OccupancyGrid a({}, 40, 40);
    OccupancyGrid b({}, 40, 40);
    OccupancyGrid both({}, 40, 40);
    for (int i = 0; i < 12; ++i) {
      const Cell c{coord(rng), coord(rng)};
      if (both.occupied(c)) continue;
      (i % 2 ? a : b).set_occupied(c);
      both.set_occupied(c);
    }
    const CostField fa = inflate(a, 6);
    const CostField fb = inflate(b, 6);
    const CostField fab = inflate(both, 6);
    for (std::size_t i = 0; i < fab.cell_count(); ++i) {
      if (fab.lethal_data()[i]) continue;
      EXPECT_NEAR(fab.penalty_data()[i], fa.penalty_data()[i] + fb.penalty_data()[i], 1e-12);
    }
  }
}

TEST(Inflate, DihedralSymmetry) {
  const int n = 21;
  const int m = n - 1;
  const CostField f = inflate(single_obstacle(n, {10, 10}), 8);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const double v = f.penalty({r, c});
      EXPECT_EQ(v, f.penalty({c, r}));
      EXPECT_EQ(v, f.penalty({m - r, c}));
      EXPECT_EQ(v, f.penalty({r, m - c}));
      EXPECT_EQ(v, f.penalty({m - c, m - r}));
    }
  }
}

TEST(Inflate, DecreasesAlongAxes) {
  const CostField f = inflate(single_obstacle(41, {20, 20}), 5);
  for (int dy = 0; dy <= 5; ++dy) {
    for (int dx = 1; dx < 5; ++dx) {
      EXPECT_GT(f.penalty({20 + dy, 20 + dx}), f.penalty({20 + dy, 20 + dx + 1}));
    }
  }
}

TEST(Inflate, RejectsBadArguments) {
  const OccupancyGrid grid({}, 3, 3);
  EXPECT_THROW(inflate(grid, -1), Error);
  EXPECT_THROW(inflate(grid, 2, {0.0, 1.0, 2}), Error);
}

TEST(CostField, PenaltyValidationAndReset) {
  CostField f({}, 4, 4);
  EXPECT_THROW(f.set_penalty({0, 0}, -1.0), Error);
  EXPECT_THROW(f.set_penalty({0, 0}, std::nan("")), Error);
  f.set_penalty({1, 1}, 0.5);
  f.set_lethal({2, 2}, true);
  const CostField z = f.without_penalties();
  EXPECT_EQ(z.penalty({1, 1}), 0.0);
  EXPECT_TRUE(z.lethal({2, 2}));
}
