#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "laserpath/error.hpp"
#include "laserpath/io.hpp"
#include "laserpath/pipeline.hpp"
#include "laserpath/scene.hpp"

using namespace laserpath;

namespace {

bool inside_footprint(const Box& box, const Eigen::Vector2d& xy, double shrink) {
  const Eigen::Vector2d local = Eigen::Rotation2Dd(-box.yaw) * (xy - box.center);
  return std::abs(local.x()) < box.size.x() / 2 - shrink &&
         std::abs(local.y()) < box.size.y() / 2 - shrink;
}

struct Street {
  SceneSpec spec;
  Scene scene;
};

const Street& street() {
  static const Street s = [] {
    SceneSpec spec = fixtures::street_scene(30000, 0.005);
    Scene scene = generate_scene(spec);
    return Street{std::move(spec), std::move(scene)};
  }();
  return s;
}

// Goal 2 m ahead in the scan-0 frame, clear of every box.
PipelineConfig single_scan_config() {
  PipelineConfig config;
  config.goal_xy = Eigen::Vector2d(2.0, 0.0);
  return config;
}

// Scan from the first pose of a scene that has an extra thin wall across the way to the goal.
PointCloud wall_scan() {
  SceneSpec spec = street().spec;
  const Eigen::Vector2d goal_world =
      (spec.poses[0].apply(Point3(2.0, 0.0, 0.0))).head<2>();
  const Eigen::Vector2d start_world = spec.poses[0].translation().head<2>();
  const Eigen::Vector2d mid = (goal_world + start_world) / 2;
  spec.boxes.push_back(Box{mid, {0.1, 1.0, 0.8}, 0.2});
  spec.poses = {spec.poses[0]};
  spec.seed = 7;
  return generate_scene(spec).scans[0];
}

}  // namespace

TEST(Pipeline, TwoScanSceneRegistersAndAvoidsObstacles) {
  const Street& s = street();
  PipelineOptions options;
  options.ground_truth = s.scene.ground_truth;
  const PipelineResult r = run_pipeline(PipelineConfig{}, s.scene.scans, options);
  ASSERT_TRUE(r.report.rotation_error_deg && r.report.translation_error_m);
  EXPECT_LT(*r.report.rotation_error_deg, 1.0);
  EXPECT_LT(*r.report.translation_error_m, 0.02);
  ASSERT_GE(r.path.vertices.size(), 2u);
  EXPECT_GT(r.report.lethal_cells, 0u);
  EXPECT_GE(r.report.coarse_seconds, 0.0);
  EXPECT_GE(r.report.icp_seconds, 0.0);
  EXPECT_GE(r.report.planning_seconds, 0.0);

  const GridFrame& frame = r.field.frame();
  for (const Cell& c : r.path.vertices) {
    EXPECT_FALSE(r.field.lethal(c));
    const Eigen::Vector2d world = s.spec.poses[0].apply(frame.cell_center(c)).head<2>();
    for (const Box& box : s.spec.boxes) {
      EXPECT_FALSE(inside_footprint(box, world, 0.02)) << c.row << "," << c.col;
    }
  }
  EXPECT_NEAR(r.path.total_cost, path_cost(r.field, r.path.vertices), 1e-9);
  EXPECT_EQ(r.report.path_cells, r.path.vertices.size());
}

TEST(Pipeline, SingleScanWithStartAtGoal) {
  const PipelineResult r = run_pipeline(PipelineConfig{}, {street().scene.scans[0]});
  EXPECT_EQ(r.report.scans, 1u);
  EXPECT_EQ(r.report.coarse_seconds, 0.0);
  EXPECT_EQ(r.report.icp_seconds, 0.0);
  ASSERT_EQ(r.path.vertices.size(), 1u);
  EXPECT_EQ(r.path.total_cost, 0.0);
}

TEST(Pipeline, DisjointScansFailInCoarseRegistration) {
  std::mt19937_64 rng(90);
  const PointCloud blob(fixtures::uniform_points(rng, 20000, -1.5, 1.5));
  try {
    run_pipeline(PipelineConfig{}, {street().scene.scans[0], blob});
    FAIL() << "expected a stage error";
  } catch (const StageError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientInliers);
    EXPECT_EQ(e.stage(), "coarse_registration");
  }
}

TEST(Pipeline, ConfigAndInputErrorsAreLabelled) {
  PipelineConfig bad;
  bad.resolution = -1;
  try {
    run_pipeline(bad, {street().scene.scans[0]});
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "config");
    EXPECT_EQ(e.code(), ErrorCode::kConfigError);
  }
  try {
    run_pipeline(PipelineConfig{}, {});
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "input");
  }
}

TEST(Pipeline, Deterministic) {
  const auto& scans = street().scene.scans;
  const PipelineResult a = run_pipeline(PipelineConfig{}, scans);
  const PipelineResult b = run_pipeline(PipelineConfig{}, scans);
  EXPECT_EQ(a.transforms[1].matrix(), b.transforms[1].matrix());
  ASSERT_EQ(a.field.cell_count(), b.field.cell_count());
  EXPECT_TRUE(std::equal(a.field.penalty_data().begin(), a.field.penalty_data().end(),
                         b.field.penalty_data().begin()));
  EXPECT_TRUE(std::equal(a.field.lethal_data().begin(), a.field.lethal_data().end(),
                         b.field.lethal_data().begin()));
  EXPECT_EQ(a.path.vertices, b.path.vertices);
}

TEST(Pipeline, NoEmbodimentZeroesPenalties) {
  PipelineConfig config = single_scan_config();
  config.no_embodiment = true;
  const PipelineResult r = run_pipeline(config, {street().scene.scans[0]});
  for (double p : r.field.penalty_data()) ASSERT_EQ(p, 0.0);
  EXPECT_GT(r.report.lethal_cells, 0u);
}

TEST(Pipeline, EndpointsFromCells) {
  PipelineConfig config;
  const PipelineResult base = run_pipeline(single_scan_config(), {street().scene.scans[0]});
  config.start = base.path.vertices.front();
  config.goal = base.path.vertices.back();
  const PipelineResult r = run_pipeline(config, {street().scene.scans[0]});
  EXPECT_EQ(r.path.vertices, base.path.vertices);
  config.goal = Cell{-5, 3};
  EXPECT_THROW(run_pipeline(config, {street().scene.scans[0]}), StageError);
}

TEST(Simulate, EmptyScheduleReturnsInitialPlan) {
  const auto steps = simulate_replanning(single_scan_config(), {street().scene.scans[0]}, {});
  ASSERT_EQ(steps.size(), 1u);
  EXPECT_GE(steps[0].path.vertices.size(), 2u);
}

TEST(Simulate, RepeatScanKeepsSuffix) {
  const PointCloud& scan0 = street().scene.scans[0];
  const std::size_t trigger = 40;
  const auto steps =
      simulate_replanning(single_scan_config(), {scan0}, {ScheduledScan{trigger, scan0, {}}});
  ASSERT_EQ(steps.size(), 2u);
  EXPECT_EQ(steps[1].changed_cells, 0u);
  const auto& before = steps[0].path.vertices;
  const auto& after = steps[1].path.vertices;
  ASSERT_GT(before.size(), trigger);
  const std::vector<Cell> suffix(before.begin() + trigger, before.end());
  EXPECT_EQ(after, suffix);
  EXPECT_EQ(steps[1].robot, before[trigger]);
}

TEST(Simulate, WallForcesDetourMatchingFreshPlan) {
  const PointCloud& scan0 = street().scene.scans[0];
  const auto steps =
      simulate_replanning(single_scan_config(), {scan0}, {ScheduledScan{5, wall_scan(), {}}});
  ASSERT_EQ(steps.size(), 2u);
  EXPECT_GT(steps[1].changed_cells, 0u);
  EXPECT_NEAR(steps[1].path.total_cost, steps[1].fresh_cost, 1e-9);
  const auto& before = steps[0].path;
  EXPECT_GT(steps[1].report.lethal_cells, steps[0].report.lethal_cells);
  bool differs = false;
  for (std::size_t i = 0; i < steps[1].path.vertices.size(); ++i) {
    if (i + 5 >= before.vertices.size() || steps[1].path.vertices[i] != before.vertices[i + 5]) {
      differs = true;
      break;
    }
  }
  EXPECT_TRUE(differs);
}

TEST(Benchmark, RowsAndSingleRun) {
  const auto table = benchmark(single_scan_config(), {street().scene.scans[0]}, 1);
  EXPECT_EQ(table.repetitions, 1u);
  ASSERT_EQ(table.rows.size(), 3u);
  EXPECT_EQ(table.rows[0].stage, "FPFH");
  EXPECT_EQ(table.rows[1].stage, "ICP");
  EXPECT_EQ(table.rows[2].stage, "D* Lite");
  for (const auto& row : table.rows) EXPECT_EQ(row.stddev, 0.0);
  EXPECT_THROW(benchmark(single_scan_config(), {street().scene.scans[0]}, 0), Error);
  const std::string text = table.to_text();
  EXPECT_NE(text.find("D* Lite"), std::string::npos);
}

TEST(Benchmark, SummarizeUsesSampleDeviation) {
  const BenchmarkRow row = summarize("x", {1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(row.mean, 2.5);
  EXPECT_NEAR(row.stddev, std::sqrt(5.0 / 3.0), 1e-12);
}

TEST(Report, TextHasKeyValueLines) {
  RunReport r;
  r.rotation_error_deg = 0.5;
  const std::string text = r.to_text();
  EXPECT_NE(text.find("rotation_error_deg="), std::string::npos);
  EXPECT_NE(text.find("total_seconds="), std::string::npos);
}
