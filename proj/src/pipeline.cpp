#include "laserpath/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "laserpath/error.hpp"

namespace laserpath {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <typename Fn>
auto in_stage(const std::string& name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e);
  }
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

void fill_path_metrics(RunReport& report, const CostField& field, const GridPath& path) {
  report.path_cost = path.total_cost;
  report.path_cells = path.vertices.size();
  report.path_length = 0.0;
  report.path_penalty = 0.0;
  for (std::size_t i = 0; i < path.vertices.size(); ++i) {
    report.path_penalty += field.penalty(path.vertices[i]);
    if (i > 0) report.path_length += octile_distance(path.vertices[i - 1], path.vertices[i]);
  }
}

std::size_t count_lethal(const CostField& field) {
  const auto data = field.lethal_data();
  return static_cast<std::size_t>(std::count(data.begin(), data.end(), std::uint8_t{1}));
}

}  // namespace

std::string RunReport::to_text() const {
  std::ostringstream out;
  out << "scans=" << scans << "\n"
      << "coarse_seconds=" << fmt(coarse_seconds) << "\n"
      << "icp_seconds=" << fmt(icp_seconds) << "\n"
      << "mapping_seconds=" << fmt(mapping_seconds) << "\n"
      << "inflation_seconds=" << fmt(inflation_seconds) << "\n"
      << "planning_seconds=" << fmt(planning_seconds) << "\n"
      << "total_seconds=" << fmt(total_seconds) << "\n";
  for (std::size_t k = 0; k < inlier_fractions.size(); ++k) {
    out << "inlier_fraction_" << (k + 1) << "=" << fmt(inlier_fractions[k]) << "\n";
  }
  if (rotation_error_deg) out << "rotation_error_deg=" << fmt(*rotation_error_deg) << "\n";
  if (translation_error_m) out << "translation_error_m=" << fmt(*translation_error_m) << "\n";
  out << "grid_width=" << grid_width << "\n"
      << "grid_height=" << grid_height << "\n"
      << "lethal_cells=" << lethal_cells << "\n"
      << "path_cost=" << fmt(path_cost) << "\n"
      << "path_cells=" << path_cells << "\n"
      << "path_length=" << fmt(path_length) << "\n"
      << "path_penalty=" << fmt(path_penalty) << "\n";
  return out.str();
}

PreparedScan prepare_scan(const PipelineConfig& config, const PointCloud& scan) {
  return in_stage("normals", [&] {
    PreparedScan p;
    p.cloud = estimate_normals(voxel_downsample(scan, config.registration_voxel), config.normal_k);
    p.features = in_stage("fpfh", [&] { return compute_fpfh(p.cloud, config.coarse.feature_radius); });
    return p;
  });
}

Registration register_prepared(const PipelineConfig& config, const PreparedScan& source,
                               const PreparedScan& target,
                               const std::optional<OrientationPrior>& prior) {
  Registration r;
  auto t0 = Clock::now();
  r.coarse = in_stage("coarse_registration", [&] {
    if (prior) {
      // Descriptors are rotation invariant, so the unrotated ones serve the rotated cloud.
      return coarse_align_with_features(source.cloud, source.features, target.cloud,
                                        target.features, config.coarse, prior);
    }
    return coarse_align_with_features(source.cloud, source.features, target.cloud,
                                      target.features, config.coarse);
  });
  r.coarse_seconds = seconds_since(t0);
  t0 = Clock::now();
  r.icp = in_stage("icp", [&] {
    return icp_point_to_plane(source.cloud, target.cloud, r.coarse.transform, config.icp);
  });
  r.icp_seconds = seconds_since(t0);
  r.transform = r.icp.transform;
  return r;
}

MapProducts build_map(const PipelineConfig& config, const std::vector<PointCloud>& scans,
                      const std::vector<RigidTransform>& transforms) {
  MapProducts m;
  m.merged = in_stage("merge", [&] { return merge_clouds(scans, transforms, config.voxel_edge); });
  const PlaneFit floor = in_stage("ground_plane", [&] {
    return ransac_plane(m.merged, config.ransac_threshold, config.ransac_iterations,
                        config.ransac_axis, config.ransac_max_tilt, config.ransac_seed);
  });
  m.plane = floor.plane;
  m.occupancy = in_stage("projection", [&] {
    const PointCloud obstacles = filter_heights(m.merged, m.plane, config.band);
    const OccupancyGrid extent = project_topdown(m.merged, m.plane, config.resolution);
    return project_into(obstacles, extent.frame(), extent.width(), extent.height());
  });
  return m;
}

CostField build_costfield(const PipelineConfig& config, const OccupancyGrid& occupancy) {
  return in_stage("inflation", [&] {
    const int radius = embodiment_radius_cells(config.embodiment, config.resolution);
    CostField field = inflate(occupancy, radius, {config.sigma_x, config.sigma_y, radius});
    return config.no_embodiment ? field.without_penalties() : field;
  });
}

std::pair<Cell, Cell> resolve_endpoints(const PipelineConfig& config, const GridFrame& frame,
                                        const std::vector<RigidTransform>& transforms) {
  auto from_xy = [&](const Eigen::Vector2d& xy) { return frame.cell_of(Point3(xy.x(), xy.y(), 0.0)); };
  Cell start = frame.cell_of(Point3::Zero());
  Cell goal = transforms.empty() ? start : frame.cell_of(transforms.back().translation());
  if (config.start_xy) start = from_xy(*config.start_xy);
  if (config.goal_xy) goal = from_xy(*config.goal_xy);
  if (config.start) start = *config.start;
  if (config.goal) goal = *config.goal;
  return {start, goal};
}

PipelineResult run_pipeline(const PipelineConfig& config, const std::vector<PointCloud>& scans,
                            const PipelineOptions& options) {
  const auto t_total = Clock::now();
  in_stage("config", [&] { config.validate(); });
  if (scans.empty()) {
    throw StageError("input", Error(ErrorCode::kInvalidArgument, "the pipeline needs a scan"));
  }
  PipelineResult result;
  RunReport& report = result.report;
  report.scans = scans.size();
  result.transforms.assign(scans.size(), RigidTransform::identity());

  if (scans.size() > 1) {
    auto t0 = Clock::now();
    const PreparedScan target = prepare_scan(config, scans.front());
    report.coarse_seconds += seconds_since(t0);
    for (std::size_t k = 1; k < scans.size(); ++k) {
      t0 = Clock::now();
      const PreparedScan source = prepare_scan(config, scans[k]);
      report.coarse_seconds += seconds_since(t0);
      const std::optional<OrientationPrior> prior =
          k < options.priors.size() ? options.priors[k] : std::nullopt;
      const Registration reg = register_prepared(config, source, target, prior);
      report.coarse_seconds += reg.coarse_seconds;
      report.icp_seconds += reg.icp_seconds;
      report.inlier_fractions.push_back(reg.coarse.inlier_fraction);
      result.transforms[k] = reg.transform;
    }
    if (options.ground_truth) {
      if (options.ground_truth->size() != scans.size()) {
        throw StageError("input", Error(ErrorCode::kLengthMismatch,
                                        "one ground-truth transform per scan is required"));
      }
      double worst_rot = 0.0;
      double worst_trans = 0.0;
      for (std::size_t k = 1; k < scans.size(); ++k) {
        const TransformError e = transform_error(result.transforms[k], (*options.ground_truth)[k]);
        worst_rot = std::max(worst_rot, e.rotation_deg);
        worst_trans = std::max(worst_trans, e.translation_m);
      }
      report.rotation_error_deg = worst_rot;
      report.translation_error_m = worst_trans;
    }
  }

  auto t0 = Clock::now();
  result.map = build_map(config, scans, result.transforms);
  report.mapping_seconds = seconds_since(t0);

  t0 = Clock::now();
  result.field = build_costfield(config, result.map.occupancy);
  report.inflation_seconds = seconds_since(t0);
  report.grid_width = result.field.width();
  report.grid_height = result.field.height();
  report.lethal_cells = count_lethal(result.field);

  t0 = Clock::now();
  in_stage("planning", [&] {
    const auto [start, goal] = resolve_endpoints(config, result.field.frame(), result.transforms);
    auto [path, state] = plan(result.field, start, goal);
    result.path = std::move(path);
    result.planner.emplace(std::move(state));
  });
  report.planning_seconds = seconds_since(t0);
  fill_path_metrics(report, result.field, result.path);
  report.total_seconds = seconds_since(t_total);
  return result;
}

std::vector<ReplanStep> simulate_replanning(const PipelineConfig& config,
                                            const std::vector<PointCloud>& scans,
                                            const std::vector<ScheduledScan>& schedule,
                                            const PipelineOptions& options) {
  PipelineResult initial = run_pipeline(config, scans, options);
  std::vector<ReplanStep> steps;
  steps.push_back({initial.path, initial.report, initial.path.vertices.front(), 0,
                   initial.path.total_cost});
  if (schedule.empty()) return steps;

  PlannerState& state = *initial.planner;
  const GridFrame frame = initial.map.occupancy.frame();
  const int width = initial.map.occupancy.width();
  const int height = initial.map.occupancy.height();
  OccupancyGrid occupancy = initial.map.occupancy;
  const PreparedScan target = prepare_scan(config, scans.front());
  GridPath current = initial.path;

  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const std::string label = "replan[" + std::to_string(i + 1) + "]";
    const ScheduledScan& item = schedule[i];
    ReplanStep step;
    RunReport& report = step.report;
    report.scans = 1;
    const auto t_total = Clock::now();
    in_stage(label, [&] {
      step.robot = current.vertices[std::min(item.trigger, current.vertices.size() - 1)];

      auto t0 = Clock::now();
      const PreparedScan source = prepare_scan(config, item.scan);
      report.coarse_seconds = seconds_since(t0);
      const Registration reg = register_prepared(config, source, target, item.prior);
      report.coarse_seconds += reg.coarse_seconds;
      report.icp_seconds = reg.icp_seconds;
      report.inlier_fractions.push_back(reg.coarse.inlier_fraction);

      t0 = Clock::now();
      const PointCloud placed = in_stage("merge", [&] {
        return voxel_downsample(apply_transform(item.scan, reg.transform), config.voxel_edge);
      });
      const OccupancyGrid fresh =
          project_into(filter_heights(placed, initial.map.plane, config.band), frame, width, height);
      for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
          if (fresh.occupied({r, c})) occupancy.set_occupied({r, c});
        }
      }
      report.mapping_seconds = seconds_since(t0);

      t0 = Clock::now();
      const CostField field = build_costfield(config, occupancy);
      report.inflation_seconds = seconds_since(t0);
      report.grid_width = field.width();
      report.grid_height = field.height();
      report.lethal_cells = count_lethal(field);

      t0 = Clock::now();
      std::vector<CellChange> changes;
      const CostField& old = state.field();
      for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
          const Cell cell{r, c};
          if (old.lethal(cell) != field.lethal(cell) || old.penalty(cell) != field.penalty(cell)) {
            changes.push_back({cell, field.lethal(cell), field.penalty(cell)});
          }
        }
      }
      step.changed_cells = changes.size();
      step.path = in_stage("planning", [&] { return update_cells(state, changes, step.robot); });
      report.planning_seconds = seconds_since(t0);
      step.fresh_cost = plan(field, step.robot, state.goal()).first.total_cost;
      fill_path_metrics(report, field, step.path);
    });
    report.total_seconds = seconds_since(t_total);
    current = step.path;
    steps.push_back(std::move(step));
  }
  return steps;
}

BenchmarkRow summarize(const std::string& stage, const std::vector<double>& samples) {
  BenchmarkRow row{stage, 0.0, 0.0};
  if (samples.empty()) return row;
  const double n = static_cast<double>(samples.size());
  for (double s : samples) row.mean += s;
  row.mean /= n;
  if (samples.size() > 1) {
    double var = 0.0;
    for (double s : samples) var += (s - row.mean) * (s - row.mean);
    row.stddev = std::sqrt(var / (n - 1.0));
  }
  return row;
}

BenchmarkTable benchmark(const PipelineConfig& config, const std::vector<PointCloud>& scans,
                         std::size_t repetitions, const PipelineOptions& options) {
  if (repetitions == 0) {
    throw Error(ErrorCode::kInvalidArgument, "benchmark needs at least one repetition");
  }
  std::vector<double> coarse;
  std::vector<double> icp;
  std::vector<double> planning;
  for (std::size_t i = 0; i < repetitions; ++i) {
    const PipelineResult r = run_pipeline(config, scans, options);
    coarse.push_back(r.report.coarse_seconds);
    icp.push_back(r.report.icp_seconds);
    planning.push_back(r.report.planning_seconds);
  }
  BenchmarkTable table;
  table.repetitions = repetitions;
  table.rows = {summarize("FPFH", coarse), summarize("ICP", icp), summarize("D* Lite", planning)};
  return table;
}

std::string BenchmarkTable::to_text() const {
  std::ostringstream out;
  out << "runs=" << repetitions << "\n";
  out << "stage    mean_s ± std_s\n";
  for (const auto& row : rows) {
    char line[128];
    std::snprintf(line, sizeof(line), "%-8s %8.3f ± %.3f\n", row.stage.c_str(), row.mean,
                  row.stddev);
    out << line;
  }
  return out.str();
}

}  // namespace laserpath
