#pragma once

#include <optional>
#include <string>
#include <vector>

#include "laserpath/config.hpp"
#include "laserpath/planner.hpp"

namespace laserpath {

struct RunReport {
  double coarse_seconds = 0.0;  // normals, FPFH and consensus
  double icp_seconds = 0.0;
  double mapping_seconds = 0.0;  // merge, ground plane, height filter, projection
  double inflation_seconds = 0.0;
  double planning_seconds = 0.0;
  double total_seconds = 0.0;

  std::size_t scans = 0;
  std::vector<double> inlier_fractions;  // one per registered scan
  /// Worst error over the registered scans when ground truth was supplied.
  std::optional<double> rotation_error_deg;
  std::optional<double> translation_error_m;

  int grid_width = 0;
  int grid_height = 0;
  std::size_t lethal_cells = 0;
  double path_cost = 0.0;
  std::size_t path_cells = 0;  // vertices on the path, start and goal included
  double path_length = 0.0;    // geometric length in cells
  double path_penalty = 0.0;   // summed penalty of the path vertices

  /// key=value lines.
  std::string to_text() const;
};

struct PipelineOptions {
  /// Per-scan orientation priors relative to scan 0; index 0 is ignored.
  std::vector<std::optional<OrientationPrior>> priors;
  /// Scan k to scan 0 transforms for error reporting.
  std::optional<std::vector<RigidTransform>> ground_truth;
};

/// Scan thinned to the registration voxel, with normals and FPFH descriptors.
struct PreparedScan {
  PointCloud cloud;
  std::vector<FpfhDescriptor> features;
};

PreparedScan prepare_scan(const PipelineConfig& config, const PointCloud& scan);

struct Registration {
  RigidTransform transform;  // source into the target frame
  CoarseAlignResult coarse;
  IcpResult icp;
  double coarse_seconds = 0.0;  // consensus only; add the prepare time yourself
  double icp_seconds = 0.0;
};

/// coarse_align followed by icp_point_to_plane. Stage errors are labelled
/// "coarse_registration" or "icp".
Registration register_prepared(const PipelineConfig& config, const PreparedScan& source,
                               const PreparedScan& target,
                               const std::optional<OrientationPrior>& prior = std::nullopt);

struct MapProducts {
  PointCloud merged;
  PlaneModel plane;
  OccupancyGrid occupancy;  // extent covers the whole merged cloud, ground included
};

/// Merge, floor detection, height filtering and projection. Stage labels "merge",
/// "ground_plane", "projection".
MapProducts build_map(const PipelineConfig& config, const std::vector<PointCloud>& scans,
                      const std::vector<RigidTransform>& transforms);

/// Lethal cells plus Gaussian penalties over the embodiment radius (penalties zeroed when
/// no_embodiment is set).
CostField build_costfield(const PipelineConfig& config, const OccupancyGrid& occupancy);

/// Configured cells, else configured planar positions, else the first and last sensor
/// positions.
std::pair<Cell, Cell> resolve_endpoints(const PipelineConfig& config, const GridFrame& frame,
                                        const std::vector<RigidTransform>& transforms);

struct PipelineResult {
  CostField field;
  GridPath path;
  RunReport report;
  std::vector<RigidTransform> transforms;  // scan k into the frame of scan 0
  MapProducts map;
  std::optional<PlannerState> planner;
};

/// Registers every scan onto scan 0, builds the map and cost field, and plans. Errors are
/// StageError values naming the failing stage.
PipelineResult run_pipeline(const PipelineConfig& config, const std::vector<PointCloud>& scans,
                            const PipelineOptions& options = {});

struct ScheduledScan {
  std::size_t trigger = 0;  // index along the current path where the scan arrives
  PointCloud scan;
  std::optional<OrientationPrior> prior;
};

struct ReplanStep {
  GridPath path;
  RunReport report;
  Cell robot;                    // where the repair started
  std::size_t changed_cells = 0;
  double fresh_cost = 0.0;       // from-scratch plan on the same field, for comparison
};

/// Runs the pipeline, then for each scheduled scan: advances the robot to the trigger
/// vertex, registers the scan, updates the map in the original frame, and repairs the plan
/// with update_cells. The first entry is the initial plan. Failures are StageError values
/// labelled "replan[i]".
std::vector<ReplanStep> simulate_replanning(const PipelineConfig& config,
                                            const std::vector<PointCloud>& scans,
                                            const std::vector<ScheduledScan>& schedule,
                                            const PipelineOptions& options = {});

struct BenchmarkRow {
  std::string stage;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single run
};

struct BenchmarkTable {
  std::size_t repetitions = 0;
  std::vector<BenchmarkRow> rows;  // FPFH, ICP, D* Lite

  std::string to_text() const;
};

BenchmarkTable benchmark(const PipelineConfig& config, const std::vector<PointCloud>& scans,
                         std::size_t repetitions = 5, const PipelineOptions& options = {});

/// Mean and sample standard deviation.
BenchmarkRow summarize(const std::string& stage, const std::vector<double>& samples);

}  // namespace laserpath
