#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "laserpath/coarse_align.hpp"
#include "laserpath/costmap.hpp"
#include "laserpath/icp.hpp"
#include "laserpath/mapping.hpp"
#include "laserpath/scene.hpp"

namespace laserpath {

struct PipelineConfig {
  double voxel_edge = 0.01;          // map voxel
  double registration_voxel = 0.05;  // clouds are thinned to this before features and ICP
  std::size_t normal_k = 15;
  CoarseAlignParams coarse{.feature_radius = 0.4};
  IcpParams icp{};

  double ransac_threshold = 0.01;
  std::size_t ransac_iterations = 200;
  std::uint64_t ransac_seed = 1;
  Vector3 ransac_axis = Vector3::UnitZ();
  double ransac_max_tilt = 0.2617993877991494;  // 15 degrees

  HeightBand band{};
  double resolution = 0.01;
  EmbodimentSpec embodiment{};
  double sigma_x = 1.0;
  double sigma_y = 1.0;
  bool no_embodiment = false;

  std::optional<Cell> start;
  std::optional<Cell> goal;
  /// Planar positions in the first scan's frame, used when no cell is given.
  std::optional<Eigen::Vector2d> start_xy;
  std::optional<Eigen::Vector2d> goal_xy;

  RandomSceneParams scene{};

  /// Throws ConfigError when a length is non-positive or the band is misordered.
  void validate() const;
};

/// Sets one key from its textual value. Throws ConfigError for unknown keys or bad values.
void apply_setting(PipelineConfig& config, const std::string& key, const std::string& value);

/// Parses "key=value" lines ('#' starts a comment) on top of `base`.
PipelineConfig parse_config(const std::string& text, PipelineConfig base = {});
PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {});

/// Parses "key=value" overrides such as those passed with --set.
void apply_overrides(PipelineConfig& config, const std::vector<std::string>& assignments);

/// Every recognized key with its current value, one "key=value" line each.
std::string dump_config(const PipelineConfig& config);

/// "R,C" with integer components. Throws ConfigError.
Cell parse_cell(const std::string& text);

}  // namespace laserpath
