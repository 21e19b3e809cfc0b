#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "laserpath/cloud.hpp"
#include "laserpath/costmap.hpp"
#include "laserpath/planner.hpp"

namespace laserpath {

/// Reads "x y z" text (one triple per line, '#' comments) or an ASCII PCD file with
/// FIELDS x y z. Throws ParseError (with line number), EmptyFile, or IoError.
PointCloud load_cloud(const std::filesystem::path& path);
PointCloud parse_cloud(const std::string& text);

/// Writes "x y z" lines with round-trip precision.
void save_cloud(const PointCloud& cloud, const std::filesystem::path& path);

/// Writes `contents` to a sibling temp file, then renames over `path`. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// Grayscale value of a cell: 0 when lethal, else round(255 · (1 - min(penalty, 1))).
std::uint8_t costfield_pixel(const CostField& field, const Cell& cell);

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major
};

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, 3 bytes per pixel
};

/// Binary PGM (P5, maxval 255), row-major from cell (0,0).
void save_costfield_pgm(const CostField& field, const std::filesystem::path& path);
/// Binary PGM of occupancy: 0 for occupied, 255 for free.
void save_occupancy_pgm(const OccupancyGrid& grid, const std::filesystem::path& path);
GrayImage read_pgm(const std::filesystem::path& path);

/// Binary PPM (P6): cost-field grayscale, path red, start green, goal blue.
void save_overlay_ppm(const CostField& field, const GridPath& path,
                      const std::filesystem::path& file);
RgbImage read_ppm(const std::filesystem::path& path);

/// "row,col" per line, start first.
void save_path_csv(const GridPath& path, const std::filesystem::path& file);
std::vector<GridVertex> load_path_csv(const std::filesystem::path& file);

/// Frame metadata as key=value text, so grids can be rebuilt from an occupancy PGM.
void save_grid_frame(const GridFrame& frame, int width, int height,
                     const std::filesystem::path& path);
OccupancyGrid load_occupancy(const std::filesystem::path& pgm,
                             const std::filesystem::path& frame_file);

/// Four rows of a 4x4 homogeneous matrix per transform, blank-line separated.
void save_transforms(const std::vector<RigidTransform>& transforms,
                     const std::filesystem::path& path);
std::vector<RigidTransform> load_transforms(const std::filesystem::path& path);

}  // namespace laserpath
