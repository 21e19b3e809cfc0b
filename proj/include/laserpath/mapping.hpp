#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "laserpath/cloud.hpp"
#include "laserpath/plane.hpp"

namespace laserpath {

struct Cell {
  int row = 0;
  int col = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// 2D frame on a plane: u along `axis_u`, v along `axis_v` = normal × axis_u, with the
/// corner of cell (0,0) at planar coordinates `origin`.
struct GridFrame {
  PlaneModel plane;
  Vector3 axis_u = Vector3::UnitX();
  Vector3 axis_v = Vector3::UnitY();
  Eigen::Vector2d origin = Eigen::Vector2d::Zero();
  double resolution = 0.01;

  /// Deterministic basis: u is world +x projected onto the plane (+y when degenerate).
  static GridFrame on_plane(const PlaneModel& plane, double resolution);

  Eigen::Vector2d planar(const Point3& p) const { return {p.dot(axis_u), p.dot(axis_v)}; }
  /// Cell containing the planar projection of p (may be out of bounds).
  Cell cell_of(const Point3& p) const;
  /// 3D point on the plane at the center of a cell.
  Point3 cell_center(const Cell& c) const;
  Eigen::Vector2d cell_center_planar(const Cell& c) const;
};

/// Top-down occupancy raster; row r spans v in [origin.y + r·res, origin.y + (r+1)·res).
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(GridFrame frame, int width, int height);

  const GridFrame& frame() const noexcept { return frame_; }
  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t cell_count() const noexcept { return occupied_.size(); }

  bool in_bounds(const Cell& c) const {
    return c.row >= 0 && c.col >= 0 && c.row < height_ && c.col < width_;
  }
  std::size_t index(const Cell& c) const {
    return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(c.col);
  }
  bool occupied(const Cell& c) const { return occupied_.at(index(c)) != 0; }
  void set_occupied(const Cell& c, bool value = true) { occupied_.at(index(c)) = value ? 1 : 0; }
  std::size_t occupied_count() const;
  std::span<const std::uint8_t> data() const noexcept { return occupied_; }

 private:
  GridFrame frame_;
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> occupied_;
};

struct HeightBand {
  double band_low = -0.01;
  double band_high = 0.03;
  double ceiling = 1.5;

  void validate() const;
  /// Removed iff h ∈ [band_low, band_high] or h > ceiling.
  bool removes(double height) const {
    return (height >= band_low && height <= band_high) || height > ceiling;
  }
};

/// Floor detection constrained to planes within max_tilt of `axis`, seeded.
/// Throws TooFewPoints or NoConstrainedPlane.
PlaneFit ransac_plane(const PointCloud& cloud, double distance_threshold, std::size_t iterations,
                      const Vector3& axis, double max_tilt, std::uint64_t seed,
                      const Point3& sensor = Point3::Zero());

/// Order-preserving removal of the ground band and everything above the ceiling.
PointCloud filter_heights(const PointCloud& cloud, const PlaneModel& plane,
                          const HeightBand& band = {});

/// Projects onto the plane and bins at `resolution`; the origin is the minimum planar
/// coordinate. Throws EmptyCloud.
OccupancyGrid project_topdown(const PointCloud& cloud, const PlaneModel& plane,
                              double resolution);

/// Projects into an existing frame and extent; points falling outside are dropped.
OccupancyGrid project_into(const PointCloud& cloud, const GridFrame& frame, int width,
                           int height);

/// Concatenates the transformed clouds, then voxel-downsamples. Throws LengthMismatch.
PointCloud merge_clouds(std::span<const PointCloud> clouds,
                        std::span<const RigidTransform> transforms, double voxel_edge);

}  // namespace laserpath
