#include "laserpath/mapping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "laserpath/error.hpp"

namespace laserpath {

GridFrame GridFrame::on_plane(const PlaneModel& plane, double resolution) {
  if (!(resolution > 0.0)) throw Error(ErrorCode::kInvalidArgument, "resolution must be > 0");
  GridFrame frame;
  frame.plane = plane;
  frame.resolution = resolution;
  const Vector3& n = plane.normal;
  Vector3 u = Vector3::UnitX() - Vector3::UnitX().dot(n) * n;
  if (u.norm() < 1e-6) u = Vector3::UnitY() - Vector3::UnitY().dot(n) * n;
  frame.axis_u = u.normalized();
  frame.axis_v = n.cross(frame.axis_u).normalized();
  return frame;
}

Cell GridFrame::cell_of(const Point3& p) const {
  const Eigen::Vector2d q = planar(p);
  return {static_cast<int>(std::floor((q.y() - origin.y()) / resolution)),
          static_cast<int>(std::floor((q.x() - origin.x()) / resolution))};
}

Eigen::Vector2d GridFrame::cell_center_planar(const Cell& c) const {
  return {origin.x() + (c.col + 0.5) * resolution, origin.y() + (c.row + 0.5) * resolution};
}

Point3 GridFrame::cell_center(const Cell& c) const {
  const Eigen::Vector2d q = cell_center_planar(c);
  return q.x() * axis_u + q.y() * axis_v - plane.offset * plane.normal;
}

OccupancyGrid::OccupancyGrid(GridFrame frame, int width, int height)
    : frame_(std::move(frame)), width_(width), height_(height) {
  if (width < 0 || height < 0) throw Error(ErrorCode::kInvalidArgument, "negative grid size");
  occupied_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
}

std::size_t OccupancyGrid::occupied_count() const {
  return static_cast<std::size_t>(std::count(occupied_.begin(), occupied_.end(), 1));
}

void HeightBand::validate() const {
  if (!(band_low < band_high) || !(band_high < ceiling)) {
    throw Error(ErrorCode::kInvalidArgument, "height band must satisfy low < high < ceiling");
  }
}

PlaneFit ransac_plane(const PointCloud& cloud, double distance_threshold, std::size_t iterations,
                      const Vector3& axis, double max_tilt, std::uint64_t seed,
                      const Point3& sensor) {
  if (cloud.size() < 3) throw Error(ErrorCode::kTooFewPoints, "RANSAC needs at least 3 points");
  RansacPlaneParams params;
  params.distance_threshold = distance_threshold;
  params.iterations = iterations;
  params.seed = seed;
  params.axis = axis;
  params.max_tilt = max_tilt;
  params.viewpoint = sensor;
  auto fit = fit_plane_ransac(cloud.points(), params);
  if (!fit) {
    throw Error(ErrorCode::kNoConstrainedPlane, "no sampled plane satisfies the tilt constraint");
  }
  return std::move(*fit);
}

PointCloud filter_heights(const PointCloud& cloud, const PlaneModel& plane,
                          const HeightBand& band) {
  band.validate();
  std::vector<std::size_t> keep;
  keep.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (!band.removes(signed_height(cloud.point(i), plane))) keep.push_back(i);
  }
  return cloud.subset(keep);
}

OccupancyGrid project_topdown(const PointCloud& cloud, const PlaneModel& plane,
                              double resolution) {
  if (cloud.empty()) throw Error(ErrorCode::kEmptyCloud, "nothing to project");
  GridFrame frame = GridFrame::on_plane(plane, resolution);
  Eigen::Vector2d lo = Eigen::Vector2d::Constant(std::numeric_limits<double>::infinity());
  for (const auto& p : cloud.points()) lo = lo.cwiseMin(frame.planar(p));
  frame.origin = lo;

  int width = 0;
  int height = 0;
  std::vector<Cell> cells;
  cells.reserve(cloud.size());
  for (const auto& p : cloud.points()) {
    const Cell c = frame.cell_of(p);
    width = std::max(width, c.col + 1);
    height = std::max(height, c.row + 1);
    cells.push_back(c);
  }
  OccupancyGrid grid(frame, width, height);
  for (const auto& c : cells) grid.set_occupied(c);
  return grid;
}

OccupancyGrid project_into(const PointCloud& cloud, const GridFrame& frame, int width,
                           int height) {
  OccupancyGrid grid(frame, width, height);
  for (const auto& p : cloud.points()) {
    const Cell c = frame.cell_of(p);
    if (grid.in_bounds(c)) grid.set_occupied(c);
  }
  return grid;
}

PointCloud merge_clouds(std::span<const PointCloud> clouds,
                        std::span<const RigidTransform> transforms, double voxel_edge) {
  if (clouds.size() != transforms.size()) {
    throw Error(ErrorCode::kLengthMismatch, "one transform per cloud is required");
  }
  std::vector<Point3> all;
  std::size_t total = 0;
  for (const auto& c : clouds) total += c.size();
  all.reserve(total);
  for (std::size_t i = 0; i < clouds.size(); ++i) {
    for (const auto& p : clouds[i].points()) all.push_back(transforms[i].apply(p));
  }
  return voxel_downsample(PointCloud(std::move(all)), voxel_edge);
}

}  // namespace laserpath
