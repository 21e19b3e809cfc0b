#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "laserpath/mapping.hpp"

namespace laserpath {

/// Robot footprint in meters.
struct EmbodimentSpec {
  double length = 0.40;
  double width = 0.41;
};

/// Gaussian penalty shape in cell units.
struct GaussianParams {
  double sigma_x = 1.0;  // along columns
  double sigma_y = 1.0;  // along rows
  int truncation_radius = 29;
};

/// Half-diagonal of the footprint in cells, rounded half up.
int embodiment_radius_cells(const EmbodimentSpec& spec, double resolution);

/// Lethal cells plus accumulated finite penalties on the geometry of an OccupancyGrid.
class CostField {
 public:
  CostField() = default;
  /// Free field with no lethal cells and zero penalties.
  CostField(GridFrame frame, int width, int height);
  explicit CostField(const OccupancyGrid& grid);

  const GridFrame& frame() const noexcept { return frame_; }
  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t cell_count() const noexcept { return lethal_.size(); }
  bool in_bounds(const Cell& c) const {
    return c.row >= 0 && c.col >= 0 && c.row < height_ && c.col < width_;
  }
  std::size_t index(const Cell& c) const {
    return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(c.col);
  }

  bool lethal(const Cell& c) const { return lethal_[index(c)] != 0; }
  double penalty(const Cell& c) const { return penalty_[index(c)]; }
  void set_lethal(const Cell& c, bool value) { lethal_[index(c)] = value ? 1 : 0; }
  /// Throws InvalidArgument for negative or non-finite penalties.
  void set_penalty(const Cell& c, double value);
  void add_penalty(std::size_t index, double value) { penalty_[index] += value; }

  std::span<const std::uint8_t> lethal_data() const noexcept { return lethal_; }
  std::span<const double> penalty_data() const noexcept { return penalty_; }

  /// Copy with every penalty zeroed (lethal cells kept).
  CostField without_penalties() const;

 private:
  GridFrame frame_;
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> lethal_;
  std::vector<double> penalty_;
};

/// Adds exp(-(dx²/2σx² + dy²/2σy²)) from every occupied cell to each free cell within
/// Chebyshev distance `radius`, summing overlapping contributions. Occupied cells are lethal.
CostField inflate(const OccupancyGrid& grid, int radius, const GaussianParams& params = {});

}  // namespace laserpath
