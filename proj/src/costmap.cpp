#include "laserpath/costmap.hpp"

#include <algorithm>
#include <cmath>

#include "laserpath/error.hpp"

namespace laserpath {

int embodiment_radius_cells(const EmbodimentSpec& spec, double resolution) {
  if (!(spec.length > 0.0) || !(spec.width > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "embodiment dimensions must be > 0");
  }
  if (!(resolution > 0.0)) throw Error(ErrorCode::kInvalidArgument, "resolution must be > 0");
  const double half_diagonal = std::hypot(spec.length / 2.0, spec.width / 2.0);
  return static_cast<int>(std::floor(half_diagonal / resolution + 0.5));
}

CostField::CostField(GridFrame frame, int width, int height)
    : frame_(std::move(frame)), width_(width), height_(height) {
  if (width < 0 || height < 0) throw Error(ErrorCode::kInvalidArgument, "negative field size");
  const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  lethal_.assign(n, 0);
  penalty_.assign(n, 0.0);
}

CostField::CostField(const OccupancyGrid& grid)
    : CostField(grid.frame(), grid.width(), grid.height()) {
  std::copy(grid.data().begin(), grid.data().end(), lethal_.begin());
}

void CostField::set_penalty(const Cell& c, double value) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw Error(ErrorCode::kInvalidArgument, "penalty must be finite and nonnegative");
  }
  penalty_[index(c)] = value;
}

CostField CostField::without_penalties() const {
  CostField out = *this;
  std::fill(out.penalty_.begin(), out.penalty_.end(), 0.0);
  return out;
}

CostField inflate(const OccupancyGrid& grid, int radius, const GaussianParams& params) {
  if (radius < 0) throw Error(ErrorCode::kInvalidArgument, "inflation radius must be >= 0");
  if (!(params.sigma_x > 0.0) || !(params.sigma_y > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "Gaussian sigmas must be > 0");
  }
  CostField field(grid);
  const int w = grid.width();
  const int h = grid.height();
  const int side = 2 * radius + 1;

  // kernel[(dy + r) * side + (dx + r)]; identical expression to a per-pair evaluation.
  std::vector<double> kernel(static_cast<std::size_t>(side) * side);
  const double ax = 2.0 * params.sigma_x * params.sigma_x;
  const double ay = 2.0 * params.sigma_y * params.sigma_y;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      kernel[static_cast<std::size_t>(dy + radius) * side + (dx + radius)] =
          std::exp(-(static_cast<double>(dx * dx) / ax + static_cast<double>(dy * dy) / ay));
    }
  }

  // Obstacles in row-major order so every cell sums its contributions in a fixed order.
  for (int orow = 0; orow < h; ++orow) {
    for (int ocol = 0; ocol < w; ++ocol) {
      if (!grid.occupied({orow, ocol})) continue;
      const int r0 = std::max(0, orow - radius);
      const int r1 = std::min(h - 1, orow + radius);
      const int c0 = std::max(0, ocol - radius);
      const int c1 = std::min(w - 1, ocol + radius);
      for (int r = r0; r <= r1; ++r) {
        const double* krow = &kernel[static_cast<std::size_t>(r - orow + radius) * side];
        for (int c = c0; c <= c1; ++c) {
          const std::size_t idx = field.index({r, c});
          if (field.lethal_data()[idx]) continue;
          field.add_penalty(idx, krow[c - ocol + radius]);
        }
      }
    }
  }
  return field;
}

}  // namespace laserpath
