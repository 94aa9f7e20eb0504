#pragma once

#include <cstddef>
#include <vector>

#include "advebm/error.hpp"

namespace advebm {

// Normalized density on a square 2D grid: values are densities at cell
// centers with sum(values) * cell_area == 1.
struct DensityGrid {
  double lo = -1.0;
  double hi = 1.0;
  std::size_t n = 0;            // cells per axis
  std::vector<double> values;   // row-major [iy * n + ix]

  double cell() const { return (hi - lo) / static_cast<double>(n); }
  double cell_area() const { return cell() * cell(); }
  double center(std::size_t i) const { return lo + (static_cast<double>(i) + 0.5) * cell(); }

  double& at(std::size_t ix, std::size_t iy) { return values[iy * n + ix]; }
  double at(std::size_t ix, std::size_t iy) const { return values[iy * n + ix]; }

  // clamps out-of-range points into the edge cells
  std::size_t cell_index(double v) const {
    if (v <= lo) return 0;
    const auto i = static_cast<std::size_t>((v - lo) / cell());
    return i >= n ? n - 1 : i;
  }

  void validate() const {
    if (n == 0 || values.size() != n * n) throw ValueError("DensityGrid: inconsistent size");
    if (!(lo < hi)) throw ValueError("DensityGrid: empty range");
  }
};

}  // namespace advebm
