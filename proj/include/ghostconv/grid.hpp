#pragma once

#include <array>
#include <cstddef>

namespace ghostconv {

/// Uniform sampling grid in one or two transverse dimensions.
///
/// Sample p along an axis sits at origin + (p - (points - 1) / 2) * pitch,
/// so a grid with origin 0 is symmetric about the optical axis. For 2D grids
/// samples are stored row-major with axis 0 (x) varying fastest.
struct Grid {
  int dims = 1;
  std::array<std::size_t, 2> points{2, 1};
  std::array<double, 2> pitch{1.0, 1.0};
  std::array<double, 2> origin{0.0, 0.0};

  std::size_t size() const noexcept { return dims == 1 ? points[0] : points[0] * points[1]; }

  double coordinate(std::size_t index, int axis = 0) const noexcept {
    return origin[axis] + (static_cast<double>(index) - 0.5 * static_cast<double>(points[axis] - 1)) * pitch[axis];
  }

  /// Fractional index of a physical coordinate; inverse of coordinate().
  double index_of(double x, int axis = 0) const noexcept {
    return (x - origin[axis]) / pitch[axis] + 0.5 * static_cast<double>(points[axis] - 1);
  }

  /// Sample closest to coordinate x (ties go to the higher index).
  std::size_t nearest(double x, int axis = 0) const noexcept;

  /// Physical width covered by the samples, points * pitch.
  double extent(int axis = 0) const noexcept { return static_cast<double>(points[axis]) * pitch[axis]; }

  friend bool operator==(const Grid &, const Grid &) = default;
};

/// 1D or 2D (square) grid centered on the axis. Throws invalid_argument on
/// fewer than two points or a non-positive pitch.
Grid make_grid(int dims, std::size_t points, double pitch);

Grid make_line(std::size_t points, double pitch, double origin = 0.0);

Grid make_plane(std::size_t nx, std::size_t ny, double pitch_x, double pitch_y);

} // namespace ghostconv
