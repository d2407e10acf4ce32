#pragma once

#include <compare>
#include <cstddef>
#include <vector>

namespace mission {

/// Raster geometry shared by every field and mask in one scenario.
/// Row 0 is the northern edge (lat_max); columns run west to east.
/// Lon/lat map affinely onto columns/rows; grid distances use
/// pixel_size_km uniformly (no projection).
struct GridSpec {
  int rows = 0;
  int cols = 0;
  double lon_min = 0, lat_min = 0, lon_max = 0, lat_max = 0;
  double pixel_size_km = 1.0;

  bool operator==(const GridSpec&) const = default;

  std::size_t cell_count() const {
    return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  }
  std::size_t index(int r, int c) const {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) +
           static_cast<std::size_t>(c);
  }
  bool contains(int r, int c) const {
    return r >= 0 && r < rows && c >= 0 && c < cols;
  }

  double cell_center_lon(int c) const {
    return lon_min + (c + 0.5) * (lon_max - lon_min) / cols;
  }
  double cell_center_lat(int r) const {
    return lat_max - (r + 0.5) * (lat_max - lat_min) / rows;
  }

  // Throws mission::validation_error on rows/cols < 2 or a degenerate bbox.
  void validate() const;
};

struct Cell {
  int row = 0;
  int col = 0;
  auto operator<=>(const Cell&) const = default;
};

// Chebyshev (chessboard) distance; the metric for buffers, separation and
// sensor footprints throughout.
inline int chebyshev(const Cell& a, const Cell& b) {
  int dr = a.row > b.row ? a.row - b.row : b.row - a.row;
  int dc = a.col > b.col ? a.col - b.col : b.col - a.col;
  return dr > dc ? dr : dc;
}

/// Dense row-major scalar raster.
struct ScalarField {
  GridSpec spec;
  std::vector<double> data;

  ScalarField() = default;
  ScalarField(const GridSpec& s, double fill = 0.0)
      : spec(s), data(s.cell_count(), fill) {}

  double& at(int r, int c) { return data[spec.index(r, c)]; }
  double at(int r, int c) const { return data[spec.index(r, c)]; }
};

/// Per-cell flow vectors (u eastward, v northward), km/h.
struct VectorField {
  GridSpec spec;
  std::vector<double> u, v;

  VectorField() = default;
  explicit VectorField(const GridSpec& s)
      : spec(s), u(s.cell_count(), 0.0), v(s.cell_count(), 0.0) {}
};

/// Values in [0,1]. Hard masks are exactly {0,1}-valued.
struct Mask {
  GridSpec spec;
  std::vector<double> data;

  Mask() = default;
  Mask(const GridSpec& s, double fill = 1.0)
      : spec(s), data(s.cell_count(), fill) {}

  double& at(int r, int c) { return data[spec.index(r, c)]; }
  double at(int r, int c) const { return data[spec.index(r, c)]; }

  bool is_binary() const;
};

/// Min-max rescale onto [0,1]; a constant field maps to all zeros.
ScalarField normalize01(const ScalarField& f);

/// hypot(df/dcol, df/drow) in field units per cell; central differences in
/// the interior, one-sided at borders.
ScalarField gradient_magnitude(const ScalarField& f);

/// Sum over the Chebyshev window of the given radius, zero-padded borders.
ScalarField box_convolve(const ScalarField& f, int radius);

/// |a - b| elementwise. Throws on GridSpec mismatch.
ScalarField abs_diff(const ScalarField& a, const ScalarField& b);

/// Chebyshev dilation of a {0,1} mask: output 1 iff any input 1 lies within
/// `cells` in both axes.
Mask buffer_mask(const Mask& m, int cells);

}  // namespace mission
