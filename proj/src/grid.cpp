#include "mission/grid.hpp"

#include <cmath>

#include "mission/errors.hpp"

namespace mission {

void GridSpec::validate() const {
  if (rows < 2 || cols < 2)
    throw validation_error("grid must be at least 2x2, got " +
                           std::to_string(rows) + "x" + std::to_string(cols));
  if (!(lon_max > lon_min) || !(lat_max > lat_min))
    throw validation_error("grid bbox is degenerate");
  if (!(pixel_size_km > 0))
    throw validation_error("pixel_size_km must be positive");
}

bool Mask::is_binary() const {
  for (double v : data)
    if (v != 0.0 && v != 1.0) return false;
  return true;
}

ScalarField normalize01(const ScalarField& f) {
  ScalarField out(f.spec);
  if (f.data.empty()) return out;
  double lo = f.data[0], hi = f.data[0];
  for (double v : f.data) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (hi <= lo) return out;  // constant field -> all zeros
  const double inv = 1.0 / (hi - lo);
  for (std::size_t i = 0; i < f.data.size(); ++i)
    out.data[i] = (f.data[i] - lo) * inv;
  return out;
}

ScalarField gradient_magnitude(const ScalarField& f) {
  const int R = f.spec.rows, C = f.spec.cols;
  ScalarField out(f.spec);
  for (int r = 0; r < R; ++r) {
    for (int c = 0; c < C; ++c) {
      double dx, dy;
      if (c == 0)
        dx = f.at(r, 1) - f.at(r, 0);
      else if (c == C - 1)
        dx = f.at(r, C - 1) - f.at(r, C - 2);
      else
        dx = (f.at(r, c + 1) - f.at(r, c - 1)) * 0.5;
      if (r == 0)
        dy = f.at(1, c) - f.at(0, c);
      else if (r == R - 1)
        dy = f.at(R - 1, c) - f.at(R - 2, c);
      else
        dy = (f.at(r + 1, c) - f.at(r - 1, c)) * 0.5;
      out.at(r, c) = std::hypot(dx, dy);
    }
  }
  return out;
}

ScalarField box_convolve(const ScalarField& f, int radius) {
  if (radius < 0) throw validation_error("box_convolve radius must be >= 0");
  const int R = f.spec.rows, C = f.spec.cols;
  // Summed-area table, one row/col of zero padding at the top/left.
  std::vector<double> sat(static_cast<std::size_t>(R + 1) * (C + 1), 0.0);
  auto S = [&](int r, int c) -> double& {
    return sat[static_cast<std::size_t>(r) * (C + 1) + c];
  };
  for (int r = 1; r <= R; ++r)
    for (int c = 1; c <= C; ++c)
      S(r, c) = f.at(r - 1, c - 1) + S(r - 1, c) + S(r, c - 1) - S(r - 1, c - 1);

  ScalarField out(f.spec);
  for (int r = 0; r < R; ++r) {
    const int r0 = std::max(0, r - radius), r1 = std::min(R - 1, r + radius);
    for (int c = 0; c < C; ++c) {
      const int c0 = std::max(0, c - radius), c1 = std::min(C - 1, c + radius);
      out.at(r, c) =
          S(r1 + 1, c1 + 1) - S(r0, c1 + 1) - S(r1 + 1, c0) + S(r0, c0);
    }
  }
  return out;
}

ScalarField abs_diff(const ScalarField& a, const ScalarField& b) {
  if (!(a.spec == b.spec))
    throw validation_error("abs_diff: grid shapes differ");
  ScalarField out(a.spec);
  for (std::size_t i = 0; i < a.data.size(); ++i)
    out.data[i] = std::fabs(a.data[i] - b.data[i]);
  return out;
}

Mask buffer_mask(const Mask& m, int cells) {
  if (cells < 0) throw validation_error("buffer_mask cells must be >= 0");
  const int R = m.spec.rows, C = m.spec.cols;
  Mask out(m.spec, 0.0);
  for (int r = 0; r < R; ++r) {
    for (int c = 0; c < C; ++c) {
      if (m.at(r, c) == 0.0) continue;
      const int r0 = std::max(0, r - cells), r1 = std::min(R - 1, r + cells);
      const int c0 = std::max(0, c - cells), c1 = std::min(C - 1, c + cells);
      for (int rr = r0; rr <= r1; ++rr)
        for (int cc = c0; cc <= c1; ++cc) out.at(rr, cc) = 1.0;
    }
  }
  return out;
}

}  // namespace mission
