#pragma once

#include <string>
#include <vector>

#include "mission/grid.hpp"

namespace mission {

struct LonLat {
  double lon = 0, lat = 0;
};

/// Simple closed ring (first vertex repeated last). No holes.
struct Polygon {
  std::vector<LonLat> ring;
};

/// Parses "POLYGON ((x y, x y, ...))". Auto-closes an open ring. Throws
/// validation_error naming the byte offset of the first offending character.
Polygon wkt_parse_polygon(const std::string& wkt);

/// Parses "POINT (x y)".
LonLat wkt_parse_point(const std::string& wkt);

std::string wkt_write_polygon(const Polygon& poly);
std::string wkt_write_point(const LonLat& p);

bool point_in_polygon(const Polygon& poly, double lon, double lat);

/// 1 for every cell whose center falls inside the ring (even-odd rule),
/// 0 elsewhere.
Mask rasterize_polygon(const GridSpec& spec, const Polygon& poly);

}  // namespace mission
