#include "mission/polygon.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

#include "mission/errors.hpp"
#include "mission/util.hpp"

namespace mission {
namespace {

struct WktCursor {
  const std::string& s;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos])))
      ++pos;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw validation_error("wkt parse error at byte " + std::to_string(pos) +
                           ": " + what);
  }
  void expect(char ch) {
    skip_ws();
    if (pos >= s.size() || s[pos] != ch)
      fail(std::string("expected '") + ch + "'");
    ++pos;
  }
  bool try_consume(char ch) {
    skip_ws();
    if (pos < s.size() && s[pos] == ch) {
      ++pos;
      return true;
    }
    return false;
  }
  void keyword(const char* kw) {
    skip_ws();
    std::size_t i = 0;
    while (kw[i]) {
      if (pos + i >= s.size() ||
          std::toupper(static_cast<unsigned char>(s[pos + i])) != kw[i])
        fail(std::string("expected keyword ") + kw);
      ++i;
    }
    pos += i;
  }
  double number() {
    skip_ws();
    double out = 0;
    auto res = std::from_chars(s.data() + pos, s.data() + s.size(), out);
    if (res.ec != std::errc()) fail("expected number");
    pos = static_cast<std::size_t>(res.ptr - s.data());
    return out;
  }
  void end() {
    skip_ws();
    if (pos != s.size()) fail("trailing input");
  }
};

}  // namespace

Polygon wkt_parse_polygon(const std::string& wkt) {
  WktCursor cur{wkt};
  cur.keyword("POLYGON");
  cur.expect('(');
  cur.expect('(');
  Polygon poly;
  for (;;) {
    double lon = cur.number();
    double lat = cur.number();
    poly.ring.push_back({lon, lat});
    if (!cur.try_consume(',')) break;
  }
  cur.expect(')');
  cur.expect(')');
  cur.end();
  if (poly.ring.size() < 3)
    throw validation_error("wkt polygon needs at least 3 vertices");
  const LonLat& first = poly.ring.front();
  const LonLat& last = poly.ring.back();
  if (first.lon != last.lon || first.lat != last.lat)
    poly.ring.push_back(first);
  if (poly.ring.size() < 4)
    throw validation_error("wkt polygon needs at least 3 distinct vertices");
  return poly;
}

LonLat wkt_parse_point(const std::string& wkt) {
  WktCursor cur{wkt};
  cur.keyword("POINT");
  cur.expect('(');
  LonLat p;
  p.lon = cur.number();
  p.lat = cur.number();
  cur.expect(')');
  cur.end();
  return p;
}

std::string wkt_write_polygon(const Polygon& poly) {
  std::string out = "POLYGON ((";
  for (std::size_t i = 0; i < poly.ring.size(); ++i) {
    if (i) out += ", ";
    out += format_double(poly.ring[i].lon);
    out += ' ';
    out += format_double(poly.ring[i].lat);
  }
  out += "))";
  return out;
}

std::string wkt_write_point(const LonLat& p) {
  return "POINT (" + format_double(p.lon) + " " + format_double(p.lat) + ")";
}

bool point_in_polygon(const Polygon& poly, double lon, double lat) {
  // Even-odd rule over ring edges (last vertex == first).
  bool inside = false;
  const auto& v = poly.ring;
  for (std::size_t i = 0, n = v.size(); i + 1 < n; ++i) {
    const LonLat& a = v[i];
    const LonLat& b = v[i + 1];
    if ((a.lat > lat) == (b.lat > lat)) continue;
    double x = a.lon + (lat - a.lat) / (b.lat - a.lat) * (b.lon - a.lon);
    if (lon < x) inside = !inside;
  }
  return inside;
}

Mask rasterize_polygon(const GridSpec& spec, const Polygon& poly) {
  Mask out(spec, 0.0);
  for (int r = 0; r < spec.rows; ++r) {
    double lat = spec.cell_center_lat(r);
    for (int c = 0; c < spec.cols; ++c) {
      if (point_in_polygon(poly, spec.cell_center_lon(c), lat))
        out.at(r, c) = 1.0;
    }
  }
  return out;
}

}  // namespace mission
