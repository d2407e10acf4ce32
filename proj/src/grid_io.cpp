#include "mission/grid_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "mission/errors.hpp"
#include "mission/util.hpp"

namespace mission {
namespace {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms unsupported");

template <class T>
void put_le(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(buf, buf + sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T get_le(const std::string& in, std::size_t off) {
  char buf[sizeof(T)];
  std::memcpy(buf, in.data() + off, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(buf, buf + sizeof(T));
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

constexpr std::size_t kHeaderBytes = 4 + 2 * 4 + 4 * 8;

}  // namespace

std::string grd_encode(const ScalarField& f) {
  std::string out;
  out.reserve(kHeaderBytes + f.data.size() * 4);
  out += "GRD1";
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(f.spec.rows));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(f.spec.cols));
  put_le<double>(out, f.spec.lon_min);
  put_le<double>(out, f.spec.lat_min);
  put_le<double>(out, f.spec.lon_max);
  put_le<double>(out, f.spec.lat_max);
  for (double v : f.data) put_le<float>(out, static_cast<float>(v));
  return out;
}

ScalarField grd_decode(const std::string& bytes, double pixel_size_km) {
  if (bytes.size() < kHeaderBytes || bytes.compare(0, 4, "GRD1") != 0)
    throw io_error("not a GRD1 raster");
  GridSpec spec;
  spec.rows = static_cast<int>(get_le<std::uint32_t>(bytes, 4));
  spec.cols = static_cast<int>(get_le<std::uint32_t>(bytes, 8));
  spec.lon_min = get_le<double>(bytes, 12);
  spec.lat_min = get_le<double>(bytes, 20);
  spec.lon_max = get_le<double>(bytes, 28);
  spec.lat_max = get_le<double>(bytes, 36);
  spec.pixel_size_km = pixel_size_km;
  const std::size_t n = spec.cell_count();
  if (bytes.size() != kHeaderBytes + n * 4)
    throw io_error("GRD1 payload size mismatch: header says " +
                   std::to_string(n) + " cells");
  ScalarField f(spec);
  for (std::size_t i = 0; i < n; ++i)
    f.data[i] = get_le<float>(bytes, kHeaderBytes + i * 4);
  return f;
}

void save_grd(const std::string& path, const ScalarField& f) {
  write_file_atomic(path, grd_encode(f));
}

ScalarField load_grd(const std::string& path, double pixel_size_km) {
  return grd_decode(read_file(path), pixel_size_km);
}

void save_vector_grd(const std::string& stem, const VectorField& f) {
  ScalarField u{f.spec, 0.0}, v{f.spec, 0.0};
  u.data = f.u;
  v.data = f.v;
  save_grd(stem + ".u.grd", u);
  save_grd(stem + ".v.grd", v);
}

VectorField load_vector_grd(const std::string& stem, double pixel_size_km) {
  ScalarField u = load_grd(stem + ".u.grd", pixel_size_km);
  ScalarField v = load_grd(stem + ".v.grd", pixel_size_km);
  if (!(u.spec == v.spec))
    throw io_error("vector raster components disagree on grid shape: " + stem);
  VectorField out(u.spec);
  out.u = std::move(u.data);
  out.v = std::move(v.data);
  return out;
}

std::string to_pgm(const ScalarField& f) {
  std::string out = "P5\n" + std::to_string(f.spec.cols) + " " +
                    std::to_string(f.spec.rows) + "\n255\n";
  out.reserve(out.size() + f.data.size());
  for (double v : f.data) {
    long px = std::llround(v * 255.0);
    if (px < 0) px = 0;
    if (px > 255) px = 255;
    out += static_cast<char>(px);
  }
  return out;
}

std::uint64_t field_hash(const ScalarField& f) {
  std::string payload;
  payload.reserve(f.data.size() * 4);
  for (double v : f.data) put_le<float>(payload, static_cast<float>(v));
  return fnv1a64(payload.data(), payload.size());
}

}  // namespace mission
