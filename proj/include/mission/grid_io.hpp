#pragma once

#include <cstdint>
#include <string>

#include "mission/grid.hpp"

namespace mission {

/// Binary raster container. Layout, all little-endian:
///   bytes 0..3   magic "GRD1"
///   bytes 4..11  u32 rows, u32 cols
///   bytes 12..43 f64 lon_min, lat_min, lon_max, lat_max
///   bytes 44..   rows*cols f32 cell values, row-major from the north row
std::string grd_encode(const ScalarField& f);
ScalarField grd_decode(const std::string& bytes, double pixel_size_km = 1.0);

void save_grd(const std::string& path, const ScalarField& f);
ScalarField load_grd(const std::string& path, double pixel_size_km = 1.0);

/// Vector fields live in two rasters sharing a stem: <stem>.u.grd and
/// <stem>.v.grd.
void save_vector_grd(const std::string& stem, const VectorField& f);
VectorField load_vector_grd(const std::string& stem,
                            double pixel_size_km = 1.0);

/// Binary PGM (P5), one byte per cell: round(value * 255) clamped to [0,255].
std::string to_pgm(const ScalarField& f);

/// FNV-1a 64 over the little-endian f32 payload (what grd_encode writes after
/// the header). Stable across platforms, used for artifact identity.
std::uint64_t field_hash(const ScalarField& f);

}  // namespace mission
