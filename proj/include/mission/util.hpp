#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

namespace mission {

// FNV-1a 64-bit. Stable across platforms; used for artifact content hashes.
std::uint64_t fnv1a64(const void* data, std::size_t len,
                      std::uint64_t seed = 14695981039346656037ull);

std::string hex64(std::uint64_t v);

// Shortest round-trip decimal form of a double ("1.5", "0.25", ...).
std::string format_double(double v);

// SplitMix64: tiny deterministic generator for synthetic worlds and seeded
// test instances. Not for cryptography.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0,1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi] inclusive.
  int irange(int lo, int hi) {
    return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
  }
};

// Runs body(0..n-1) on a worker pool. Worker count is capped by the
// MISSION_COMPILER_THREADS environment variable. Results must be written to
// disjoint slots; the schedule never affects output values.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

std::string read_file(const std::string& path);

// Write-temp-then-rename so consumers never observe partial files.
void write_file_atomic(const std::string& path, const std::string& bytes);

}  // namespace mission
