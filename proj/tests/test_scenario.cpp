#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "doctest.h"
#include "mission/errors.hpp"
#include "mission/grid_io.hpp"
#include "mission/scenario.hpp"
#include "mission/util.hpp"

using namespace mission;
namespace fs = std::filesystem;

namespace {

GridSpec unit_grid(int rows, int cols) {
  GridSpec g;
  g.rows = rows;
  g.cols = cols;
  g.lon_min = 0;
  g.lat_min = 0;
  g.lon_max = cols;
  g.lat_max = rows;
  g.pixel_size_km = 1.0;
  return g;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("mission-test-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int& counter() {
    static int n = 0;
    return n;
  }
  std::string file(const std::string& name, const std::string& body) const {
    const std::string p = (path / name).string();
    write_file_atomic(p, body);
    return p;
  }
};

const char* kMinimalScenario = R"json({
  "grid": {"rows": 16, "cols": 20, "bbox": [-92.0, 24.0, -88.0, 27.2],
           "pixel_size_km": 4.0},
  "seed": 7,
  "windows": {"count": 3, "duration_hours": 24.0, "decay_rate": 0.12},
  "world": {"generate": {"sst": {"bumps": 4, "amplitude": 1.2,
                                 "sigma_cells": 4.0, "drift_cells": 1.0},
                         "currents": {"amplitude": 0.6,
                                      "period_hours": 96.0}}},
  "priors": {"corridor": {"kind": "vertical_band", "col_min": 12,
                          "col_max": 15, "value": 1.0}},
  "policies": {
    "FAST": {"alpha_base": 1.0, "gamma_front": 0.5, "lambda_time": 1.0,
             "lambda_energy": 0.01, "lambda_hazard": 2.0,
             "lambda_uncertainty": 1.0},
    "SAFE": {"alpha_base": 1.0, "lambda_time": 0.5, "lambda_energy": 0.02,
             "lambda_hazard": 5.0, "lambda_uncertainty": 1.5,
             "betas": {"corridor": 0.4},
             "soft_overrides": {"zone": 0.2}}
  },
  "agents": [
    {"id": "alpha", "policy": "FAST",
     "capabilities": {"cruise_kts": 3.0, "max_kts": 4.0,
                      "energy_per_km": 1.0, "boost_gain": 0.8,
                      "energy_budget": 500.0, "travel_budget_hours": 20.0}},
    {"id": "bravo", "policy": "SAFE",
     "capabilities": {"cruise_kts": 2.5}}
  ],
  "constraints": [
    {"id": "land", "kind": "no_go", "buffer_cells": 1,
     "wkt": "POLYGON ((-92.0 26.9, -88.0 26.9, -88.0 27.2, -92.0 27.2, -92.0 26.9))"},
    {"id": "zone", "kind": "soft", "attenuation": 0.4, "applies_in": [1, 2],
     "wkt": "POLYGON ((-90.5 24.8, -89.5 24.8, -89.5 25.6, -90.5 25.6, -90.5 24.8))"}
  ],
  "events": [
    {"id": "ping", "window": 1, "cell": [8, 10], "value": 0.5,
     "capacity": 2, "expires_after": 2}
  ],
  "planner": {"k_max": 8, "fanout": 3, "pr_radius": 1, "min_sep": 2,
              "cooling_radius": 1, "m_candidates": 4,
              "metrics_policy": "FAST"}
})json";

std::string patched(std::string body, const std::string& from,
                    const std::string& to) {
  const auto pos = body.find(from);
  REQUIRE(pos != std::string::npos);
  return body.replace(pos, from.size(), to);
}

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("double gyre stays within its analytic envelope") {
  GridSpec g = unit_grid(12, 24);
  const double A = 0.8, P = 96.0;
  const double pi = std::numbers::pi;
  for (double t : {0.0, 13.0, 48.0, 71.5}) {
    VectorField f = gen_double_gyre(g, t, A, P);
    for (std::size_t i = 0; i < f.u.size(); ++i) {
      CHECK(std::fabs(f.u[i]) <= pi * A + 1e-9);
      // |df/dx| <= 1.5 for the eps = 0.25 stream function.
      CHECK(std::fabs(f.v[i]) <= 1.5 * pi * A + 1e-9);
    }
  }
}

TEST_CASE("double gyre repeats after one period") {
  GridSpec g = unit_grid(10, 20);
  VectorField a = gen_double_gyre(g, 17.0, 0.5, 96.0);
  VectorField b = gen_double_gyre(g, 17.0 + 96.0, 0.5, 96.0);
  for (std::size_t i = 0; i < a.u.size(); ++i) {
    CHECK(a.u[i] == doctest::Approx(b.u[i]).epsilon(1e-9));
    CHECK(a.v[i] == doctest::Approx(b.v[i]).epsilon(1e-9));
  }
}

TEST_CASE("gyre structure: still center row, still center column at t=0") {
  // Odd row count: the middle row sits exactly at y = 1/2 where the
  // eastward component's cos(pi y) factor vanishes.
  GridSpec g = unit_grid(11, 14);
  VectorField f = gen_double_gyre(g, 37.0, 1.0, 96.0);
  for (int c = 0; c < g.cols; ++c)
    CHECK(std::fabs(f.u[g.index(5, c)]) < 1e-9);

  // At t = 0 the gyre is symmetric (f(x) = x), so an odd column count puts
  // x = 1 on the center column where sin(pi x) vanishes too.
  GridSpec g2 = unit_grid(8, 15);
  VectorField f2 = gen_double_gyre(g2, 0.0, 1.0, 96.0);
  for (int r = 0; r < g2.rows; ++r)
    CHECK(std::fabs(f2.u[g2.index(r, 7)]) < 1e-9);

  CHECK_THROWS_AS(gen_double_gyre(g, 0.0, 0.0, 96.0), MissionError);
  CHECK_THROWS_AS(gen_double_gyre(g, 0.0, 1.0, -5.0), MissionError);
}

TEST_CASE("sst series is seeded, distinct across seeds, smooth") {
  GridSpec g = unit_grid(24, 32);
  SstGenParams params;
  params.bumps = 5;
  params.amplitude = 1.4;
  params.sigma_cells = 5.0;
  params.drift_cells = 1.5;

  auto a = gen_sst_series(g, 4, 99, params);
  auto b = gen_sst_series(g, 4, 99, params);
  auto c = gen_sst_series(g, 4, 100, params);
  REQUIRE(a.size() == 4);
  for (int t = 0; t < 4; ++t)
    CHECK(field_hash(a[t]) == field_hash(b[t]));
  bool differs = false;
  for (int t = 0; t < 4 && !differs; ++t)
    differs = field_hash(a[t]) != field_hash(c[t]);
  CHECK(differs);

  // Neighbor steps stay under the analytic gradient bound.
  const double bound = sst_smoothness_bound(params);
  CHECK(bound == doctest::Approx(5 * 1.4 * std::exp(-0.5) / (0.7 * 5.0)));
  double worst = 0.0;
  for (const ScalarField& f : a) {
    for (int r = 0; r < g.rows; ++r)
      for (int col = 0; col < g.cols; ++col) {
        if (r + 1 < g.rows)
          worst = std::max(worst, std::fabs(f.at(r + 1, col) - f.at(r, col)));
        if (col + 1 < g.cols)
          worst = std::max(worst, std::fabs(f.at(r, col + 1) - f.at(r, col)));
      }
  }
  CHECK(worst <= bound);
  CHECK(worst > 0.0);

  CHECK_THROWS_AS(gen_sst_series(g, 1, 99, params), MissionError);
}

TEST_CASE("frontness differences window pairs and repeats the tail") {
  GridSpec g = unit_grid(4, 4);
  std::vector<ScalarField> sst(3, ScalarField(g));
  sst[0].at(1, 1) = 1.0;
  sst[1].at(1, 1) = 3.0;
  sst[2].at(1, 1) = 2.0;
  auto front = derive_frontness(sst);
  REQUIRE(front.size() == 3);
  CHECK(front[0].at(1, 1) == doctest::Approx(2.0));
  CHECK(front[1].at(1, 1) == doctest::Approx(1.0));
  CHECK(front[2].at(1, 1) == doctest::Approx(1.0));  // repeated last diff
  CHECK_THROWS_AS(derive_frontness({sst[0]}), MissionError);
}

TEST_CASE("scenario load fills defaults and converts knots") {
  TempDir dir;
  Scenario sc = load_scenario(dir.file("s.json", kMinimalScenario));

  CHECK(sc.grid.rows == 16);
  CHECK(sc.grid.pixel_size_km == doctest::Approx(4.0));
  CHECK(sc.seed == 7);
  REQUIRE(sc.windows.size() == 3);
  CHECK(sc.windows[0].confidence == doctest::Approx(1.0));
  CHECK(sc.windows[2].confidence == doctest::Approx(std::exp(-0.24)));
  CHECK(sc.windows[1].duration_hours == doctest::Approx(24.0));

  REQUIRE(sc.agents.size() == 2);
  CHECK(sc.agents[0].caps.cruise_speed_kmh == doctest::Approx(3.0 * 1.852));
  CHECK(sc.agents[0].caps.max_speed_kmh == doctest::Approx(4.0 * 1.852));
  CHECK(sc.agents[0].caps.travel_budget_hours == doctest::Approx(20.0));
  // bravo falls back to defaults: budget = window duration, max = cruise.
  CHECK(sc.agents[1].caps.travel_budget_hours == doctest::Approx(24.0));
  CHECK(sc.agents[1].caps.max_speed_kmh ==
        doctest::Approx(sc.agents[1].caps.cruise_speed_kmh));
  CHECK(sc.agents[1].caps.energy_budget == doctest::Approx(1e9));

  CHECK(sc.policies.at("SAFE").betas.at("corridor") == doctest::Approx(0.4));
  CHECK(sc.policies.at("SAFE").soft_overrides.at("zone") ==
        doctest::Approx(0.2));

  REQUIRE(sc.constraints.size() == 2);
  CHECK(sc.constraints[0].kind == ActiveConstraint::Kind::NoGo);
  CHECK(sc.constraints[0].buffer_cells == 1);
  CHECK(sc.constraints[0].applies_in.empty());  // every window
  CHECK(sc.constraints[1].applies_in == std::set<int>{1, 2});

  REQUIRE(sc.events.size() == 1);
  CHECK(sc.events[0].entity == ex("event/ping"));
  CHECK(sc.events[0].cell == Cell{8, 10});
  CHECK(sc.events[0].capacity == 2);
  CHECK(sc.events[0].expires_after == 2);

  CHECK(sc.planner.k_max == 8);
  CHECK(sc.planner.metrics_policy == "FAST");
}

TEST_CASE("scenario errors name the offending key or line") {
  TempDir dir;
  auto load_patched = [&](const std::string& from, const std::string& to) {
    return load_scenario(
        dir.file("bad.json", patched(kMinimalScenario, from, to)));
  };

  CHECK_THROWS_WITH_AS(load_patched("\"rows\": 16", "\"rows\": \"x\""),
                       doctest::Contains("grid.rows"), MissionError);
  CHECK_THROWS_WITH_AS(load_patched("\"count\": 3", "\"count\": 0"),
                       doctest::Contains("windows.count"), MissionError);
  CHECK_THROWS_WITH_AS(load_patched("\"policy\": \"FAST\"",
                                    "\"policy\": \"MISSING\""),
                       doctest::Contains("MISSING"), MissionError);
  CHECK_THROWS_WITH_AS(load_patched("\"attenuation\": 0.4",
                                    "\"attenuation\": 1.0"),
                       doctest::Contains("attenuation"), MissionError);
  CHECK_THROWS_WITH_AS(load_patched("\"cell\": [8, 10]", "\"cell\": [99, 10]"),
                       doctest::Contains("events.ping"), MissionError);
  CHECK_THROWS_WITH_AS(load_patched("\"metrics_policy\": \"FAST\"",
                                    "\"metrics_policy\": \"nope\""),
                       doctest::Contains("metrics_policy"), MissionError);
  // Syntax errors report the file and line.
  const std::string broken = dir.file("broken.json", "{\n  \"grid\": [,]\n}");
  CHECK_THROWS_WITH_AS(load_scenario(broken), doctest::Contains(":2"),
                       MissionError);
  CHECK_THROWS_AS(load_scenario((dir.path / "absent.json").string()),
                  MissionError);
}

TEST_CASE("populate_store asserts a conformant declarative layer") {
  TempDir dir;
  Scenario sc = load_scenario(dir.file("s.json", kMinimalScenario));
  FactStore store;
  populate_store(sc, store);
  WorldSnapshot snap = store.snapshot();

  CHECK(snap.validate(default_shape_rules()).empty());
  CHECK(snap.known_windows() == std::set<int>{0, 1, 2});
  CHECK(snap.real_of(window_entity(1), vocab::confidence) ==
        doctest::Approx(std::exp(-0.12)));
  CHECK(snap.object_of(agent_entity("alpha"), vocab::usesPolicy) ==
        Object{policy_entity("FAST")});
  CHECK(snap.real_of(capabilities_entity("bravo"), vocab::cruiseSpeedKmh) ==
        doctest::Approx(2.5 * 1.852));
  CHECK(snap.string_of(constraint_entity("zone"), vocab::asWKT,
                       LiteralKind::Wkt)
            .has_value());
  CHECK(snap.int_of(event_entity("ping"), vocab::capacity) == 2);
  CHECK(snap.has_entity(base_layer_entity(2)));
  CHECK(snap.has_entity(current_field_entity(0)));
  CHECK(snap.has_entity(prior_entity("corridor")));

  // Policy weight maps round-trip through their JSON literals.
  auto betas = snap.string_of(policy_entity("SAFE"), vocab::priors,
                              LiteralKind::Json);
  REQUIRE(betas.has_value());
  CHECK(betas->find("corridor") != std::string::npos);
}

TEST_CASE("extra facts are staged so validation can flag them") {
  TempDir dir;
  const std::string body = patched(
      kMinimalScenario, "\"planner\":",
      "\"facts\": [\"ex:window/1 ex:confidence \\\"1.5\\\"^^real\"],\n"
      "  \"planner\":");
  Scenario sc = load_scenario(dir.file("s.json", body));
  REQUIRE(sc.extra_facts.size() == 1);

  FactStore store;
  populate_store(sc, store);  // must not throw despite the bad value
  auto violations = store.snapshot().validate(default_shape_rules());
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].entity == window_entity(1));
  CHECK(violations[0].rule == "window-confidence");
}

TEST_CASE("build_rasters generates every referenced layer deterministically") {
  TempDir dir;
  Scenario sc = load_scenario(dir.file("s.json", kMinimalScenario));
  RasterRegistry reg = build_rasters(sc);

  for (int t = 0; t < 3; ++t) {
    CHECK_NOTHROW(reg.scalar(base_layer_entity(t)));
    CHECK_NOTHROW(reg.vector(current_field_entity(t)));
  }
  CHECK_NOTHROW(reg.scalar(prior_entity("corridor")));
  CHECK_THROWS_AS(reg.scalar(ex("layer/none")), MissionError);

  // Base layers are frontness fields: non-negative, not all zero.
  const ScalarField& b0 = reg.scalar(base_layer_entity(0));
  double sum = 0;
  for (double v : b0.data) {
    CHECK(v >= 0.0);
    sum += v;
  }
  CHECK(sum > 0.0);

  // The corridor prior marks its band.
  const ScalarField& corridor = reg.scalar(prior_entity("corridor"));
  CHECK(corridor.at(5, 13) == doctest::Approx(1.0));
  CHECK(corridor.at(5, 5) == doctest::Approx(0.0));

  RasterRegistry again = build_rasters(sc);
  for (int t = 0; t < 3; ++t)
    CHECK(field_hash(reg.scalar(base_layer_entity(t))) ==
          field_hash(again.scalar(base_layer_entity(t))));
}

TEST_CASE("file-backed worlds load the referenced rasters") {
  TempDir dir;
  GridSpec g;
  g.rows = 6;
  g.cols = 8;
  g.lon_min = -92.0;
  g.lat_min = 24.0;
  g.lon_max = -88.0;
  g.lat_max = 27.0;
  g.pixel_size_km = 4.0;

  for (int t = 0; t < 2; ++t) {
    ScalarField base(g, 0.1 * (t + 1));
    base.at(2, 3) = 1.0;
    save_grd((dir.path / ("base" + std::to_string(t) + ".grd")).string(),
             base);
    VectorField cur(g);
    for (double& u : cur.u) u = 0.3 * (t + 1);
    save_vector_grd((dir.path / ("cur" + std::to_string(t))).string(), cur);
  }
  ScalarField prior(g);
  prior.at(1, 1) = 0.7;
  save_grd((dir.path / "prior.grd").string(), prior);

  const char* body = R"({
    "grid": {"rows": 6, "cols": 8, "bbox": [-92.0, 24.0, -88.0, 27.0],
             "pixel_size_km": 4.0},
    "windows": {"count": 2},
    "world": {"files": {"base": ["base0.grd", "base1.grd"],
                        "currents": ["cur0", "cur1"],
                        "priors": {"nursery": "prior.grd"}}},
    "policies": {"only": {"alpha_base": 1.0}},
    "agents": [{"id": "solo", "policy": "only",
                "capabilities": {"cruise_kts": 3.0}}],
    "planner": {"metrics_policy": "only"}
  })";
  Scenario sc = load_scenario(dir.file("s.json", body));
  CHECK(!sc.world.generate);
  RasterRegistry reg = build_rasters(sc);

  CHECK(reg.scalar(base_layer_entity(0)).at(2, 3) == doctest::Approx(1.0));
  CHECK(reg.scalar(base_layer_entity(1)).at(0, 0) == doctest::Approx(0.2));
  CHECK(reg.vector(current_field_entity(1)).u[0] == doctest::Approx(0.6f));
  CHECK(reg.scalar(prior_entity("nursery")).at(1, 1) ==
        doctest::Approx(0.7f));

  // A wrong-shaped raster is rejected by name.
  GridSpec small = g;
  small.rows = 3;
  save_grd((dir.path / "base0.grd").string(), ScalarField(small, 0.5));
  CHECK_THROWS_WITH_AS(build_rasters(sc), doctest::Contains("base0.grd"),
                       MissionError);
}

}  // TEST_SUITE
