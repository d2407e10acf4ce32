#include <cmath>
#include <random>

#include "doctest.h"
#include "mission/data_plane.hpp"
#include "mission/errors.hpp"
#include "mission/grid_io.hpp"

using namespace mission;

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

Mask rect_region(const GridSpec& g, int r0, int r1, int c0, int c1) {
  Mask m(g, 0.0);
  for (int r = r0; r <= r1; ++r)
    for (int c = c0; c <= c1; ++c) m.at(r, c) = 1.0;
  return m;
}

ActiveConstraint soft(const GridSpec& g, std::string name, double att,
                      int r0, int r1, int c0, int c1) {
  ActiveConstraint c;
  c.entity = ex("constraint/" + name);
  c.name = std::move(name);
  c.kind = ActiveConstraint::Kind::Soft;
  c.region = rect_region(g, r0, r1, c0, c1);
  c.attenuation = att;
  return c;
}

ActiveConstraint no_go(const GridSpec& g, std::string name, int buffer,
                       int r0, int r1, int c0, int c1) {
  ActiveConstraint c;
  c.entity = ex("constraint/" + name);
  c.name = std::move(name);
  c.kind = ActiveConstraint::Kind::NoGo;
  c.region = rect_region(g, r0, r1, c0, c1);
  c.buffer_cells = buffer;
  return c;
}

TensorProvenanceIds prov_ids(const Policy& policy, int window) {
  TensorProvenanceIds ids;
  ids.base_layer = ex("layer/base/w" + std::to_string(window));
  ids.policy = ex("policy/" + policy.name);
  ids.window = ex("window/" + std::to_string(window));
  for (const auto& [name, beta] : policy.betas)
    ids.priors[name] = ex("layer/prior/" + name);
  return ids;
}

/// Literal restatement of the fusion rule, written independently of the
/// production path (scalar loops, no shared helpers beyond the raster type).
ScalarField fusion_oracle(const Policy& policy, const TimeWindow& window,
                          const ScalarField& base,
                          const std::map<std::string, const ScalarField*>& priors,
                          const std::vector<ActiveConstraint>& constraints,
                          const std::vector<EventSpec>& events) {
  const GridSpec& g = base.spec;
  const int rows = g.rows, cols = g.cols;

  auto grad = [&](int r, int c) {
    auto v = [&](int rr, int cc) { return base.at(rr, cc); };
    double dx = c == 0          ? v(r, 1) - v(r, 0)
                : c == cols - 1 ? v(r, cols - 1) - v(r, cols - 2)
                                : (v(r, c + 1) - v(r, c - 1)) / 2.0;
    double dy = r == 0          ? v(1, c) - v(0, c)
                : r == rows - 1 ? v(rows - 1, c) - v(rows - 2, c)
                                : (v(r + 1, c) - v(r - 1, c)) / 2.0;
    return std::hypot(dx, dy);
  };

  ScalarField out(g);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      double v = policy.alpha_base * base.at(r, c);
      for (const auto& [name, beta] : policy.betas)
        if (beta != 0.0) v += beta * priors.at(name)->at(r, c);
      if (policy.gamma_front != 0.0) v += policy.gamma_front * grad(r, c);
      out.at(r, c) = v;
    }
  }
  for (const EventSpec& e : events)
    if (window.index >= e.window && window.index <= e.expires_after)
      out.at(e.cell.row, e.cell.col) += e.value;

  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      double att = 1.0;
      for (const ActiveConstraint& cs : constraints) {
        if (cs.kind != ActiveConstraint::Kind::Soft) continue;
        if (cs.region.at(r, c) == 0.0) continue;
        auto it = policy.soft_overrides.find(cs.name);
        att *= it != policy.soft_overrides.end() ? it->second : cs.attenuation;
      }
      out.at(r, c) *= att;
    }
  }

  double lo = out.data[0], hi = out.data[0];
  for (double v : out.data) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  for (double& v : out.data) v = hi > lo ? (v - lo) / (hi - lo) : 0.0;

  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      bool blocked = false;
      for (const ActiveConstraint& cs : constraints) {
        if (cs.kind != ActiveConstraint::Kind::NoGo) continue;
        for (int rr = 0; rr < rows && !blocked; ++rr)
          for (int cc = 0; cc < cols; ++cc)
            if (cs.region.at(rr, cc) != 0.0 &&
                std::max(std::abs(rr - r), std::abs(cc - c)) <=
                    cs.buffer_cells) {
              blocked = true;
              break;
            }
        if (blocked) break;
      }
      out.at(r, c) = blocked ? 0.0 : out.at(r, c) * window.confidence;
    }
  }
  return out;
}

}  // namespace

TEST_SUITE("data_plane") {

TEST_CASE("confidence decay") {
  CHECK(confidence_decay(0, 0.12) == doctest::Approx(1.0));
  CHECK(confidence_decay(1, 0.12) == doctest::Approx(std::exp(-0.12)));
  CHECK(confidence_decay(6, 0.12) == doctest::Approx(std::exp(-0.72)));
  CHECK(confidence_decay(3, 0.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(confidence_decay(-1, 0.12), MissionError);
  CHECK_THROWS_AS(confidence_decay(0, -0.5), MissionError);
}

TEST_CASE("masks multiply soft attenuations and buffer hard regions") {
  GridSpec g = unit_grid(8, 8);
  Policy policy;
  policy.name = "p";
  std::vector<ActiveConstraint> active = {
      soft(g, "zoneA", 0.5, 0, 4, 0, 4),
      soft(g, "zoneB", 0.4, 2, 6, 2, 6),
      no_go(g, "island", 1, 7, 7, 7, 7),
  };
  auto [hard, soft_mask] = build_masks(active, g, policy);

  CHECK(soft_mask.at(0, 0) == doctest::Approx(0.5));   // zoneA only
  CHECK(soft_mask.at(5, 5) == doctest::Approx(0.4));   // zoneB only
  CHECK(soft_mask.at(3, 3) == doctest::Approx(0.2));   // overlap multiplies
  CHECK(soft_mask.at(0, 7) == doctest::Approx(1.0));

  CHECK(hard.at(7, 7) == 0.0);
  CHECK(hard.at(6, 6) == 0.0);  // one-cell buffer
  CHECK(hard.at(5, 5) == 1.0);
  CHECK(hard.is_binary());

  // A policy override replaces the constraint's own attenuation.
  policy.soft_overrides["zoneB"] = 0.9;
  auto [h2, s2] = build_masks(active, g, policy);
  CHECK(s2.at(5, 5) == doctest::Approx(0.9));
  CHECK(s2.at(3, 3) == doctest::Approx(0.45));

  ActiveConstraint wrong = soft(unit_grid(4, 4), "bad", 0.5, 0, 1, 0, 1);
  CHECK_THROWS_AS(build_masks({wrong}, g, policy), MissionError);
}

TEST_CASE("fusion matches the elementwise oracle on seeded inputs") {
  GridSpec g = unit_grid(12, 16);
  std::mt19937_64 rng(90210);
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  for (int trial = 0; trial < 6; ++trial) {
    ScalarField base(g), corridor(g), nursery(g);
    for (std::size_t i = 0; i < base.data.size(); ++i) {
      base.data[i] = uni(rng);
      corridor.data[i] = uni(rng);
      nursery.data[i] = uni(rng);
    }
    Policy policy;
    policy.name = "trial";
    policy.alpha_base = 0.5 + uni(rng);
    policy.gamma_front = trial % 2 ? 0.0 : 0.8 * uni(rng);
    policy.betas = {{"corridor", uni(rng)}, {"nursery", 0.5 * uni(rng)}};
    policy.soft_overrides = {{"zoneA", 0.25}};

    TimeWindow window;
    window.index = trial % 3;
    window.confidence = confidence_decay(window.index, 0.12);

    std::vector<ActiveConstraint> constraints = {
        soft(g, "zoneA", 0.5, 2, 7, 3, 9),
        soft(g, "zoneB", 0.6, 5, 10, 0, 5),
        no_go(g, "shoal", 1, 0, 1, 12, 14),
    };
    std::vector<EventSpec> events;
    EventSpec e1;
    e1.entity = ex("event/sighting");
    e1.window = 1;
    e1.cell = {6, 6};
    e1.value = 0.7;
    e1.expires_after = 2;
    events.push_back(e1);

    std::map<std::string, const ScalarField*> priors = {
        {"corridor", &corridor}, {"nursery", &nursery}};

    MissionTensor t = compile_mission_tensor(
        "alpha", policy, window, base, priors, constraints, events,
        prov_ids(policy, window.index));
    ScalarField expect =
        fusion_oracle(policy, window, base, priors, constraints, events);

    REQUIRE(t.field.data.size() == expect.data.size());
    for (std::size_t i = 0; i < expect.data.size(); ++i)
      CHECK(t.field.data[i] == doctest::Approx(expect.data[i]).epsilon(1e-9));
    CHECK(t.hash == field_hash(t.field));
  }
}

TEST_CASE("hard cells are exactly zero and the peak hits w_t") {
  GridSpec g = unit_grid(10, 10);
  ScalarField base(g);
  for (int r = 0; r < 10; ++r)
    for (int c = 0; c < 10; ++c) base.at(r, c) = r + 0.1 * c;

  Policy policy;
  policy.name = "plain";
  TimeWindow window;
  window.index = 2;
  window.confidence = confidence_decay(2, 0.12);

  std::vector<ActiveConstraint> constraints = {no_go(g, "box", 2, 4, 5, 4, 5)};
  MissionTensor t =
      compile_mission_tensor("alpha", policy, window, base, {}, constraints,
                             {}, prov_ids(policy, 2));

  for (int r = 0; r < 10; ++r)
    for (int c = 0; c < 10; ++c) {
      const bool blocked = r >= 2 && r <= 7 && c >= 2 && c <= 7;
      if (blocked) CHECK(t.field.at(r, c) == 0.0);
    }
  // The field maximum lives outside the mask here, so normalization puts
  // the peak exactly at the window confidence.
  double peak = 0.0;
  for (double v : t.field.data) peak = std::max(peak, v);
  CHECK(peak == doctest::Approx(window.confidence).epsilon(1e-12));
}

TEST_CASE("soft attenuation only ever lowers pre-normalization value") {
  GridSpec g = unit_grid(9, 9);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  ScalarField base(g);
  for (double& v : base.data) v = uni(rng);

  Policy policy;
  policy.name = "p";
  TimeWindow window;
  window.confidence = 1.0;

  MissionTensor free_field = compile_mission_tensor(
      "a", policy, window, base, {}, {}, {}, prov_ids(policy, 0));
  // With one soft region, the attenuated zone cannot dominate where it was
  // already below the field max; the global max stays on an untouched cell.
  std::vector<ActiveConstraint> cons = {soft(g, "z", 0.3, 0, 3, 0, 3)};
  MissionTensor damped = compile_mission_tensor(
      "a", policy, window, base, {}, cons, {}, prov_ids(policy, 0));

  double free_max = 0, damp_max = 0;
  Cell argmax{0, 0};
  for (int r = 0; r < 9; ++r)
    for (int c = 0; c < 9; ++c) {
      if (free_field.field.at(r, c) > free_max) {
        free_max = free_field.field.at(r, c);
        argmax = {r, c};
      }
      damp_max = std::max(damp_max, damped.field.at(r, c));
    }
  if (argmax.row > 3 || argmax.col > 3) {
    CHECK(damped.field.at(argmax.row, argmax.col) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(damp_max == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("events inject before normalization and only while active") {
  GridSpec g = unit_grid(6, 6);
  ScalarField base(g, 0.5);
  base.at(0, 0) = 1.0;  // breaks the constant field so normalize has a range

  Policy policy;
  policy.name = "p";
  EventSpec e;
  e.entity = ex("event/x");
  e.window = 2;
  e.cell = {3, 3};
  e.value = 5.0;
  e.expires_after = 3;

  auto at_window = [&](int t) {
    TimeWindow w;
    w.index = t;
    w.confidence = 1.0;
    return compile_mission_tensor("a", policy, w, base, {}, {}, {e},
                                  prov_ids(policy, t));
  };

  // Active windows: the event cell dominates after normalization.
  for (int t : {2, 3}) {
    MissionTensor m = at_window(t);
    CHECK(m.field.at(3, 3) == doctest::Approx(1.0));
    CHECK(m.provenance.count(e.entity) == 1);
  }
  // Outside [window, expires_after] the event leaves no trace.
  for (int t : {0, 1, 4}) {
    MissionTensor m = at_window(t);
    CHECK(m.field.at(3, 3) == doctest::Approx(0.0));
    CHECK(m.provenance.count(e.entity) == 0);
  }

  EventSpec off;
  off.entity = ex("event/off");
  off.window = 0;
  off.cell = {99, 0};
  off.expires_after = 0;
  TimeWindow w0;
  CHECK_THROWS_AS(compile_mission_tensor("a", policy, w0, base, {}, {}, {off},
                                         prov_ids(policy, 0)),
                  MissionError);
}

TEST_CASE("tensor hash is deterministic and sensitive to weights") {
  GridSpec g = unit_grid(8, 8);
  ScalarField base(g);
  for (std::size_t i = 0; i < base.data.size(); ++i)
    base.data[i] = std::sin(0.37 * static_cast<double>(i));

  Policy policy;
  policy.name = "p";
  policy.gamma_front = 0.4;
  TimeWindow window;
  window.confidence = 0.9;

  MissionTensor a = compile_mission_tensor("a", policy, window, base, {}, {},
                                           {}, prov_ids(policy, 0));
  MissionTensor b = compile_mission_tensor("a", policy, window, base, {}, {},
                                           {}, prov_ids(policy, 0));
  CHECK(a.hash == b.hash);

  policy.gamma_front = 0.5;
  MissionTensor c = compile_mission_tensor("a", policy, window, base, {}, {},
                                           {}, prov_ids(policy, 0));
  CHECK(c.hash != a.hash);
}

TEST_CASE("provenance lists every input that shaped the tensor") {
  GridSpec g = unit_grid(6, 6);
  ScalarField base(g), corridor(g);
  for (std::size_t i = 0; i < base.data.size(); ++i) {
    base.data[i] = 0.01 * static_cast<double>(i);
    corridor.data[i] = 1.0 - base.data[i];
  }

  Policy policy;
  policy.name = "rich";
  policy.betas = {{"corridor", 0.5}, {"ignored", 0.0}};
  TimeWindow window;
  window.index = 1;

  std::vector<ActiveConstraint> cons = {soft(g, "zone", 0.5, 0, 2, 0, 2)};
  EventSpec e;
  e.entity = ex("event/ping");
  e.window = 1;
  e.cell = {2, 2};
  e.value = 0.3;
  e.expires_after = 1;

  TensorProvenanceIds ids = prov_ids(policy, 1);
  MissionTensor t = compile_mission_tensor(
      "a", policy, window, base, {{"corridor", &corridor}}, cons, {e}, ids);

  CHECK(t.provenance.count(ids.base_layer) == 1);
  CHECK(t.provenance.count(ids.policy) == 1);
  CHECK(t.provenance.count(ids.window) == 1);
  CHECK(t.provenance.count(ex("layer/prior/corridor")) == 1);
  // Zero-weight priors are not inputs.
  CHECK(t.provenance.count(ex("layer/prior/ignored")) == 0);
  CHECK(t.provenance.count(ex("constraint/zone")) == 1);
  CHECK(t.provenance.count(ex("event/ping")) == 1);

  // A referenced prior with no raster is an error, not silence.
  CHECK_THROWS_AS(compile_mission_tensor("a", policy, window, base, {}, cons,
                                         {}, ids),
                  MissionError);
}

}  // TEST_SUITE
