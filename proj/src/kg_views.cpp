#include "mission/kg_views.hpp"

#include <algorithm>

#include "json.hpp"
#include "mission/errors.hpp"
#include "mission/polygon.hpp"
#include "mission/util.hpp"

namespace mission {
namespace {

std::string local_after(const EntityId& e, const std::string& prefix) {
  if (e.local.rfind(prefix, 0) == 0) return e.local.substr(prefix.size());
  return e.local;
}

double require_real(const WorldSnapshot& snap, const EntityId& s,
                    const EntityId& p, const char* what) {
  auto v = snap.real_of(s, p);
  if (!v) {
    throw validation_error("missing-field: " + s.qualified() + " has no " +
                           p.qualified() + " (" + what + ")");
  }
  return *v;
}

std::map<std::string, double> parse_weight_map(const WorldSnapshot& snap,
                                               const EntityId& s,
                                               const EntityId& p) {
  std::map<std::string, double> out;
  auto lex = snap.string_of(s, p, LiteralKind::Json);
  if (!lex) return out;
  nlohmann::json j = nlohmann::json::parse(*lex, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw validation_error("malformed-json: " + s.qualified() + " " +
                           p.qualified());
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_number()) {
      throw validation_error("malformed-json: " + s.qualified() + " " +
                             p.qualified() + " value for '" + it.key() +
                             "' is not a number");
    }
    out[it.key()] = it.value().get<double>();
  }
  return out;
}

}  // namespace

std::vector<TimeWindow> read_windows(const WorldSnapshot& snap) {
  std::vector<TimeWindow> out;
  for (const auto& e : snap.instances_of(vocab::TimeWindow)) {
    TimeWindow w;
    auto idx = snap.int_of(e, vocab::index);
    if (!idx) {
      throw validation_error("missing-field: " + e.qualified() +
                             " has no window index");
    }
    w.index = static_cast<int>(*idx);
    if (auto c = snap.real_of(e, vocab::confidence)) w.confidence = *c;
    if (auto d = snap.real_of(e, vocab::durationHours)) w.duration_hours = *d;
    if (auto s = snap.string_of(e, vocab::startTime, LiteralKind::DateTime)) {
      w.start = *s;
    }
    if (!(w.confidence >= 0.0 && w.confidence <= 1.0)) {
      throw validation_error("window-confidence: " + e.qualified() + " = " +
                             format_double(w.confidence) + " outside [0,1]");
    }
    if (!(w.duration_hours > 0.0)) {
      throw validation_error("window-duration: " + e.qualified() +
                             " must be positive");
    }
    out.push_back(std::move(w));
  }
  std::sort(out.begin(), out.end(), [](const TimeWindow& a, const TimeWindow& b) {
    return a.index < b.index;
  });
  for (std::size_t t = 0; t < out.size(); ++t) {
    if (out[t].index != static_cast<int>(t)) {
      throw validation_error("window-indexes: expected contiguous 0.." +
                             std::to_string(out.size() - 1));
    }
  }
  return out;
}

std::map<std::string, PolicyView> read_policies(const WorldSnapshot& snap) {
  std::map<std::string, PolicyView> out;
  for (const auto& e : snap.instances_of(vocab::Policy)) {
    PolicyView v;
    v.entity = e;
    v.policy.name = local_after(e, "policy/");
    v.policy.alpha_base = require_real(snap, e, vocab::alphaBase, "base weight");
    if (auto g = snap.real_of(e, vocab::gammaFront)) v.policy.gamma_front = *g;
    v.policy.lambda_time = require_real(snap, e, vocab::lambdaTime, "seam weight");
    v.policy.lambda_energy =
        require_real(snap, e, vocab::lambdaEnergy, "seam weight");
    v.policy.lambda_hazard =
        require_real(snap, e, vocab::lambdaHazard, "seam weight");
    v.policy.lambda_uncertainty =
        require_real(snap, e, vocab::lambdaUncertainty, "seam weight");
    v.policy.betas = parse_weight_map(snap, e, vocab::priors);
    v.policy.soft_overrides = parse_weight_map(snap, e, vocab::softOverrides);
    out.emplace(v.policy.name, std::move(v));
  }
  return out;
}

std::vector<AgentView> read_agents(const WorldSnapshot& snap) {
  auto policies = read_policies(snap);
  std::vector<AgentView> out;
  for (const auto& e : snap.instances_of(vocab::Agent)) {
    AgentView a;
    a.entity = e;
    a.id = local_after(e, "agent/");
    auto pols = snap.objects(e, vocab::usesPolicy);
    if (pols.size() != 1 || !is_entity(pols[0])) {
      throw validation_error("agent-policy: " + e.qualified() + " uses " +
                             std::to_string(pols.size()) +
                             " policies, expected exactly one");
    }
    a.policy_entity = as_entity(pols[0]);
    auto pit = policies.find(local_after(a.policy_entity, "policy/"));
    if (pit == policies.end()) {
      throw validation_error("agent-policy: " + e.qualified() +
                             " references unknown policy " +
                             a.policy_entity.qualified());
    }
    a.policy = pit->second.policy;
    auto caps = snap.objects(e, vocab::hasCapabilities);
    if (caps.size() != 1 || !is_entity(caps[0])) {
      throw validation_error("agent-capabilities: " + e.qualified() +
                             " must link exactly one capabilities node");
    }
    a.caps_entity = as_entity(caps[0]);
    const EntityId& c = a.caps_entity;
    a.caps.cruise_speed_kmh =
        require_real(snap, c, vocab::cruiseSpeedKmh, "capabilities");
    a.caps.max_speed_kmh =
        require_real(snap, c, vocab::maxSpeedKmh, "capabilities");
    a.caps.energy_per_km =
        require_real(snap, c, vocab::energyPerKm, "capabilities");
    a.caps.boost_gain = require_real(snap, c, vocab::boostGain, "capabilities");
    a.caps.energy_budget =
        require_real(snap, c, vocab::energyBudget, "capabilities");
    a.caps.travel_budget_hours =
        require_real(snap, c, vocab::travelBudgetHours, "capabilities");
    out.push_back(std::move(a));
  }
  std::sort(out.begin(), out.end(),
            [](const AgentView& x, const AgentView& y) { return x.id < y.id; });
  return out;
}

std::vector<ConstraintView> read_constraints(const WorldSnapshot& snap) {
  std::vector<ConstraintView> out;
  for (const auto& e : snap.instances_of(vocab::Constraint)) {
    ConstraintView v;
    v.entity = e;
    v.name = local_after(e, "constraint/");
    auto kind = snap.string_of(e, vocab::kind, LiteralKind::String);
    if (!kind || (*kind != "no_go" && *kind != "soft")) {
      throw validation_error("constraint-kind: " + e.qualified() +
                             " must declare kind no_go or soft");
    }
    v.kind = (*kind == "no_go") ? ActiveConstraint::Kind::NoGo
                                : ActiveConstraint::Kind::Soft;
    auto wkt = snap.string_of(e, vocab::asWKT, LiteralKind::Wkt);
    if (!wkt) {
      throw validation_error("constraint-geometry: " + e.qualified() +
                             " has no region");
    }
    v.wkt = *wkt;
    if (auto a = snap.real_of(e, vocab::attenuation)) v.attenuation = *a;
    if (v.kind == ActiveConstraint::Kind::Soft &&
        !(v.attenuation >= 0.0 && v.attenuation <= 1.0)) {
      throw validation_error("constraint-attenuation: " + e.qualified() +
                             " outside [0,1]");
    }
    if (auto b = snap.int_of(e, vocab::bufferCells)) {
      v.buffer_cells = static_cast<int>(*b);
    }
    for (const auto& o : snap.objects(e, vocab::appliesIn)) {
      if (!is_entity(o) && as_literal(o).kind == LiteralKind::Int) {
        v.applies_in.insert(static_cast<int>(as_literal(o).as_int()));
      }
    }
    out.push_back(std::move(v));
  }
  std::sort(out.begin(), out.end(),
            [](const ConstraintView& a, const ConstraintView& b) {
              return a.entity.qualified() < b.entity.qualified();
            });
  return out;
}

std::vector<EventSpec> read_events(const WorldSnapshot& snap) {
  std::vector<EventSpec> out;
  for (const auto& e : snap.instances_of(vocab::Event)) {
    EventSpec ev;
    ev.entity = e;
    auto w = snap.int_of(e, vocab::forWindow);
    auto r = snap.int_of(e, vocab::row);
    auto c = snap.int_of(e, vocab::col);
    auto val = snap.real_of(e, vocab::value);
    if (!w || !r || !c || !val) {
      throw validation_error("event-fields: " + e.qualified() +
                             " needs forWindow, row, col and value");
    }
    ev.window = static_cast<int>(*w);
    ev.cell = Cell{static_cast<int>(*r), static_cast<int>(*c)};
    ev.value = *val;
    ev.expires_after = ev.window;
    if (auto cap = snap.int_of(e, vocab::capacity)) {
      ev.capacity = static_cast<int>(*cap);
    }
    if (auto x = snap.int_of(e, vocab::expiresAfter)) {
      ev.expires_after = static_cast<int>(*x);
    }
    if (ev.expires_after < ev.window) {
      throw validation_error("event-expiry: " + e.qualified() +
                             " expires before it starts");
    }
    out.push_back(std::move(ev));
  }
  std::sort(out.begin(), out.end(), [](const EventSpec& a, const EventSpec& b) {
    return a.entity.qualified() < b.entity.qualified();
  });
  return out;
}

const Mask& ConstraintRasterCache::region(const ConstraintView& view,
                                          const GridSpec& spec) {
  std::string key = view.entity.qualified();
  key += '\x1f';
  key += view.wkt;
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  Polygon poly = wkt_parse_polygon(view.wkt);
  auto [pos, inserted] = cache_.emplace(key, rasterize_polygon(spec, poly));
  (void)inserted;
  return pos->second;
}

ActiveConstraint activate(const ConstraintView& view, const Mask& region) {
  ActiveConstraint a;
  a.entity = view.entity;
  a.name = view.name;
  a.kind = view.kind;
  a.region = region;
  a.attenuation = view.attenuation;
  a.buffer_cells = view.buffer_cells;
  return a;
}

}  // namespace mission
