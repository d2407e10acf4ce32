#include "mission/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>

#include "json.hpp"
#include "mission/errors.hpp"
#include "mission/grid_io.hpp"
#include "mission/util.hpp"

namespace mission {

using nlohmann::json;

double sst_smoothness_bound(const SstGenParams& params) {
  // Per bump, |grad| peaks at amplitude * e^{-1/2} / sigma; the tightest
  // generated sigma is 0.7 * sigma_cells and one cell step bounds the
  // neighbor difference by the gradient peak.
  const double sigma_min = 0.7 * params.sigma_cells;
  return params.bumps * params.amplitude * std::exp(-0.5) / sigma_min;
}

VectorField gen_double_gyre(const GridSpec& spec, double t_hours,
                            double amplitude, double period_hours) {
  if (!(amplitude > 0)) throw contract_error("gyre amplitude must be > 0");
  if (!(period_hours > 0)) throw contract_error("gyre period must be > 0");
  constexpr double eps = 0.25;
  const double pi = std::numbers::pi;
  const double omega = 2.0 * pi / period_hours;
  const double a = eps * std::sin(omega * t_hours);
  const double b = 1.0 - 2.0 * eps * std::sin(omega * t_hours);

  VectorField out(spec);
  for (int r = 0; r < spec.rows; ++r) {
    const double y = (spec.cell_center_lat(r) - spec.lat_min) /
                     (spec.lat_max - spec.lat_min);
    for (int c = 0; c < spec.cols; ++c) {
      const double x = 2.0 * (spec.cell_center_lon(c) - spec.lon_min) /
                       (spec.lon_max - spec.lon_min);
      const double f = a * x * x + b * x;
      const double dfdx = 2.0 * a * x + b;
      const std::size_t i = spec.index(r, c);
      out.u[i] = -pi * amplitude * std::sin(pi * f) * std::cos(pi * y);
      out.v[i] = pi * amplitude * std::cos(pi * f) * std::sin(pi * y) * dfdx;
    }
  }
  return out;
}

std::vector<ScalarField> gen_sst_series(const GridSpec& spec, int T,
                                        std::uint64_t seed,
                                        const SstGenParams& params) {
  if (T < 2) throw contract_error("gen_sst_series needs T >= 2");
  struct Bump {
    double r0, c0, dr, dc, amp, sigma;
  };
  SplitMix64 rng(seed);
  std::vector<Bump> bumps;
  for (int b = 0; b < params.bumps; ++b) {
    Bump bump;
    bump.r0 = rng.uniform(0, spec.rows - 1);
    bump.c0 = rng.uniform(0, spec.cols - 1);
    bump.dr = rng.uniform(-params.drift_cells, params.drift_cells);
    bump.dc = rng.uniform(-params.drift_cells, params.drift_cells);
    bump.amp = rng.uniform(0.5, 1.0) * params.amplitude *
               (rng.uniform() < 0.5 ? -1.0 : 1.0);
    bump.sigma = rng.uniform(0.7, 1.3) * params.sigma_cells;
    bumps.push_back(bump);
  }

  std::vector<ScalarField> out;
  for (int t = 0; t < T; ++t) {
    ScalarField field(spec);
    for (const Bump& bump : bumps) {
      const double rc = bump.r0 + t * bump.dr;
      const double cc = bump.c0 + t * bump.dc;
      const double inv = 1.0 / (2.0 * bump.sigma * bump.sigma);
      for (int r = 0; r < spec.rows; ++r) {
        for (int c = 0; c < spec.cols; ++c) {
          const double d2 = (r - rc) * (r - rc) + (c - cc) * (c - cc);
          field.at(r, c) += bump.amp * std::exp(-d2 * inv);
        }
      }
    }
    out.push_back(std::move(field));
  }
  return out;
}

std::vector<ScalarField> derive_frontness(
    const std::vector<ScalarField>& sst) {
  if (sst.size() < 2)
    throw validation_error("frontness needs at least 2 SST fields");
  std::vector<ScalarField> out;
  for (std::size_t t = 0; t + 1 < sst.size(); ++t)
    out.push_back(abs_diff(sst[t + 1], sst[t]));
  out.push_back(out.back());
  return out;
}

EntityId window_entity(int t) { return ex("window/" + std::to_string(t)); }
EntityId policy_entity(const std::string& name) { return ex("policy/" + name); }
EntityId agent_entity(const std::string& id) { return ex("agent/" + id); }
EntityId capabilities_entity(const std::string& agent_id) {
  return ex("caps/" + agent_id);
}
EntityId constraint_entity(const std::string& id) {
  return ex("constraint/" + id);
}
EntityId event_entity(const std::string& id) { return ex("event/" + id); }
EntityId base_layer_entity(int t) {
  return ex("layer/base/w" + std::to_string(t));
}
EntityId prior_entity(const std::string& name) {
  return ex("layer/prior/" + name);
}
EntityId current_field_entity(int t) {
  return ex("field/current/w" + std::to_string(t));
}

namespace {

[[noreturn]] void bad_key(const std::string& where, const std::string& what) {
  throw validation_error("scenario " + where + ": " + what);
}

const json& need(const json& obj, const std::string& key,
                 const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) bad_key(where, "missing key '" + key + "'");
  return *it;
}

double num(const json& v, const std::string& where) {
  if (!v.is_number()) bad_key(where, "expected a number");
  return v.get<double>();
}

int integer(const json& v, const std::string& where) {
  if (!v.is_number_integer()) bad_key(where, "expected an integer");
  return v.get<int>();
}

std::string text(const json& v, const std::string& where) {
  if (!v.is_string()) bad_key(where, "expected a string");
  return v.get<std::string>();
}

double num_or(const json& obj, const std::string& key, double fallback,
              const std::string& where) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : num(*it, where + "." + key);
}

int int_or(const json& obj, const std::string& key, int fallback,
           const std::string& where) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : integer(*it, where + "." + key);
}

Policy parse_policy(const std::string& name, const json& p,
                    const std::string& where) {
  Policy out;
  out.name = name;
  out.alpha_base = num_or(p, "alpha_base", 1.0, where);
  out.gamma_front = num_or(p, "gamma_front", 0.0, where);
  out.lambda_time = num_or(p, "lambda_time", 0.0, where);
  out.lambda_energy = num_or(p, "lambda_energy", 0.0, where);
  out.lambda_hazard = num_or(p, "lambda_hazard", 0.0, where);
  out.lambda_uncertainty = num_or(p, "lambda_uncertainty", 0.0, where);
  if (auto it = p.find("betas"); it != p.end()) {
    if (!it->is_object()) bad_key(where + ".betas", "expected an object");
    for (const auto& [prior, weight] : it->items())
      out.betas[prior] = num(weight, where + ".betas." + prior);
  }
  if (auto it = p.find("soft_overrides"); it != p.end()) {
    if (!it->is_object())
      bad_key(where + ".soft_overrides", "expected an object");
    for (const auto& [cid, att] : it->items())
      out.soft_overrides[cid] = num(att, where + ".soft_overrides." + cid);
  }
  if (out.alpha_base < 0 || out.gamma_front < 0)
    bad_key(where, "alpha_base and gamma_front must be >= 0");
  double weight_sum = out.alpha_base + out.gamma_front;
  for (const auto& [prior, beta] : out.betas) {
    if (beta < 0) bad_key(where, "beta for '" + prior + "' must be >= 0");
    weight_sum += beta;
  }
  if (!(weight_sum > 0))
    bad_key(where, "alpha + sum(beta) + gamma must be positive");
  for (double lam : {out.lambda_time, out.lambda_energy, out.lambda_hazard,
                     out.lambda_uncertainty})
    if (lam < 0) bad_key(where, "lambda weights must be >= 0");
  return out;
}

}  // namespace

Scenario load_scenario(const std::string& path) {
  const std::string body = read_file(path);
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < e.byte && i < body.size(); ++i)
      if (body[i] == '\n') ++line;
    throw validation_error("scenario parse error at " + path + ":" +
                           std::to_string(line) + ": " + e.what());
  }

  Scenario sc;
  sc.dir = std::filesystem::path(path).parent_path().string();

  const json& grid = need(doc, "grid", "grid");
  sc.grid.rows = integer(need(grid, "rows", "grid"), "grid.rows");
  sc.grid.cols = integer(need(grid, "cols", "grid"), "grid.cols");
  const json& bbox = need(grid, "bbox", "grid");
  if (!bbox.is_array() || bbox.size() != 4)
    bad_key("grid.bbox", "expected [lon_min, lat_min, lon_max, lat_max]");
  sc.grid.lon_min = num(bbox[0], "grid.bbox[0]");
  sc.grid.lat_min = num(bbox[1], "grid.bbox[1]");
  sc.grid.lon_max = num(bbox[2], "grid.bbox[2]");
  sc.grid.lat_max = num(bbox[3], "grid.bbox[3]");
  sc.grid.pixel_size_km =
      num(need(grid, "pixel_size_km", "grid"), "grid.pixel_size_km");
  sc.grid.validate();

  if (auto it = doc.find("seed"); it != doc.end()) {
    if (!it->is_number_integer() || it->get<std::int64_t>() < 0)
      bad_key("seed", "expected a non-negative integer");
    sc.seed = it->get<std::uint64_t>();
  }

  const json& windows = need(doc, "windows", "windows");
  const int T = integer(need(windows, "count", "windows"), "windows.count");
  if (T < 1) bad_key("windows.count", "need at least one window");
  sc.decay_rate = num_or(windows, "decay_rate", 0.12, "windows");
  const double duration =
      num_or(windows, "duration_hours", 24.0, "windows");
  if (!(duration > 0)) bad_key("windows.duration_hours", "must be > 0");
  std::string start;
  if (auto it = windows.find("start"); it != windows.end())
    start = text(*it, "windows.start");
  std::vector<double> confidences;
  if (auto it = windows.find("confidences"); it != windows.end()) {
    if (!it->is_array() || static_cast<int>(it->size()) != T)
      bad_key("windows.confidences", "expected an array of length count");
    for (const auto& v : *it)
      confidences.push_back(num(v, "windows.confidences[]"));
  }
  for (int t = 0; t < T; ++t) {
    TimeWindow w;
    w.index = t;
    w.start = start;
    w.duration_hours = duration;
    w.confidence =
        confidences.empty() ? confidence_decay(t, sc.decay_rate)
                            : confidences[static_cast<std::size_t>(t)];
    if (w.confidence < 0 || w.confidence > 1)
      bad_key("windows.confidences", "confidence must lie in [0,1]");
    sc.windows.push_back(std::move(w));
  }

  const json& world = need(doc, "world", "world");
  if (auto gen = world.find("generate"); gen != world.end()) {
    sc.world.generate = true;
    if (auto sst = gen->find("sst"); sst != gen->end()) {
      sc.world.sst.bumps = int_or(*sst, "bumps", 6, "world.generate.sst");
      sc.world.sst.amplitude =
          num_or(*sst, "amplitude", 1.5, "world.generate.sst");
      sc.world.sst.sigma_cells =
          num_or(*sst, "sigma_cells", 6.0, "world.generate.sst");
      sc.world.sst.drift_cells =
          num_or(*sst, "drift_cells", 1.5, "world.generate.sst");
    }
    if (auto cur = gen->find("currents"); cur != gen->end()) {
      sc.world.current_amplitude =
          num_or(*cur, "amplitude", 0.5, "world.generate.currents");
      sc.world.current_period_hours =
          num_or(*cur, "period_hours", 96.0, "world.generate.currents");
    }
  } else if (auto files = world.find("files"); files != world.end()) {
    sc.world.generate = false;
    for (const auto& f : need(*files, "base", "world.files"))
      sc.world.base_files.push_back(text(f, "world.files.base[]"));
    for (const auto& f : need(*files, "currents", "world.files"))
      sc.world.current_stems.push_back(text(f, "world.files.currents[]"));
    if (auto pri = files->find("priors"); pri != files->end())
      for (const auto& [name, file] : pri->items())
        sc.world.prior_files[name] = text(file, "world.files.priors." + name);
    if (static_cast<int>(sc.world.base_files.size()) != T)
      bad_key("world.files.base", "expected one raster per window");
    if (static_cast<int>(sc.world.current_stems.size()) != T)
      bad_key("world.files.currents", "expected one stem per window");
  } else {
    bad_key("world", "expected 'generate' or 'files'");
  }

  if (auto pri = doc.find("priors"); pri != doc.end()) {
    if (!pri->is_object()) bad_key("priors", "expected an object");
    for (const auto& [name, spec] : pri->items()) {
      const std::string where = "priors." + name;
      PriorGen gen;
      gen.kind = text(need(spec, "kind", where), where + ".kind");
      gen.value = num_or(spec, "value", 1.0, where);
      if (gen.kind == "vertical_band") {
        gen.col_min = integer(need(spec, "col_min", where), where + ".col_min");
        gen.col_max = integer(need(spec, "col_max", where), where + ".col_max");
        if (gen.col_min < 0 || gen.col_max >= sc.grid.cols ||
            gen.col_min > gen.col_max)
          bad_key(where, "band columns out of range");
      } else if (gen.kind == "gaussian") {
        gen.row = num(need(spec, "row", where), where + ".row");
        gen.col = num(need(spec, "col", where), where + ".col");
        gen.sigma_cells = num_or(spec, "sigma_cells", 3.0, where);
      } else {
        bad_key(where + ".kind", "expected 'vertical_band' or 'gaussian'");
      }
      sc.prior_gen[name] = gen;
    }
  }

  const json& policies = need(doc, "policies", "policies");
  for (const auto& [name, p] : policies.items())
    sc.policies[name] = parse_policy(name, p, "policies." + name);
  if (sc.policies.empty()) bad_key("policies", "need at least one policy");

  const json& agents = need(doc, "agents", "agents");
  for (const auto& a : agents) {
    const std::string where = "agents[]";
    AgentSpec spec;
    spec.id = text(need(a, "id", where), where + ".id");
    spec.policy_name = text(need(a, "policy", where), where + ".policy");
    if (!sc.policies.count(spec.policy_name))
      bad_key("agents." + spec.id, "unknown policy '" + spec.policy_name + "'");
    const json& caps = need(a, "capabilities", "agents." + spec.id);
    const std::string cw = "agents." + spec.id + ".capabilities";
    spec.caps.cruise_speed_kmh =
        num(need(caps, "cruise_kts", cw), cw + ".cruise_kts") * kKnotsToKmh;
    spec.caps.max_speed_kmh =
        num_or(caps, "max_kts",
               spec.caps.cruise_speed_kmh / kKnotsToKmh, cw) *
        kKnotsToKmh;
    spec.caps.energy_per_km = num_or(caps, "energy_per_km", 1.0, cw);
    spec.caps.boost_gain = num_or(caps, "boost_gain", 0.0, cw);
    spec.caps.energy_budget = num_or(caps, "energy_budget", 1e9, cw);
    spec.caps.travel_budget_hours =
        num_or(caps, "travel_budget_hours", duration, cw);
    if (!(spec.caps.cruise_speed_kmh > 0))
      bad_key(cw, "cruise speed must be > 0");
    if (spec.caps.max_speed_kmh < spec.caps.cruise_speed_kmh)
      bad_key(cw, "max speed must be >= cruise speed");
    sc.agents.push_back(std::move(spec));
  }
  if (sc.agents.empty()) bad_key("agents", "need at least one agent");

  if (auto it = doc.find("constraints"); it != doc.end()) {
    for (const auto& c : *it) {
      ConstraintSpec spec;
      spec.id = text(need(c, "id", "constraints[]"), "constraints[].id");
      const std::string where = "constraints." + spec.id;
      const std::string kind = text(need(c, "kind", where), where + ".kind");
      if (kind == "no_go")
        spec.kind = ActiveConstraint::Kind::NoGo;
      else if (kind == "soft")
        spec.kind = ActiveConstraint::Kind::Soft;
      else
        bad_key(where + ".kind", "expected 'no_go' or 'soft'");
      spec.wkt = text(need(c, "wkt", where), where + ".wkt");
      wkt_parse_polygon(spec.wkt);  // fail fast on malformed geometry
      spec.buffer_cells = int_or(c, "buffer_cells", 0, where);
      if (spec.buffer_cells < 0) bad_key(where, "buffer_cells must be >= 0");
      if (spec.kind == ActiveConstraint::Kind::Soft) {
        spec.attenuation =
            num(need(c, "attenuation", where), where + ".attenuation");
        if (spec.attenuation < 0 || spec.attenuation >= 1)
          bad_key(where + ".attenuation", "soft attenuation must lie in [0,1)");
      }
      if (auto ai = c.find("applies_in"); ai != c.end())
        for (const auto& w : *ai) {
          const int t = integer(w, where + ".applies_in[]");
          if (t < 0 || t >= T) bad_key(where + ".applies_in", "window out of range");
          spec.applies_in.insert(t);
        }
      sc.constraints.push_back(std::move(spec));
    }
  }

  if (auto it = doc.find("events"); it != doc.end()) {
    for (const auto& e : *it) {
      EventSpec spec;
      const std::string id = text(need(e, "id", "events[]"), "events[].id");
      const std::string where = "events." + id;
      spec.entity = event_entity(id);
      spec.window = integer(need(e, "window", where), where + ".window");
      const json& cell = need(e, "cell", where);
      if (!cell.is_array() || cell.size() != 2)
        bad_key(where + ".cell", "expected [row, col]");
      spec.cell = {integer(cell[0], where + ".cell[0]"),
                   integer(cell[1], where + ".cell[1]")};
      if (!sc.grid.contains(spec.cell.row, spec.cell.col))
        bad_key(where + ".cell", "cell outside the grid");
      spec.value = num(need(e, "value", where), where + ".value");
      if (spec.value < 0) bad_key(where + ".value", "must be >= 0");
      spec.capacity = int_or(e, "capacity", 1, where);
      if (spec.capacity < 1) bad_key(where + ".capacity", "must be >= 1");
      spec.expires_after = int_or(e, "expires_after", spec.window, where);
      if (spec.expires_after < spec.window)
        bad_key(where + ".expires_after", "must be >= window");
      if (spec.window < 0 || spec.window >= T)
        bad_key(where + ".window", "window out of range");
      sc.events.push_back(std::move(spec));
    }
  }

  if (auto it = doc.find("planner"); it != doc.end()) {
    const json& p = *it;
    PlannerParams& pp = sc.planner;
    pp.k_max = int_or(p, "k_max", pp.k_max, "planner");
    pp.fanout = int_or(p, "fanout", pp.fanout, "planner");
    pp.pr_radius = int_or(p, "pr_radius", pp.pr_radius, "planner");
    pp.min_sep = int_or(p, "min_sep", pp.min_sep, "planner");
    pp.cooling_radius = int_or(p, "cooling_radius", pp.cooling_radius, "planner");
    pp.m_candidates = int_or(p, "m_candidates", pp.m_candidates, "planner");
    pp.footprint_radius =
        int_or(p, "footprint_radius", pp.footprint_radius, "planner");
    pp.risk_samples = int_or(p, "risk_samples", pp.risk_samples, "planner");
    pp.cooling_attenuation =
        num_or(p, "cooling_attenuation", pp.cooling_attenuation, "planner");
    if (auto mp = p.find("metrics_policy"); mp != p.end())
      pp.metrics_policy = text(*mp, "planner.metrics_policy");
    if (pp.k_max < 1 || pp.fanout < 1 || pp.m_candidates < 1 ||
        pp.pr_radius < 0 || pp.min_sep < 1 || pp.cooling_radius < 0 ||
        pp.footprint_radius < 0 || pp.risk_samples < 1)
      bad_key("planner", "parameter out of range");
    if (pp.cooling_attenuation < 0 || pp.cooling_attenuation >= 1)
      bad_key("planner.cooling_attenuation", "must lie in [0,1)");
  }
  if (!sc.policies.count(sc.planner.metrics_policy))
    bad_key("planner.metrics_policy",
            "unknown policy '" + sc.planner.metrics_policy + "'");

  for (const AgentSpec& a : sc.agents)
    for (const auto& [prior, beta] : sc.policies.at(a.policy_name).betas)
      if (beta > 0 && !sc.prior_gen.count(prior) &&
          !sc.world.prior_files.count(prior))
        bad_key("policies." + a.policy_name,
                "references unknown prior layer '" + prior + "'");

  if (auto it = doc.find("facts"); it != doc.end()) {
    if (!it->is_array()) bad_key("facts", "expected an array of fact lines");
    for (const auto& line : *it) {
      auto parsed = parse_fact_line(text(line, "facts[]"));
      if (parsed) sc.extra_facts.push_back(std::move(*parsed));
    }
  }
  return sc;
}

std::int64_t populate_store(const Scenario& sc, FactStore& store) {
  namespace v = vocab;
  std::vector<Fact> batch;
  auto add = [&](EntityId s, EntityId p, Object o) {
    batch.push_back(fact(std::move(s), std::move(p), std::move(o)));
  };

  for (const TimeWindow& w : sc.windows) {
    EntityId ent = window_entity(w.index);
    add(ent, v::type, v::TimeWindow);
    add(ent, v::index, Literal::integer(w.index));
    add(ent, v::confidence, Literal::real(w.confidence));
    add(ent, v::durationHours, Literal::real(w.duration_hours));
    if (!w.start.empty()) add(ent, v::startTime, Literal::datetime(w.start));

    EntityId layer = base_layer_entity(w.index);
    add(layer, v::type, v::ValueLayer);
    add(layer, v::forWindow, Literal::integer(w.index));

    EntityId field = current_field_entity(w.index);
    add(field, v::type, v::CurrentField);
    add(field, v::forWindow, Literal::integer(w.index));
  }

  for (const auto& [name, p] : sc.policies) {
    EntityId ent = policy_entity(name);
    add(ent, v::type, v::Policy);
    add(ent, v::alphaBase, Literal::real(p.alpha_base));
    add(ent, v::gammaFront, Literal::real(p.gamma_front));
    add(ent, v::lambdaTime, Literal::real(p.lambda_time));
    add(ent, v::lambdaEnergy, Literal::real(p.lambda_energy));
    add(ent, v::lambdaHazard, Literal::real(p.lambda_hazard));
    add(ent, v::lambdaUncertainty, Literal::real(p.lambda_uncertainty));
    json betas = json::object();
    for (const auto& [prior, beta] : p.betas) betas[prior] = beta;
    add(ent, v::priors, Literal::json(betas.dump()));
    json overrides = json::object();
    for (const auto& [cid, att] : p.soft_overrides) overrides[cid] = att;
    add(ent, v::softOverrides, Literal::json(overrides.dump()));
  }

  std::set<std::string> prior_names;
  for (const auto& [name, gen] : sc.prior_gen) prior_names.insert(name);
  for (const auto& [name, file] : sc.world.prior_files)
    prior_names.insert(name);
  for (const std::string& name : prior_names) {
    EntityId ent = prior_entity(name);
    add(ent, v::type, v::PriorLayer);
  }

  for (const AgentSpec& a : sc.agents) {
    EntityId agent = agent_entity(a.id);
    EntityId caps = capabilities_entity(a.id);
    add(agent, v::type, v::Agent);
    add(agent, v::usesPolicy, policy_entity(a.policy_name));
    add(agent, v::hasCapabilities, caps);
    add(caps, v::type, v::AgentCapabilities);
    add(caps, v::cruiseSpeedKmh, Literal::real(a.caps.cruise_speed_kmh));
    add(caps, v::maxSpeedKmh, Literal::real(a.caps.max_speed_kmh));
    add(caps, v::energyPerKm, Literal::real(a.caps.energy_per_km));
    add(caps, v::boostGain, Literal::real(a.caps.boost_gain));
    add(caps, v::energyBudget, Literal::real(a.caps.energy_budget));
    add(caps, v::travelBudgetHours,
        Literal::real(a.caps.travel_budget_hours));
  }

  for (const ConstraintSpec& c : sc.constraints) {
    EntityId ent = constraint_entity(c.id);
    add(ent, v::type, v::Constraint);
    add(ent, v::kind,
        Literal::str(c.kind == ActiveConstraint::Kind::NoGo ? "no_go"
                                                            : "soft"));
    add(ent, v::asWKT, Literal::wkt(c.wkt));
    if (c.kind == ActiveConstraint::Kind::Soft)
      add(ent, v::attenuation, Literal::real(c.attenuation));
    if (c.buffer_cells > 0)
      add(ent, v::bufferCells, Literal::integer(c.buffer_cells));
    for (int t : c.applies_in) add(ent, v::appliesIn, Literal::integer(t));
  }

  for (const EventSpec& e : sc.events) {
    add(e.entity, v::type, v::Event);
    add(e.entity, v::forWindow, Literal::integer(e.window));
    add(e.entity, v::row, Literal::integer(e.cell.row));
    add(e.entity, v::col, Literal::integer(e.cell.col));
    add(e.entity, v::value, Literal::real(e.value));
    add(e.entity, v::capacity, Literal::integer(e.capacity));
    add(e.entity, v::expiresAfter, Literal::integer(e.expires_after));
    add(e.entity, v::asWKT,
        Literal::wkt(wkt_write_point({sc.grid.cell_center_lon(e.cell.col),
                                      sc.grid.cell_center_lat(e.cell.row)})));
  }

  store.assert_facts(batch);
  // Extra facts are staged, not enforced: shape validation reports on them.
  if (!sc.extra_facts.empty())
    store.apply_lines(sc.extra_facts, ShapeEnforcement::Defer);
  return store.version();
}

const ScalarField& RasterRegistry::scalar(const EntityId& id) const {
  auto it = scalars.find(id.qualified());
  if (it == scalars.end())
    throw io_error("no raster registered for " + id.qualified());
  return it->second;
}

const VectorField& RasterRegistry::vector(const EntityId& id) const {
  auto it = vectors.find(id.qualified());
  if (it == vectors.end())
    throw io_error("no vector raster registered for " + id.qualified());
  return it->second;
}

namespace {

std::string resolve(const std::string& dir, const std::string& file) {
  std::filesystem::path p(file);
  if (p.is_absolute() || dir.empty()) return file;
  return (std::filesystem::path(dir) / p).string();
}

ScalarField gen_prior(const GridSpec& spec, const PriorGen& gen) {
  ScalarField out(spec);
  if (gen.kind == "vertical_band") {
    for (int r = 0; r < spec.rows; ++r)
      for (int c = gen.col_min; c <= gen.col_max; ++c)
        out.at(r, c) = gen.value;
  } else {  // gaussian
    const double inv = 1.0 / (2.0 * gen.sigma_cells * gen.sigma_cells);
    for (int r = 0; r < spec.rows; ++r)
      for (int c = 0; c < spec.cols; ++c) {
        const double d2 =
            (r - gen.row) * (r - gen.row) + (c - gen.col) * (c - gen.col);
        out.at(r, c) = gen.value * std::exp(-d2 * inv);
      }
  }
  return out;
}

}  // namespace

RasterRegistry build_rasters(const Scenario& sc) {
  RasterRegistry reg;
  const int T = static_cast<int>(sc.windows.size());

  if (sc.world.generate) {
    // Frontness needs T+1 SST snapshots so every window gets a fresh
    // difference; derive_frontness then repeats none of the early fields.
    auto sst = gen_sst_series(sc.grid, T + 1, sc.seed, sc.world.sst);
    auto base = derive_frontness(sst);
    for (int t = 0; t < T; ++t)
      reg.scalars[base_layer_entity(t).qualified()] = std::move(base[t]);
    for (int t = 0; t < T; ++t) {
      const double mid = (t + 0.5) * sc.windows[t].duration_hours;
      reg.vectors[current_field_entity(t).qualified()] = gen_double_gyre(
          sc.grid, mid, sc.world.current_amplitude,
          sc.world.current_period_hours);
    }
  } else {
    for (int t = 0; t < T; ++t) {
      ScalarField f = load_grd(resolve(sc.dir, sc.world.base_files[t]),
                               sc.grid.pixel_size_km);
      if (!(f.spec.rows == sc.grid.rows && f.spec.cols == sc.grid.cols))
        throw validation_error("raster shape mismatch: " +
                               sc.world.base_files[t]);
      f.spec = sc.grid;
      reg.scalars[base_layer_entity(t).qualified()] = std::move(f);
    }
    for (int t = 0; t < T; ++t) {
      VectorField f = load_vector_grd(
          resolve(sc.dir, sc.world.current_stems[t]), sc.grid.pixel_size_km);
      if (!(f.spec.rows == sc.grid.rows && f.spec.cols == sc.grid.cols))
        throw validation_error("raster shape mismatch: " +
                               sc.world.current_stems[t]);
      f.spec = sc.grid;
      reg.vectors[current_field_entity(t).qualified()] = std::move(f);
    }
  }

  for (const auto& [name, gen] : sc.prior_gen)
    reg.scalars[prior_entity(name).qualified()] = gen_prior(sc.grid, gen);
  for (const auto& [name, file] : sc.world.prior_files) {
    ScalarField f =
        load_grd(resolve(sc.dir, file), sc.grid.pixel_size_km);
    if (!(f.spec.rows == sc.grid.rows && f.spec.cols == sc.grid.cols))
      throw validation_error("raster shape mismatch: " + file);
    f.spec = sc.grid;
    reg.scalars[prior_entity(name).qualified()] = std::move(f);
  }
  return reg;
}

}  // namespace mission
