#include "mission/fact_store.hpp"

#include <algorithm>
#include <map>

#include "mission/errors.hpp"
#include "mission/util.hpp"

namespace mission {

struct StoreData {
  std::vector<Fact> facts;  // sorted by (subject, predicate, object key)
  std::unordered_map<std::string, std::vector<int>> by_s, by_p, by_o;
};

namespace {

std::string fact_key(const Fact& f) {
  return f.subject.qualified() + "\x1f" + f.predicate.qualified() + "\x1f" +
         object_key(f.object);
}

std::shared_ptr<const StoreData> build_data(std::vector<Fact> facts) {
  std::sort(facts.begin(), facts.end(), [](const Fact& a, const Fact& b) {
    return fact_key(a) < fact_key(b);
  });
  auto data = std::make_shared<StoreData>();
  data->facts = std::move(facts);
  for (int i = 0; i < static_cast<int>(data->facts.size()); ++i) {
    const Fact& f = data->facts[i];
    data->by_s[f.subject.qualified()].push_back(i);
    data->by_p[f.predicate.qualified()].push_back(i);
    data->by_o[object_key(f.object)].push_back(i);
  }
  return data;
}

const std::shared_ptr<const StoreData>& empty_data() {
  static const std::shared_ptr<const StoreData> d = build_data({});
  return d;
}

// Facts (s, p, *) in a raw StoreData.
std::vector<const Fact*> sp_facts(const StoreData& d, const EntityId& s,
                                  const EntityId& p) {
  std::vector<const Fact*> out;
  auto it = d.by_s.find(s.qualified());
  if (it == d.by_s.end()) return out;
  for (int i : it->second)
    if (d.facts[i].predicate == p) out.push_back(&d.facts[i]);
  return out;
}

std::optional<std::int64_t> sp_int(const StoreData& d, const EntityId& s,
                                   const EntityId& p) {
  for (const Fact* f : sp_facts(d, s, p))
    if (!is_entity(f->object) &&
        as_literal(f->object).kind == LiteralKind::Int)
      return as_literal(f->object).as_int();
  return std::nullopt;
}

bool typed_as(const StoreData& d, const EntityId& e, const EntityId& cls) {
  for (const Fact* f : sp_facts(d, e, vocab::type))
    if (is_entity(f->object) && as_entity(f->object) == cls) return true;
  return false;
}

std::optional<int> window_index_of(const StoreData& d, const EntityId& e) {
  if (!typed_as(d, e, vocab::TimeWindow)) return std::nullopt;
  if (auto idx = sp_int(d, e, vocab::index))
    return static_cast<int>(*idx);
  return std::nullopt;
}

void add_link_windows(const StoreData& d, const EntityId& e,
                      std::set<int>& ws) {
  for (const Fact* f : sp_facts(d, e, vocab::forWindow))
    if (!is_entity(f->object) &&
        as_literal(f->object).kind == LiteralKind::Int)
      ws.insert(static_cast<int>(as_literal(f->object).as_int()));
  for (const Fact* f : sp_facts(d, e, vocab::appliesIn))
    if (!is_entity(f->object) &&
        as_literal(f->object).kind == LiteralKind::Int)
      ws.insert(static_cast<int>(as_literal(f->object).as_int()));
  auto expires = sp_int(d, e, vocab::expiresAfter);
  if (expires) {
    auto from = sp_int(d, e, vocab::forWindow);
    int hi = static_cast<int>(*expires);
    int lo = from ? static_cast<int>(*from) : hi;
    if (lo > hi) std::swap(lo, hi);
    for (int t = lo; t <= hi; ++t) ws.insert(t);
  }
}

// Windows a changed fact invalidates; consults both the pre- and post-commit
// store so retractions of linking facts still resolve. Empty result means
// the fact is global (touches every window).
std::set<int> derive_windows(const Fact& f, const StoreData& pre,
                             const StoreData& post) {
  std::set<int> ws;
  const bool obj_is_entity = is_entity(f.object);

  // The fact itself links to a window.
  if ((f.predicate == vocab::forWindow || f.predicate == vocab::appliesIn) &&
      !obj_is_entity && as_literal(f.object).kind == LiteralKind::Int) {
    ws.insert(static_cast<int>(as_literal(f.object).as_int()));
  }
  if (f.predicate == vocab::expiresAfter && !obj_is_entity &&
      as_literal(f.object).kind == LiteralKind::Int) {
    int hi = static_cast<int>(as_literal(f.object).as_int());
    int lo = hi;
    for (const StoreData* d : {&pre, &post})
      if (auto from = sp_int(*d, f.subject, vocab::forWindow))
        lo = std::min(lo, static_cast<int>(*from));
    for (int t = std::min(lo, hi); t <= std::max(lo, hi); ++t) ws.insert(t);
  }

  // Window entity participating directly.
  for (const StoreData* d : {&pre, &post}) {
    if (auto idx = window_index_of(*d, f.subject)) ws.insert(*idx);
    if (obj_is_entity)
      if (auto idx = window_index_of(*d, as_entity(f.object))) ws.insert(*idx);
  }
  if (!ws.empty()) return ws;

  // Follow the subject's (and entity object's) window links.
  for (const StoreData* d : {&pre, &post}) {
    add_link_windows(*d, f.subject, ws);
    if (obj_is_entity) add_link_windows(*d, as_entity(f.object), ws);
  }
  return ws;
}

std::string card_text(int lo, int hi) {
  if (hi == std::numeric_limits<int>::max())
    return "[" + std::to_string(lo) + ",*]";
  return "[" + std::to_string(lo) + "," + std::to_string(hi) + "]";
}

std::string range_text(double lo, double hi) {
  std::string hi_text = hi == std::numeric_limits<double>::infinity()
                            ? "*"
                            : format_double(hi);
  return "[" + format_double(lo) + "," + hi_text + "]";
}

}  // namespace

const SchemaTable& default_schema() {
  static const SchemaTable table = [] {
    SchemaTable t;
    using R = PredicateSpec::Range;
    auto decl = [&](const EntityId& p, R range, bool single, double lo = 0,
                    double hi = 0, bool bounded = false) {
      t[p.qualified()] = PredicateSpec{range, single, lo, hi, bounded};
    };
    const double inf = std::numeric_limits<double>::infinity();
    namespace v = vocab;

    decl(v::type, R::Entity, false);
    decl(v::index, R::Int, true, 0, inf, true);
    decl(v::confidence, R::Real, true, 0, 1, true);
    decl(v::startTime, R::DateTime, true);
    decl(v::durationHours, R::Real, true);
    decl(v::forWindow, R::Int, true, 0, inf, true);
    decl(v::appliesIn, R::Int, false, 0, inf, true);
    decl(v::expiresAfter, R::Int, true, 0, inf, true);

    decl(v::asWKT, R::Wkt, true);
    decl(v::kind, R::String, true);
    decl(v::attenuation, R::Real, true, 0, 1, true);
    decl(v::bufferCells, R::Int, true, 0, inf, true);
    decl(v::value, R::Real, true, 0, inf, true);
    decl(v::capacity, R::Int, true, 1, inf, true);

    // usesPolicy is declared multi-valued so a double assignment can exist
    // in the store; the exactly-one rule is a shape check.
    decl(v::usesPolicy, R::Entity, false);
    decl(v::hasCapabilities, R::Entity, true);
    decl(v::cruiseSpeedKmh, R::Real, true, 0, inf, true);
    decl(v::maxSpeedKmh, R::Real, true, 0, inf, true);
    decl(v::energyPerKm, R::Real, true, 0, inf, true);
    decl(v::boostGain, R::Real, true, 0, inf, true);
    decl(v::energyBudget, R::Real, true, 0, inf, true);
    decl(v::travelBudgetHours, R::Real, true, 0, inf, true);
    decl(v::alphaBase, R::Real, true, 0, inf, true);
    decl(v::gammaFront, R::Real, true, 0, inf, true);
    decl(v::lambdaTime, R::Real, true, 0, inf, true);
    decl(v::lambdaEnergy, R::Real, true, 0, inf, true);
    decl(v::lambdaHazard, R::Real, true, 0, inf, true);
    decl(v::lambdaUncertainty, R::Real, true, 0, inf, true);
    decl(v::priors, R::Json, true);
    decl(v::softOverrides, R::Json, true);

    decl(v::forAgent, R::Entity, true);
    decl(v::inGraph, R::Entity, true);
    decl(v::row, R::Int, true, 0, inf, true);
    decl(v::col, R::Int, true, 0, inf, true);
    decl(v::score, R::Real, true, 0, inf, true);
    decl(v::fromWaypoint, R::Entity, true);
    decl(v::toWaypoint, R::Entity, true);
    decl(v::forEdge, R::Entity, true);
    decl(v::costHours, R::Real, true, 0, inf, true);
    decl(v::costEnergy, R::Real, true, 0, inf, true);
    decl(v::costRisk, R::Real, true, 0, 1, true);
    decl(v::feasible, R::Int, true, 0, 1, true);
    decl(v::seamScore, R::Real, true);
    decl(v::worldVersion, R::Int, true, 0, inf, true);
    decl(v::status, R::String, true);
    decl(v::contentHash, R::String, true);

    decl(v::wasDerivedFrom, R::Entity, false);
    decl(v::wasGeneratedBy, R::Entity, true);
    decl(v::used, R::Entity, false);
    return t;
  }();
  return table;
}

const std::vector<ShapeRule>& default_shape_rules() {
  static const std::vector<ShapeRule> rules = [] {
    const double inf = std::numeric_limits<double>::infinity();
    const int many = std::numeric_limits<int>::max();
    std::vector<ShapeRule> r;
    r.push_back({"window-confidence",
                 vocab::TimeWindow,
                 {{vocab::confidence, 1, 1, true, 0, 1},
                  {vocab::index, 1, 1, true, 0, inf}}});
    r.push_back({"agent-single-policy",
                 vocab::Agent,
                 {{vocab::usesPolicy, 1, 1, false, 0, 0},
                  {vocab::hasCapabilities, 1, 1, false, 0, 0}}});
    r.push_back({"constraint-attenuation",
                 vocab::Constraint,
                 {{vocab::attenuation, 0, 1, true, 0, 1},
                  {vocab::asWKT, 1, 1, false, 0, 0}}});
    r.push_back({"event-capacity",
                 vocab::Event,
                 {{vocab::capacity, 0, 1, true, 1, inf},
                  {vocab::value, 0, many, true, 0, inf}}});
    return r;
  }();
  return rules;
}

WorldSnapshot::WorldSnapshot(std::int64_t version,
                             std::shared_ptr<const StoreData> data)
    : version_(version), data_(std::move(data)) {}

std::size_t WorldSnapshot::fact_count() const {
  return data_ ? data_->facts.size() : 0;
}

std::vector<Fact> WorldSnapshot::query(const std::optional<EntityId>& s,
                                       const std::optional<EntityId>& p,
                                       const std::optional<Object>& o) const {
  if (!s && !p && !o)
    throw contract_error("pattern query needs at least one bound position");
  const StoreData& d = data_ ? *data_ : *empty_data();

  const std::vector<int>* candidates = nullptr;
  auto narrow = [&](const std::unordered_map<std::string, std::vector<int>>& idx,
                    const std::string& key) -> bool {
    auto it = idx.find(key);
    if (it == idx.end()) return false;
    if (!candidates || it->second.size() < candidates->size())
      candidates = &it->second;
    return true;
  };
  if (s && !narrow(d.by_s, s->qualified())) return {};
  if (p && !narrow(d.by_p, p->qualified())) return {};
  if (o && !narrow(d.by_o, object_key(*o))) return {};

  std::vector<Fact> out;
  for (int i : *candidates) {
    const Fact& f = d.facts[i];
    if (s && !(f.subject == *s)) continue;
    if (p && !(f.predicate == *p)) continue;
    if (o && !(f.object == *o)) continue;
    out.push_back(f);
  }
  return out;  // candidate indexes ascend, facts pre-sorted
}

std::vector<Fact> WorldSnapshot::about(const EntityId& s) const {
  return query(s, std::nullopt, std::nullopt);
}

std::vector<Object> WorldSnapshot::objects(const EntityId& s,
                                           const EntityId& p) const {
  std::vector<Object> out;
  for (const Fact& f : query(s, p, std::nullopt)) out.push_back(f.object);
  return out;
}

std::optional<Object> WorldSnapshot::object_of(const EntityId& s,
                                               const EntityId& p) const {
  auto objs = objects(s, p);
  if (objs.empty()) return std::nullopt;
  return objs.front();
}

std::optional<double> WorldSnapshot::real_of(const EntityId& s,
                                             const EntityId& p) const {
  auto obj = object_of(s, p);
  if (!obj) return std::nullopt;
  if (is_entity(*obj))
    throw contract_error("expected literal for " + p.qualified() + " of " +
                         s.qualified());
  return as_literal(*obj).as_real();
}

std::optional<std::int64_t> WorldSnapshot::int_of(const EntityId& s,
                                                  const EntityId& p) const {
  auto obj = object_of(s, p);
  if (!obj) return std::nullopt;
  if (is_entity(*obj))
    throw contract_error("expected literal for " + p.qualified() + " of " +
                         s.qualified());
  return as_literal(*obj).as_int();
}

std::optional<std::string> WorldSnapshot::string_of(const EntityId& s,
                                                    const EntityId& p,
                                                    LiteralKind kind) const {
  auto obj = object_of(s, p);
  if (!obj) return std::nullopt;
  if (is_entity(*obj) || as_literal(*obj).kind != kind)
    throw contract_error("expected " +
                         std::string(literal_kind_name(kind)) + " literal for " +
                         p.qualified() + " of " + s.qualified());
  return as_literal(*obj).lexical;
}

bool WorldSnapshot::has_entity(const EntityId& e) const {
  const StoreData& d = data_ ? *data_ : *empty_data();
  if (d.by_s.count(e.qualified())) return true;
  return d.by_o.count("e:" + e.qualified()) > 0;
}

std::vector<EntityId> WorldSnapshot::instances_of(const EntityId& cls) const {
  std::vector<EntityId> out;
  for (const Fact& f : query(std::nullopt, vocab::type, Object{cls}))
    out.push_back(f.subject);
  return out;
}

std::vector<Violation> WorldSnapshot::validate(
    const std::vector<ShapeRule>& rules) const {
  std::vector<Violation> out;
  for (const ShapeRule& rule : rules) {
    for (const EntityId& entity : instances_of(rule.target_class)) {
      for (const ShapeCheck& check : rule.checks) {
        auto objs = objects(entity, check.predicate);
        const int n = static_cast<int>(objs.size());
        if (n < check.min_card || n > check.max_card) {
          out.push_back({entity, rule.name,
                         "cardinality " +
                             card_text(check.min_card, check.max_card) +
                             " violated: " + std::to_string(n) + " values of " +
                             check.predicate.qualified()});
        }
        if (!check.has_range) continue;
        for (const Object& obj : objs) {
          if (is_entity(obj)) continue;
          const Literal& lit = as_literal(obj);
          if (lit.kind != LiteralKind::Int && lit.kind != LiteralKind::Real)
            continue;
          double v = lit.as_real();
          if (v < check.lo || v > check.hi) {
            out.push_back({entity, rule.name,
                           "range " + range_text(check.lo, check.hi) +
                               " violated: " + check.predicate.qualified() +
                               " = " + lit.lexical});
          }
        }
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const Violation& a, const Violation& b) {
    return std::tie(a.entity, a.rule, a.reason) <
           std::tie(b.entity, b.rule, b.reason);
  });
  return out;
}

std::set<EntityId> WorldSnapshot::provenance_trace(
    const EntityId& artifact) const {
  const StoreData& d = data_ ? *data_ : *empty_data();
  if (!has_entity(artifact))
    throw validation_error("unknown entity: " + artifact.qualified());

  auto prov_objects = [&](const EntityId& e) {
    std::vector<EntityId> out;
    for (const Fact* f : sp_facts(d, e, vocab::wasDerivedFrom))
      if (is_entity(f->object)) out.push_back(as_entity(f->object));
    for (const Fact* f : sp_facts(d, e, vocab::wasGeneratedBy))
      if (is_entity(f->object)) out.push_back(as_entity(f->object));
    for (const Fact* f : sp_facts(d, e, vocab::used))
      if (is_entity(f->object)) out.push_back(as_entity(f->object));
    return out;
  };

  if (prov_objects(artifact).empty())
    throw validation_error("entity has no provenance edges: " +
                           artifact.qualified());

  std::set<EntityId> seen{artifact};
  std::vector<EntityId> frontier{artifact};
  while (!frontier.empty()) {
    EntityId e = frontier.back();
    frontier.pop_back();
    for (const EntityId& next : prov_objects(e))
      if (seen.insert(next).second) frontier.push_back(next);
  }
  return seen;
}

std::set<int> WorldSnapshot::known_windows() const {
  const StoreData& d = data_ ? *data_ : *empty_data();
  std::set<int> out;
  for (const EntityId& w : instances_of(vocab::TimeWindow))
    if (auto idx = sp_int(d, w, vocab::index))
      out.insert(static_cast<int>(*idx));
  return out;
}

FactStore::FactStore() : data_(empty_data()), schema_(default_schema()) {}

std::int64_t FactStore::version() const {
  std::lock_guard lock(mu_);
  return version_;
}

WorldSnapshot FactStore::snapshot() const {
  std::lock_guard lock(mu_);
  return WorldSnapshot(version_, data_);
}

namespace {

void check_fact_shape(const Fact& f, const SchemaTable& schema,
                      ShapeEnforcement mode) {
  for (const EntityId* id : {&f.subject, &f.predicate}) {
    if (!valid_namespace(id->ns) || id->local.empty())
      throw validation_error("malformed entity id: " + id->qualified());
  }
  if (is_entity(f.object)) {
    const EntityId& o = as_entity(f.object);
    if (!valid_namespace(o.ns) || o.local.empty())
      throw validation_error("malformed entity id: " + o.qualified());
  }

  auto it = schema.find(f.predicate.qualified());
  if (it == schema.end()) return;
  const PredicateSpec& spec = it->second;
  if (spec.range == PredicateSpec::Range::Any) return;

  auto mismatch = [&](const std::string& got) {
    throw validation_error("type-mismatch: " + f.predicate.qualified() +
                           " expects " + got + " in fact: " + format_fact(f));
  };
  if (spec.range == PredicateSpec::Range::Entity) {
    if (!is_entity(f.object)) mismatch("an entity object");
    return;
  }
  if (is_entity(f.object)) mismatch("a literal object");
  const Literal& lit = as_literal(f.object);
  static const std::pair<PredicateSpec::Range, LiteralKind> kind_map[] = {
      {PredicateSpec::Range::String, LiteralKind::String},
      {PredicateSpec::Range::Int, LiteralKind::Int},
      {PredicateSpec::Range::Real, LiteralKind::Real},
      {PredicateSpec::Range::DateTime, LiteralKind::DateTime},
      {PredicateSpec::Range::Wkt, LiteralKind::Wkt},
      {PredicateSpec::Range::Json, LiteralKind::Json},
  };
  for (auto [range, kind] : kind_map) {
    if (spec.range != range) continue;
    if (lit.kind != kind)
      mismatch(std::string("a ") + literal_kind_name(kind) + " literal");
    break;
  }
  if (mode == ShapeEnforcement::Enforce && spec.has_bounds &&
      (lit.kind == LiteralKind::Int || lit.kind == LiteralKind::Real)) {
    double v = lit.as_real();
    if (v < spec.lo || v > spec.hi)
      throw validation_error(
          "type-mismatch: " + f.predicate.qualified() + " out of range " +
          range_text(spec.lo, spec.hi) + " in fact: " + format_fact(f));
  }
}

}  // namespace

namespace {

void validate_batch(const std::vector<Fact>& asserts, const SchemaTable& schema,
                    ShapeEnforcement mode) {
  std::set<std::string> single_pairs;
  for (const Fact& f : asserts) {
    check_fact_shape(f, schema, mode);
    auto it = schema.find(f.predicate.qualified());
    if (it != schema.end() && it->second.single_valued) {
      std::string pair =
          f.subject.qualified() + "\x1f" + f.predicate.qualified();
      if (!single_pairs.insert(pair).second)
        throw validation_error(
            "duplicate subject/predicate pair for single-valued predicate " +
            f.predicate.qualified() + " on " + f.subject.qualified());
    }
  }
}

}  // namespace

std::int64_t FactStore::assert_facts(const std::vector<Fact>& batch,
                                     ShapeEnforcement mode) {
  std::lock_guard lock(mu_);
  validate_batch(batch, schema_, mode);
  return commit({}, batch);
}

std::int64_t FactStore::retract_facts(const std::vector<Fact>& batch) {
  std::lock_guard lock(mu_);
  return commit(batch, {});
}

std::int64_t FactStore::apply_lines(const std::vector<FactLine>& lines,
                                    ShapeEnforcement mode) {
  std::vector<Fact> retracts, asserts;
  for (const FactLine& fl : lines)
    (fl.retract ? retracts : asserts).push_back(fl.fact);
  std::lock_guard lock(mu_);
  validate_batch(asserts, schema_, mode);
  return commit(retracts, asserts);
}

std::int64_t FactStore::commit(const std::vector<Fact>& to_retract,
                               const std::vector<Fact>& to_assert) {
  // Callers hold mu_ (assert/retract/apply) or are single-threaded setup.
  std::map<std::string, Fact> final_map;
  for (const Fact& f : data_->facts) final_map.emplace(fact_key(f), f);
  const std::map<std::string, Fact> old_map = final_map;

  for (const Fact& f : to_retract) {
    if (final_map.erase(fact_key(f)) == 0)
      throw validation_error("cannot retract absent fact: " + format_fact(f));
  }
  for (const Fact& f : to_assert) {
    auto it = schema_.find(f.predicate.qualified());
    if (it != schema_.end() && it->second.single_valued) {
      // Replace any existing value of a single-valued predicate.
      std::string prefix =
          f.subject.qualified() + "\x1f" + f.predicate.qualified() + "\x1f";
      auto lo = final_map.lower_bound(prefix);
      while (lo != final_map.end() && lo->first.compare(0, prefix.size(),
                                                        prefix) == 0)
        lo = final_map.erase(lo);
    }
    final_map.insert_or_assign(fact_key(f), f);
  }

  std::vector<Fact> removed, added;
  for (const auto& [key, f] : old_map)
    if (!final_map.count(key)) removed.push_back(f);
  for (const auto& [key, f] : final_map)
    if (!old_map.count(key)) added.push_back(f);
  if (removed.empty() && added.empty()) return version_;

  std::vector<Fact> facts;
  facts.reserve(final_map.size());
  for (const auto& [key, f] : final_map) facts.push_back(f);
  auto new_data = build_data(std::move(facts));

  const std::int64_t new_version = version_ + 1;
  for (const Fact& f : removed) {
    ChangeRecord rec{new_version, ChangeRecord::Op::Retract, f, false, {}};
    rec.windows = derive_windows(f, *data_, *new_data);
    rec.global = rec.windows.empty();
    log_.push_back(std::move(rec));
  }
  for (const Fact& f : added) {
    ChangeRecord rec{new_version, ChangeRecord::Op::Assert, f, false, {}};
    rec.windows = derive_windows(f, *data_, *new_data);
    rec.global = rec.windows.empty();
    log_.push_back(std::move(rec));
  }
  data_ = std::move(new_data);
  version_ = new_version;
  return version_;
}

std::set<int> FactStore::dirty_windows(std::int64_t since) const {
  std::lock_guard lock(mu_);
  if (since > version_)
    throw validation_error("version-from-future: " + std::to_string(since) +
                           " > " + std::to_string(version_));
  std::set<int> out;
  bool any_global = false;
  for (const ChangeRecord& rec : log_) {
    if (rec.version <= since) continue;
    if (rec.global)
      any_global = true;
    else
      out.insert(rec.windows.begin(), rec.windows.end());
  }
  if (any_global) {
    auto all = WorldSnapshot(version_, data_).known_windows();
    out.insert(all.begin(), all.end());
  }
  return out;
}

std::vector<ChangeRecord> FactStore::change_log() const {
  std::lock_guard lock(mu_);
  return log_;
}

}  // namespace mission
