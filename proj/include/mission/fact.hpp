#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace mission {

/// Namespaced identifier, e.g. {ex, Agent/alpha} printed "ex:Agent/alpha".
/// Namespaces are fixed: ex (mission vocabulary), prov (provenance),
/// time, geo.
struct EntityId {
  std::string ns;
  std::string local;

  std::string qualified() const { return ns + ":" + local; }
  bool operator==(const EntityId&) const = default;
  auto operator<=>(const EntityId&) const = default;
};

bool valid_namespace(const std::string& ns);

/// Shorthand constructors for the common namespaces.
inline EntityId ex(std::string local) { return {"ex", std::move(local)}; }
inline EntityId prov(std::string local) { return {"prov", std::move(local)}; }
inline EntityId geo(std::string local) { return {"geo", std::move(local)}; }

enum class LiteralKind { String, Int, Real, DateTime, Wkt, Json };

const char* literal_kind_name(LiteralKind k);

/// Typed literal with a canonical lexical form. Reals are formatted with
/// shortest round-trip notation so equal doubles compare equal as text.
struct Literal {
  LiteralKind kind = LiteralKind::String;
  std::string lexical;

  static Literal str(std::string s);
  static Literal integer(std::int64_t v);
  static Literal real(double v);
  static Literal datetime(std::string iso8601);
  static Literal wkt(std::string text);
  static Literal json(std::string text);

  std::int64_t as_int() const;   // Int only
  double as_real() const;        // Real or Int

  bool operator==(const Literal&) const = default;
  auto operator<=>(const Literal&) const = default;
};

using Object = std::variant<EntityId, Literal>;

inline bool is_entity(const Object& o) {
  return std::holds_alternative<EntityId>(o);
}
inline const EntityId& as_entity(const Object& o) {
  return std::get<EntityId>(o);
}
inline const Literal& as_literal(const Object& o) {
  return std::get<Literal>(o);
}

/// Total-order key used for deterministic sorting and the object index.
std::string object_key(const Object& o);

struct Fact {
  EntityId subject;
  EntityId predicate;
  Object object;

  bool operator==(const Fact&) const = default;
};

Fact fact(EntityId s, EntityId p, Object o);

/// Text form: `subject predicate object`, object either an id token or a
/// quoted literal with a `^^kind` suffix (plain quotes for strings).
std::string format_object(const Object& o);
std::string format_fact(const Fact& f);

struct FactLine {
  bool retract = false;  // lines prefixed "- "
  Fact fact;
};

/// Parses one line; nullopt for blanks and `#` comments. Throws
/// validation_error on malformed input.
std::optional<FactLine> parse_fact_line(const std::string& line);

/// Parses a whole document; error messages carry 1-based line numbers.
std::vector<FactLine> parse_fact_lines(const std::string& text);

/// Predicate and class vocabulary shared by every plane.
namespace vocab {

inline const EntityId type = {"ex", "type"};

// classes
inline const EntityId TimeWindow = {"ex", "TimeWindow"};
inline const EntityId Agent = {"ex", "Agent"};
inline const EntityId Policy = {"ex", "Policy"};
inline const EntityId Constraint = {"ex", "Constraint"};
inline const EntityId Event = {"ex", "Event"};
inline const EntityId ValueLayer = {"ex", "ValueLayer"};
inline const EntityId PriorLayer = {"ex", "PriorLayer"};
inline const EntityId CurrentField = {"ex", "CurrentField"};
inline const EntityId TensorArtifact = {"ex", "TensorArtifact"};
inline const EntityId NavGraph = {"ex", "NavGraph"};
inline const EntityId Waypoint = {"ex", "Waypoint"};
inline const EntityId TraverseEdge = {"ex", "TraverseEdge"};
inline const EntityId EdgeCost = {"ex", "EdgeCost"};
inline const EntityId PlanRun = {"ex", "PlanRun"};
inline const EntityId Assignment = {"ex", "Assignment"};
inline const EntityId AgentCapabilities = {"ex", "AgentCapabilities"};

// window / temporal
inline const EntityId index = {"ex", "index"};
inline const EntityId confidence = {"ex", "confidence"};
inline const EntityId startTime = {"ex", "startTime"};
inline const EntityId durationHours = {"ex", "durationHours"};
inline const EntityId forWindow = {"ex", "forWindow"};
inline const EntityId appliesIn = {"ex", "appliesIn"};
inline const EntityId expiresAfter = {"ex", "expiresAfter"};

// geometry / constraints / events
inline const EntityId asWKT = {"geo", "asWKT"};
inline const EntityId kind = {"ex", "kind"};
inline const EntityId attenuation = {"ex", "attenuation"};
inline const EntityId bufferCells = {"ex", "bufferCells"};
inline const EntityId value = {"ex", "value"};
inline const EntityId capacity = {"ex", "capacity"};

// agents / policies
inline const EntityId usesPolicy = {"ex", "usesPolicy"};
inline const EntityId hasCapabilities = {"ex", "hasCapabilities"};
inline const EntityId cruiseSpeedKmh = {"ex", "cruiseSpeedKmh"};
inline const EntityId maxSpeedKmh = {"ex", "maxSpeedKmh"};
inline const EntityId energyPerKm = {"ex", "energyPerKm"};
inline const EntityId boostGain = {"ex", "boostGain"};
inline const EntityId energyBudget = {"ex", "energyBudget"};
inline const EntityId travelBudgetHours = {"ex", "travelBudgetHours"};
inline const EntityId alphaBase = {"ex", "alphaBase"};
inline const EntityId gammaFront = {"ex", "gammaFront"};
inline const EntityId lambdaTime = {"ex", "lambdaTime"};
inline const EntityId lambdaEnergy = {"ex", "lambdaEnergy"};
inline const EntityId lambdaHazard = {"ex", "lambdaHazard"};
inline const EntityId lambdaUncertainty = {"ex", "lambdaUncertainty"};
inline const EntityId priors = {"ex", "priors"};
inline const EntityId softOverrides = {"ex", "softOverrides"};

// planner artifacts
inline const EntityId forAgent = {"ex", "forAgent"};
inline const EntityId inGraph = {"ex", "inGraph"};
inline const EntityId row = {"ex", "row"};
inline const EntityId col = {"ex", "col"};
inline const EntityId score = {"ex", "score"};
inline const EntityId fromWaypoint = {"ex", "fromWaypoint"};
inline const EntityId toWaypoint = {"ex", "toWaypoint"};
inline const EntityId forEdge = {"ex", "forEdge"};
inline const EntityId costHours = {"ex", "costHours"};
inline const EntityId costEnergy = {"ex", "costEnergy"};
inline const EntityId costRisk = {"ex", "costRisk"};
inline const EntityId feasible = {"ex", "feasible"};
inline const EntityId seamScore = {"ex", "seamScore"};
inline const EntityId worldVersion = {"ex", "worldVersion"};
inline const EntityId status = {"ex", "status"};
inline const EntityId contentHash = {"ex", "contentHash"};

// provenance
inline const EntityId wasDerivedFrom = {"prov", "wasDerivedFrom"};
inline const EntityId wasGeneratedBy = {"prov", "wasGeneratedBy"};
inline const EntityId used = {"prov", "used"};

}  // namespace vocab

}  // namespace mission
