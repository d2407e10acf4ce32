#pragma once

#include <limits>
#include <memory>
#include <mutex>
#include <set>
#include <unordered_map>
#include <vector>

#include "mission/fact.hpp"

namespace mission {

/// Declared object type and valuedness of a predicate. Predicates absent
/// from the schema default to any-typed, multi-valued.
struct PredicateSpec {
  enum class Range { Any, Entity, String, Int, Real, DateTime, Wkt, Json };
  Range range = Range::Any;
  bool single_valued = false;
  // Numeric bounds enforced at assert time (Enforce mode) for Int/Real.
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool has_bounds = false;
};

using SchemaTable = std::unordered_map<std::string, PredicateSpec>;

/// Predicate declarations mirroring the mission vocabulary.
const SchemaTable& default_schema();

struct ShapeCheck {
  EntityId predicate;
  int min_card = 0;
  int max_card = std::numeric_limits<int>::max();
  bool has_range = false;
  double lo = 0, hi = 0;
};

struct ShapeRule {
  std::string name;
  EntityId target_class;
  std::vector<ShapeCheck> checks;
};

/// Class-level integrity rules: window confidence in [0,1], exactly one
/// policy and capabilities node per agent, attenuation in [0,1], event
/// capacity >= 1.
const std::vector<ShapeRule>& default_shape_rules();

struct Violation {
  EntityId entity;
  std::string rule;
  std::string reason;
};

struct StoreData;  // sorted fact vector + s/p/o hash indexes

/// Immutable view of the store at one version. Cheap to copy; safe to share
/// across threads.
class WorldSnapshot {
 public:
  WorldSnapshot() = default;
  WorldSnapshot(std::int64_t version, std::shared_ptr<const StoreData> data);

  std::int64_t version() const { return version_; }
  std::size_t fact_count() const;

  /// Triple-pattern match; unbound positions are nullopt. At least one
  /// position must be bound. Results sorted by (subject, predicate, object).
  std::vector<Fact> query(const std::optional<EntityId>& s,
                          const std::optional<EntityId>& p,
                          const std::optional<Object>& o) const;

  /// All facts with the given subject, sorted.
  std::vector<Fact> about(const EntityId& s) const;

  /// Objects of (s, p, *) in sorted order.
  std::vector<Object> objects(const EntityId& s, const EntityId& p) const;

  /// Single object of a single-valued predicate; nullopt if absent.
  std::optional<Object> object_of(const EntityId& s, const EntityId& p) const;

  /// Convenience literal readers; throw contract_error on kind mismatch,
  /// nullopt when the fact is absent.
  std::optional<double> real_of(const EntityId& s, const EntityId& p) const;
  std::optional<std::int64_t> int_of(const EntityId& s,
                                     const EntityId& p) const;
  std::optional<std::string> string_of(const EntityId& s, const EntityId& p,
                                       LiteralKind kind) const;

  bool has_entity(const EntityId& e) const;

  /// Subjects typed (via ex:type) as the given class, sorted.
  std::vector<EntityId> instances_of(const EntityId& cls) const;

  /// Shape conformance scan. Violations sorted by (entity, rule).
  std::vector<Violation> validate(const std::vector<ShapeRule>& rules) const;

  /// Transitive closure over prov:wasDerivedFrom / prov:wasGeneratedBy /
  /// prov:used, including the artifact itself. Throws on an entity that
  /// appears in no fact or has no provenance edges.
  std::set<EntityId> provenance_trace(const EntityId& artifact) const;

  /// Window indexes known to this snapshot (entities typed ex:TimeWindow
  /// carrying ex:index).
  std::set<int> known_windows() const;

 private:
  std::int64_t version_ = 0;
  std::shared_ptr<const StoreData> data_;
};

struct ChangeRecord {
  enum class Op { Assert, Retract };
  std::int64_t version = 0;
  Op op = Op::Assert;
  Fact fact;
  bool global = false;        // touches every window
  std::set<int> windows;      // meaningful when !global
};

/// Assert-time strictness. Enforce applies the schema's literal bounds;
/// Defer admits out-of-range values so validate() can observe them.
enum class ShapeEnforcement { Enforce, Defer };

/// Versioned typed fact store. Single writer, many concurrent snapshot
/// readers. Every committed batch bumps the version by one and appends one
/// ChangeRecord per changed fact.
class FactStore {
 public:
  FactStore();

  std::int64_t version() const;
  WorldSnapshot snapshot() const;

  /// Commits a batch atomically; returns the new version (unchanged if the
  /// batch is empty or changes nothing). Re-asserting a single-valued
  /// predicate replaces the old value (retract + assert records). Throws
  /// validation_error on type mismatch, bound violation (Enforce), or
  /// duplicate single-valued pairs within the batch; the store is left
  /// untouched.
  std::int64_t assert_facts(const std::vector<Fact>& batch,
                            ShapeEnforcement mode = ShapeEnforcement::Enforce);

  /// Removes exact-match facts atomically; throws if any is absent.
  std::int64_t retract_facts(const std::vector<Fact>& batch);

  /// Commits a parsed fact-file section (assertions and `- ` retractions)
  /// as one batch.
  std::int64_t apply_lines(const std::vector<FactLine>& lines,
                           ShapeEnforcement mode = ShapeEnforcement::Enforce);

  /// Union of touched windows over records with version > since. A global
  /// record expands to every window known at call time. Throws if since
  /// exceeds the current version.
  std::set<int> dirty_windows(std::int64_t since) const;

  std::vector<ChangeRecord> change_log() const;

 private:
  std::int64_t commit(const std::vector<Fact>& to_retract,
                      const std::vector<Fact>& to_assert);

  mutable std::mutex mu_;
  std::int64_t version_ = 0;
  std::shared_ptr<const StoreData> data_;
  std::vector<ChangeRecord> log_;
  const SchemaTable& schema_;
};

}  // namespace mission
