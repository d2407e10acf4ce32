#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "mission/control_plane.hpp"
#include "mission/data_plane.hpp"
#include "mission/fact_store.hpp"

namespace mission {

/// Typed readers decoding the declarative world from a snapshot. The
/// planner consumes these views, never raw facts, so replans automatically
/// reflect committed updates.

struct PolicyView {
  EntityId entity;
  Policy policy;
};

struct AgentView {
  EntityId entity;
  std::string id;
  EntityId policy_entity;
  Policy policy;
  EntityId caps_entity;
  AgentCapabilities caps;
};

struct ConstraintView {
  EntityId entity;
  std::string name;
  ActiveConstraint::Kind kind = ActiveConstraint::Kind::NoGo;
  std::string wkt;
  double attenuation = 1.0;
  std::set<int> applies_in;  // empty = every window
  int buffer_cells = 0;

  bool active_in(int t) const {
    return applies_in.empty() || applies_in.count(t) > 0;
  }
};

/// Windows sorted by index; throws unless indexes are contiguous from 0 and
/// confidences are in range.
std::vector<TimeWindow> read_windows(const WorldSnapshot& snap);

/// Policies by name (entity local part after "policy/").
std::map<std::string, PolicyView> read_policies(const WorldSnapshot& snap);

/// Agents sorted by id; throws when an agent lacks exactly one policy or a
/// capabilities node.
std::vector<AgentView> read_agents(const WorldSnapshot& snap);

std::vector<ConstraintView> read_constraints(const WorldSnapshot& snap);

std::vector<EventSpec> read_events(const WorldSnapshot& snap);

/// Rasterized constraint regions, memoized by (entity, geometry).
class ConstraintRasterCache {
 public:
  const Mask& region(const ConstraintView& view, const GridSpec& spec);

 private:
  std::map<std::string, Mask> cache_;
};

/// View of a constraint bound to its raster, ready for mask building.
ActiveConstraint activate(const ConstraintView& view, const Mask& region);

}  // namespace mission
