#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "mission/control_plane.hpp"
#include "mission/data_plane.hpp"
#include "mission/fact_store.hpp"
#include "mission/grid.hpp"
#include "mission/polygon.hpp"

namespace mission {

inline constexpr double kKnotsToKmh = 1.852;

struct AgentSpec {
  std::string id;
  std::string policy_name;
  AgentCapabilities caps;
};

struct ConstraintSpec {
  std::string id;
  ActiveConstraint::Kind kind = ActiveConstraint::Kind::NoGo;
  std::string wkt;
  double attenuation = 1.0;
  std::set<int> applies_in;  // empty = every window
  int buffer_cells = 0;
};

struct PlannerParams {
  int k_max = 20;
  int fanout = 4;
  int pr_radius = 2;
  int min_sep = 3;
  int cooling_radius = 2;
  int m_candidates = 8;
  int footprint_radius = 1;
  int risk_samples = 3;
  double cooling_attenuation = 0.5;
  std::string metrics_policy = "full_kg";
};

struct SstGenParams {
  int bumps = 6;
  double amplitude = 1.5;
  double sigma_cells = 6.0;
  double drift_cells = 1.5;
};

/// Seed-independent bound on max |cell - 4-neighbor mean| of a generated
/// SST field, from the bump count and the tightest bump width.
double sst_smoothness_bound(const SstGenParams& params);

struct PriorGen {
  std::string kind;  // "vertical_band" | "gaussian"
  int col_min = 0, col_max = 0;  // vertical_band
  double row = 0, col = 0, sigma_cells = 3.0;  // gaussian
  double value = 1.0;
};

struct WorldGen {
  bool generate = true;
  SstGenParams sst;
  double current_amplitude = 0.5;       // km/h scale of the gyre
  double current_period_hours = 96.0;
  // File-backed variant (paths relative to the scenario file):
  std::vector<std::string> base_files;     // one GRD per window
  std::vector<std::string> current_stems;  // one .u/.v pair per window
  std::map<std::string, std::string> prior_files;
};

struct Scenario {
  std::string dir;  // directory of the source file, for relative paths
  GridSpec grid;
  std::uint64_t seed = 0;
  double decay_rate = 0.12;
  std::vector<TimeWindow> windows;
  WorldGen world;
  std::map<std::string, PriorGen> prior_gen;
  std::map<std::string, Policy> policies;
  std::vector<AgentSpec> agents;
  std::vector<ConstraintSpec> constraints;
  std::vector<EventSpec> events;  // entity ids filled as ex:event/<id>
  PlannerParams planner;
  std::vector<FactLine> extra_facts;
};

/// Classic time-periodic double-gyre stream-function flow mapped onto the
/// grid bbox (x in [0,2], y in [0,1]); u eastward, v northward, km/h.
/// Divergence-free analytically.
VectorField gen_double_gyre(const GridSpec& spec, double t_hours,
                            double amplitude, double period_hours);

/// Smooth seeded fields: a fixed set of Gaussian bumps whose centers drift
/// linearly across windows.
std::vector<ScalarField> gen_sst_series(const GridSpec& spec, int T,
                                        std::uint64_t seed,
                                        const SstGenParams& params = {});

/// |SST_{t+1} - SST_t| per window, last window repeating the final
/// difference.
std::vector<ScalarField> derive_frontness(const std::vector<ScalarField>& sst);

/// Parses and validates a scenario JSON document. Parse errors carry line
/// numbers; semantic errors name the offending key.
Scenario load_scenario(const std::string& path);

/// Asserts the scenario's declarative layer (windows, policies, agents,
/// constraints, events, layer/field stubs, extra fact lines) into the
/// store. Returns the committed version.
std::int64_t populate_store(const Scenario& scenario, FactStore& store);

/// Entity naming shared by populate_store and the raster registry.
EntityId window_entity(int t);
EntityId policy_entity(const std::string& name);
EntityId agent_entity(const std::string& id);
EntityId capabilities_entity(const std::string& agent_id);
EntityId constraint_entity(const std::string& id);
EntityId event_entity(const std::string& id);
EntityId base_layer_entity(int t);
EntityId prior_entity(const std::string& name);
EntityId current_field_entity(int t);

/// Bulk rasters keyed by entity id; the declarative store carries only the
/// entities.
struct RasterRegistry {
  std::map<std::string, ScalarField> scalars;
  std::map<std::string, VectorField> vectors;

  const ScalarField& scalar(const EntityId& id) const;
  const VectorField& vector(const EntityId& id) const;
};

/// Generates or loads every raster the scenario references.
RasterRegistry build_rasters(const Scenario& scenario);

}  // namespace mission
