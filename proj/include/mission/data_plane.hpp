#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "mission/fact.hpp"
#include "mission/grid.hpp"

namespace mission {

/// Declarative blending and traversal weights for one named policy.
struct Policy {
  std::string name;
  double alpha_base = 1.0;
  std::map<std::string, double> betas;  // prior-layer name -> weight
  double gamma_front = 0.0;
  double lambda_time = 0.0;
  double lambda_energy = 0.0;
  double lambda_hazard = 0.0;
  double lambda_uncertainty = 0.0;
  // Constraint name -> attenuation replacing the constraint's own value.
  std::map<std::string, double> soft_overrides;
};

struct TimeWindow {
  int index = 0;
  std::string start;  // ISO 8601, informational
  double duration_hours = 24.0;
  double confidence = 1.0;  // w_t
};

/// Constraint already rasterized onto the scenario grid (geometry is
/// window-independent, so the raster is computed once and shared).
struct ActiveConstraint {
  EntityId entity;
  std::string name;
  enum class Kind { NoGo, Soft } kind = Kind::NoGo;
  Mask region;  // 1 inside the polygon, pre-buffer
  double attenuation = 1.0;
  int buffer_cells = 0;
};

struct EventSpec {
  EntityId entity;
  int window = 0;
  Cell cell;
  double value = 0.0;
  int capacity = 1;
  int expires_after = 0;

  bool active_in(int t) const { return t >= window && t <= expires_after; }
};

/// Compiled per-(agent, window) utility raster. Values in [0, w_t]; cells
/// under the hard mask are exactly 0.
struct MissionTensor {
  std::string agent_id;
  int window = 0;
  ScalarField field;
  std::uint64_t hash = 0;
  std::set<EntityId> provenance;
};

/// e^{-rate * t}: window confidence decay.
double confidence_decay(int t, double rate);

/// M_hard: 0 inside buffered no_go regions, 1 elsewhere. M_soft: product of
/// per-constraint attenuation inside each soft region (the policy's
/// soft_overrides replace a constraint's attenuation by name), 1 outside.
std::pair<Mask, Mask> build_masks(const std::vector<ActiveConstraint>& active,
                                  const GridSpec& spec, const Policy& policy);

/// Entity ids recorded in the tensor's provenance set.
struct TensorProvenanceIds {
  EntityId base_layer;
  std::map<std::string, EntityId> priors;  // by prior name
  EntityId policy;
  EntityId window;
};

/// The fusion rule: blend alpha*B + sum_k beta_k*P_k + gamma*|grad B|, add
/// active event values at their cells, attenuate by M_soft, min-max
/// normalize, scale by w_t, zero out under M_hard.
MissionTensor compile_mission_tensor(
    const std::string& agent_id, const Policy& policy, const TimeWindow& window,
    const ScalarField& base,
    const std::map<std::string, const ScalarField*>& priors,
    const std::vector<ActiveConstraint>& constraints,
    const std::vector<EventSpec>& events, const TensorProvenanceIds& ids);

}  // namespace mission
