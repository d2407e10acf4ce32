#include "mission/data_plane.hpp"

#include <cmath>

#include "mission/errors.hpp"
#include "mission/grid_io.hpp"

namespace mission {

double confidence_decay(int t, double rate) {
  if (t < 0 || rate < 0)
    throw contract_error("confidence_decay needs t >= 0 and rate >= 0");
  return std::exp(-rate * t);
}

std::pair<Mask, Mask> build_masks(const std::vector<ActiveConstraint>& active,
                                  const GridSpec& spec, const Policy& policy) {
  Mask hard(spec, 1.0), soft(spec, 1.0);
  for (const ActiveConstraint& c : active) {
    if (!(c.region.spec == spec))
      throw validation_error("constraint raster shape differs from grid: " +
                             c.name);
    if (c.kind == ActiveConstraint::Kind::NoGo) {
      const Mask buffered =
          c.buffer_cells > 0 ? buffer_mask(c.region, c.buffer_cells) : c.region;
      for (std::size_t i = 0; i < hard.data.size(); ++i)
        if (buffered.data[i] != 0.0) hard.data[i] = 0.0;
    } else {
      double att = c.attenuation;
      auto it = policy.soft_overrides.find(c.name);
      if (it != policy.soft_overrides.end()) att = it->second;
      for (std::size_t i = 0; i < soft.data.size(); ++i)
        if (c.region.data[i] != 0.0) soft.data[i] *= att;
    }
  }
  return {std::move(hard), std::move(soft)};
}

MissionTensor compile_mission_tensor(
    const std::string& agent_id, const Policy& policy, const TimeWindow& window,
    const ScalarField& base,
    const std::map<std::string, const ScalarField*>& priors,
    const std::vector<ActiveConstraint>& constraints,
    const std::vector<EventSpec>& events, const TensorProvenanceIds& ids) {
  const GridSpec& spec = base.spec;

  ScalarField blend(spec);
  for (std::size_t i = 0; i < blend.data.size(); ++i)
    blend.data[i] = policy.alpha_base * base.data[i];

  for (const auto& [name, beta] : policy.betas) {
    if (beta == 0.0) continue;
    auto it = priors.find(name);
    if (it == priors.end() || it->second == nullptr)
      throw validation_error("policy " + policy.name +
                             " references missing prior layer: " + name);
    const ScalarField& prior = *it->second;
    if (!(prior.spec == spec))
      throw validation_error("prior layer shape differs from grid: " + name);
    for (std::size_t i = 0; i < blend.data.size(); ++i)
      blend.data[i] += beta * prior.data[i];
  }

  if (policy.gamma_front != 0.0) {
    ScalarField front = gradient_magnitude(base);
    for (std::size_t i = 0; i < blend.data.size(); ++i)
      blend.data[i] += policy.gamma_front * front.data[i];
  }

  std::vector<const EventSpec*> active_events;
  for (const EventSpec& e : events) {
    if (!e.active_in(window.index)) continue;
    if (!spec.contains(e.cell.row, e.cell.col))
      throw validation_error("event cell off grid: " +
                             e.entity.qualified());
    blend.at(e.cell.row, e.cell.col) += e.value;
    active_events.push_back(&e);
  }

  auto [hard, soft] = build_masks(constraints, spec, policy);
  for (std::size_t i = 0; i < blend.data.size(); ++i)
    blend.data[i] *= soft.data[i];

  MissionTensor out;
  out.agent_id = agent_id;
  out.window = window.index;
  out.field = normalize01(blend);
  for (std::size_t i = 0; i < out.field.data.size(); ++i)
    out.field.data[i] *= window.confidence * hard.data[i];
  out.hash = field_hash(out.field);

  out.provenance.insert(ids.base_layer);
  out.provenance.insert(ids.policy);
  out.provenance.insert(ids.window);
  for (const auto& [name, beta] : policy.betas) {
    if (beta == 0.0) continue;
    auto it = ids.priors.find(name);
    if (it == ids.priors.end())
      throw contract_error("prior id missing for provenance: " + name);
    out.provenance.insert(it->second);
  }
  for (const ActiveConstraint& c : constraints) out.provenance.insert(c.entity);
  for (const EventSpec* e : active_events) out.provenance.insert(e->entity);
  return out;
}

}  // namespace mission
