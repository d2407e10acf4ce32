#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mission/control_plane.hpp"
#include "mission/fact.hpp"

namespace mission {

/// One stitched end-to-end chain for one agent: a waypoint per window.
struct HorizonPath {
  std::string agent_id;
  std::vector<Waypoint> nodes;
  double total_value = 0.0;
  double total_seam_cost = 0.0;
  double objective = 0.0;  // total_value - total_seam_cost
};

/// Top-M chains for one agent, objective descending.
struct CandidateSet {
  std::string agent_id;
  std::vector<HorizonPath> paths;
};

struct Assignment {
  std::string agent_id;
  int window = 0;
  Waypoint waypoint;
};

struct TeamPlan {
  std::map<std::string, HorizonPath> selected;  // by agent
  std::vector<Assignment> assignments;          // sorted (agent, window)
  std::vector<std::string> selection_order;
  // Realized per-seam micro-paths, filled by the pipeline after selection.
  std::map<std::string, std::vector<CellPath>> trajectories;
};

struct TeamMetrics {
  double mission_reward = 0.0;
  std::int64_t unique_coverage = 0;
  int hard_violations = 0;
};

/// Fallback used when every candidate of an agent conflicts with earlier
/// claims: re-stitch the agent against the claimed cells (per window) and
/// return a fresh candidate set.
using RestitchFn = std::function<CandidateSet(
    const std::string& agent_id, const std::map<int, std::vector<Cell>>&)>;

/// Greedy deconflicted selection. Repeatedly commits the feasible candidate
/// with the highest objective across unassigned agents; a candidate is
/// infeasible when any of its nodes lands closer than min_sep_cells
/// (Chebyshev) to a same-window claimed cell, within cooling_radius of one,
/// or would exceed an event's remaining capacity. Objective ties go to the
/// scarcer agent (fewer remaining feasible candidates within 1% of its
/// best), then to the smaller agent id. Agents whose whole set conflicts get
/// one re-stitch round via `restitch`; failure after that throws
/// planning_error.
TeamPlan select_team_plan(const std::map<std::string, CandidateSet>& candidates,
                          const std::vector<EventSpec>& events,
                          int min_sep_cells, int cooling_radius,
                          const RestitchFn& restitch = nullptr);

/// Soft-constraint facts attenuating a Chebyshev disk around every claimed
/// cell in its window, for the next compile cycle.
std::vector<Fact> cooling_overrides(const TeamPlan& plan, const GridSpec& spec,
                                    int cooling_radius, double attenuation);

/// Mission reward sums the agent-independent reference tensor value at each
/// assignment cell; coverage counts the union of Chebyshev footprint disks
/// around every realized path cell; violations count path cells inside the
/// window's hard mask.
TeamMetrics team_metrics(const TeamPlan& plan,
                         const std::vector<ScalarField>& reference_tensors,
                         int footprint_radius,
                         const std::vector<Mask>& hard_masks);

}  // namespace mission
