#pragma once

#include <optional>
#include <vector>

#include "mission/data_plane.hpp"
#include "mission/grid.hpp"
#include "mission/polygon.hpp"

namespace mission {

struct AgentCapabilities {
  double cruise_speed_kmh = 1.0;
  double max_speed_kmh = 1.0;
  double energy_per_km = 0.0;
  double boost_gain = 0.0;
  double energy_budget = 1.0;
  double travel_budget_hours = 24.0;
};

struct Waypoint {
  int window = 0;
  int id = 0;  // dense per-window index in sampling order
  Cell cell;
  LonLat lonlat;
  double score = 0.0;  // tensor value at cell (already confidence-scaled)
};

struct NavGraph {
  int window = 0;
  std::vector<Waypoint> waypoints;
};

/// Directed transition between waypoint `from` of window t and waypoint
/// `to` of window t+1 (ids index the respective NavGraphs).
struct SeamEdge {
  int id = 0;  // dense per window-pair
  int window_from = 0;
  int from = 0;
  int to = 0;
};

struct EdgeCost {
  double hours = 0.0;
  double energy = 0.0;
  double risk = 0.0;  // fraction of segment samples inside soft regions
  bool feasible = false;
};

struct CellPath {
  std::vector<Cell> cells;
  double hours = 0.0;
  double energy = 0.0;
};

/// Peak extraction over the PR score S = box_convolve(field, pr_radius):
/// repeatedly take the max-S positive-value cell (ties by row, then col),
/// suppress everything closer than min_sep_cells (Chebyshev), stop at k_max
/// or when no positive cell remains. Hard-masked cells carry value 0 and
/// are never picked.
std::vector<Waypoint> sample_waypoints(const MissionTensor& tensor, int k_max,
                                       int pr_radius, int min_sep_cells);

/// Each window-t waypoint connects to its `fanout` nearest window-t+1
/// waypoints by grid distance; ties broken by destination id.
std::vector<SeamEdge> build_seams(const NavGraph& from, const NavGraph& to,
                                  int fanout);

/// Destination-window environment a seam is evaluated against: the move is
/// executed during the target window, so its currents, masks, duration and
/// confidence apply.
struct SeamContext {
  const VectorField* work = nullptr;  // currents, km/h
  const Mask* hard = nullptr;         // 0 inside buffered no_go
  const Mask* soft_region = nullptr;  // 1 inside any soft region
  double window_duration_hours = 24.0;
  double w_next = 1.0;
  int risk_samples = 3;
};

/// Effective-speed floor: an edge whose current-adjusted speed drops to
/// this is infeasible.
inline constexpr double kSpeedFloorKmh = 0.05;

/// Straight-line traversal physics: distance in km over the grid, current
/// sampled at both endpoints and the midpoint and projected on the edge
/// direction, v_eff = cruise + boost_gain * u_hat. Feasible when the hours
/// fit min(window duration, travel budget) and no sampled cell is
/// hard-masked.
EdgeCost edge_cost(const Waypoint& from, const Waypoint& to,
                   const AgentCapabilities& caps, const SeamContext& ctx);

/// lambda-weighted seam score, lower is better. Throws on infeasible input.
double seam_score(const EdgeCost& cost, const Policy& policy, double w_next);

/// Minimum-time 8-connected path under the same v_eff rule, current taken
/// at each move's source cell. Deterministic Dijkstra (ties resolved by
/// linear cell index). nullopt when the goal is unreachable.
std::optional<CellPath> micro_path(const GridSpec& spec,
                                   const VectorField& work, const Mask& hard,
                                   const AgentCapabilities& caps, Cell start,
                                   Cell goal);

}  // namespace mission
