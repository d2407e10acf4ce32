#include "mission/coordinator.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mission/errors.hpp"
#include "mission/util.hpp"

namespace mission {

namespace {

struct ClaimState {
  std::map<int, std::vector<Cell>> claimed;          // window -> cells
  std::map<std::string, int> event_used;             // event entity -> uses
  const std::vector<EventSpec>* events = nullptr;
  int min_sep = 1;
  int cooling_radius = 0;

  bool admits(const HorizonPath& path) const {
    for (const Waypoint& node : path.nodes) {
      auto it = claimed.find(node.window);
      if (it == claimed.end()) continue;
      for (const Cell& q : it->second) {
        const int d = chebyshev(node.cell, q);
        if (d < min_sep || d <= cooling_radius) return false;
      }
    }
    std::map<std::string, int> uses;
    for (const Waypoint& node : path.nodes) {
      for (const EventSpec& e : *events) {
        if (!e.active_in(node.window) || !(e.cell == node.cell)) continue;
        ++uses[e.entity.qualified()];
      }
    }
    for (const auto& [id, n] : uses) {
      int prior = 0;
      if (auto it = event_used.find(id); it != event_used.end())
        prior = it->second;
      int capacity = 1;
      for (const EventSpec& e : *events)
        if (e.entity.qualified() == id) capacity = e.capacity;
      if (prior + n > capacity) return false;
    }
    return true;
  }

  void commit(const HorizonPath& path) {
    for (const Waypoint& node : path.nodes) {
      claimed[node.window].push_back(node.cell);
      for (const EventSpec& e : *events)
        if (e.active_in(node.window) && e.cell == node.cell)
          ++event_used[e.entity.qualified()];
    }
  }
};

// Index of the best admissible candidate, or -1. Paths arrive sorted by
// objective descending.
int best_admissible(const CandidateSet& set, const ClaimState& state) {
  for (int i = 0; i < static_cast<int>(set.paths.size()); ++i)
    if (state.admits(set.paths[i])) return i;
  return -1;
}

int scarcity(const CandidateSet& set, const ClaimState& state,
             double best_objective) {
  const double slack = 0.01 * std::fabs(best_objective);
  int count = 0;
  for (const HorizonPath& path : set.paths)
    if (path.objective >= best_objective - slack && state.admits(path))
      ++count;
  return count;
}

}  // namespace

TeamPlan select_team_plan(const std::map<std::string, CandidateSet>& candidates,
                          const std::vector<EventSpec>& events,
                          int min_sep_cells, int cooling_radius,
                          const RestitchFn& restitch) {
  for (const auto& [agent, set] : candidates)
    if (set.paths.empty())
      throw planning_error("agent has no candidate paths: " + agent);

  ClaimState state;
  state.events = &events;
  state.min_sep = min_sep_cells;
  state.cooling_radius = cooling_radius;

  std::map<std::string, CandidateSet> sets = candidates;
  std::set<std::string> remaining;
  for (const auto& [agent, set] : sets) remaining.insert(agent);
  std::set<std::string> restitched;

  TeamPlan plan;
  while (!remaining.empty()) {
    std::string winner;
    int winner_idx = -1;
    double winner_obj = 0.0;
    int winner_scarcity = 0;
    for (const std::string& agent : remaining) {
      const int idx = best_admissible(sets[agent], state);
      if (idx < 0) continue;
      const double obj = sets[agent].paths[idx].objective;
      if (!winner.empty() && obj < winner_obj) continue;
      const int sc = scarcity(sets[agent], state, obj);
      if (!winner.empty() && obj == winner_obj &&
          (sc > winner_scarcity ||
           (sc == winner_scarcity && agent > winner)))
        continue;
      winner = agent;
      winner_idx = idx;
      winner_obj = obj;
      winner_scarcity = sc;
    }

    if (winner.empty()) {
      // Every remaining agent's whole set conflicts: one re-stitch round
      // against the current claims, smallest agent id first.
      std::string target;
      for (const std::string& agent : remaining)
        if (!restitched.count(agent)) {
          target = agent;
          break;
        }
      if (target.empty() || !restitch)
        throw planning_error(
            "deconfliction deadlock: no admissible candidate remains");
      CandidateSet fresh = restitch(target, state.claimed);
      if (fresh.paths.empty())
        throw planning_error("re-stitch produced no candidates for " + target);
      sets[target] = std::move(fresh);
      restitched.insert(target);
      continue;
    }

    const HorizonPath& chosen = sets[winner].paths[winner_idx];
    state.commit(chosen);
    plan.selected[winner] = chosen;
    plan.selection_order.push_back(winner);
    remaining.erase(winner);
  }

  for (const auto& [agent, path] : plan.selected)
    for (const Waypoint& node : path.nodes)
      plan.assignments.push_back({agent, node.window, node});
  std::sort(plan.assignments.begin(), plan.assignments.end(),
            [](const Assignment& a, const Assignment& b) {
              return std::tie(a.agent_id, a.window) <
                     std::tie(b.agent_id, b.window);
            });
  return plan;
}

std::vector<Fact> cooling_overrides(const TeamPlan& plan, const GridSpec& spec,
                                    int cooling_radius, double attenuation) {
  std::vector<Fact> out;
  const double dlon = (spec.lon_max - spec.lon_min) / spec.cols;
  const double dlat = (spec.lat_max - spec.lat_min) / spec.rows;
  const double half_lon = (cooling_radius + 0.5) * dlon;
  const double half_lat = (cooling_radius + 0.5) * dlat;

  for (const Assignment& a : plan.assignments) {
    EntityId ent = ex("cooling/" + a.agent_id + "/w" +
                      std::to_string(a.window));
    const double lon = a.waypoint.lonlat.lon;
    const double lat = a.waypoint.lonlat.lat;
    Polygon box;
    box.ring = {{lon - half_lon, lat - half_lat},
                {lon + half_lon, lat - half_lat},
                {lon + half_lon, lat + half_lat},
                {lon - half_lon, lat + half_lat},
                {lon - half_lon, lat - half_lat}};
    out.push_back(fact(ent, vocab::type, vocab::Constraint));
    out.push_back(fact(ent, vocab::kind, Literal::str("soft")));
    out.push_back(fact(ent, vocab::attenuation, Literal::real(attenuation)));
    out.push_back(fact(ent, vocab::appliesIn, Literal::integer(a.window)));
    out.push_back(fact(ent, vocab::asWKT, Literal::wkt(wkt_write_polygon(box))));
  }
  return out;
}

TeamMetrics team_metrics(const TeamPlan& plan,
                         const std::vector<ScalarField>& reference_tensors,
                         int footprint_radius,
                         const std::vector<Mask>& hard_masks) {
  TeamMetrics out;
  if (plan.assignments.empty()) return out;
  const GridSpec& spec = hard_masks.empty() ? reference_tensors.at(0).spec
                                            : hard_masks.at(0).spec;

  std::vector<char> covered(spec.cell_count(), 0);
  auto stamp = [&](const Cell& cell) {
    const int r0 = std::max(0, cell.row - footprint_radius);
    const int r1 = std::min(spec.rows - 1, cell.row + footprint_radius);
    const int c0 = std::max(0, cell.col - footprint_radius);
    const int c1 = std::min(spec.cols - 1, cell.col + footprint_radius);
    for (int r = r0; r <= r1; ++r)
      for (int c = c0; c <= c1; ++c) covered[spec.index(r, c)] = 1;
  };

  for (const Assignment& a : plan.assignments) {
    const int w = a.window;
    if (w >= 0 && w < static_cast<int>(reference_tensors.size()))
      out.mission_reward +=
          reference_tensors[w].at(a.waypoint.cell.row, a.waypoint.cell.col);
    stamp(a.waypoint.cell);
    if (w >= 0 && w < static_cast<int>(hard_masks.size()) &&
        hard_masks[w].at(a.waypoint.cell.row, a.waypoint.cell.col) == 0.0)
      ++out.hard_violations;
  }

  for (const auto& [agent, paths] : plan.trajectories) {
    for (int seam = 0; seam < static_cast<int>(paths.size()); ++seam) {
      const int dest_window = seam + 1;
      const CellPath& path = paths[seam];
      for (std::size_t i = 0; i < path.cells.size(); ++i) {
        stamp(path.cells[i]);
        // The starting cell belongs to the source window and is already
        // checked via its assignment.
        if (i == 0) continue;
        if (dest_window < static_cast<int>(hard_masks.size()) &&
            hard_masks[dest_window].at(path.cells[i].row, path.cells[i].col) ==
                0.0)
          ++out.hard_violations;
      }
    }
  }

  for (char c : covered) out.unique_coverage += c;
  return out;
}

}  // namespace mission
