#include "mission/control_plane.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "mission/errors.hpp"

namespace mission {

std::vector<Waypoint> sample_waypoints(const MissionTensor& tensor, int k_max,
                                       int pr_radius, int min_sep_cells) {
  if (k_max < 1) throw contract_error("k_max must be >= 1");
  const GridSpec& spec = tensor.field.spec;
  const ScalarField S = box_convolve(tensor.field, pr_radius);

  std::vector<char> suppressed(spec.cell_count(), 0);
  std::vector<Waypoint> out;
  while (static_cast<int>(out.size()) < k_max) {
    int best_r = -1, best_c = -1;
    double best_s = 0.0;
    for (int r = 0; r < spec.rows; ++r) {
      for (int c = 0; c < spec.cols; ++c) {
        if (suppressed[spec.index(r, c)]) continue;
        if (tensor.field.at(r, c) <= 0.0) continue;
        if (best_r >= 0 && S.at(r, c) <= best_s) continue;
        best_r = r;
        best_c = c;
        best_s = S.at(r, c);
      }
    }
    if (best_r < 0) break;

    Waypoint wp;
    wp.window = tensor.window;
    wp.id = static_cast<int>(out.size());
    wp.cell = {best_r, best_c};
    wp.lonlat = {spec.cell_center_lon(best_c), spec.cell_center_lat(best_r)};
    wp.score = tensor.field.at(best_r, best_c);
    out.push_back(wp);

    const int r0 = std::max(0, best_r - (min_sep_cells - 1));
    const int r1 = std::min(spec.rows - 1, best_r + (min_sep_cells - 1));
    const int c0 = std::max(0, best_c - (min_sep_cells - 1));
    const int c1 = std::min(spec.cols - 1, best_c + (min_sep_cells - 1));
    for (int r = r0; r <= r1; ++r)
      for (int c = c0; c <= c1; ++c) suppressed[spec.index(r, c)] = 1;
  }
  return out;
}

std::vector<SeamEdge> build_seams(const NavGraph& from, const NavGraph& to,
                                  int fanout) {
  if (to.window != from.window + 1)
    throw contract_error("seams connect consecutive windows only");
  if (fanout < 1) throw contract_error("fanout must be >= 1");

  std::vector<SeamEdge> out;
  for (const Waypoint& a : from.waypoints) {
    std::vector<std::pair<long, int>> ranked;  // (squared distance, id)
    for (const Waypoint& b : to.waypoints) {
      long dr = a.cell.row - b.cell.row;
      long dc = a.cell.col - b.cell.col;
      ranked.emplace_back(dr * dr + dc * dc, b.id);
    }
    std::sort(ranked.begin(), ranked.end());
    const int take = std::min<int>(fanout, static_cast<int>(ranked.size()));
    for (int i = 0; i < take; ++i) {
      SeamEdge e;
      e.id = static_cast<int>(out.size());
      e.window_from = from.window;
      e.from = a.id;
      e.to = ranked[i].second;
      out.push_back(e);
    }
  }
  return out;
}

namespace {

Cell sample_cell(const GridSpec& spec, const Cell& a, const Cell& b,
                 double t) {
  double r = a.row + t * (b.row - a.row);
  double c = a.col + t * (b.col - a.col);
  int ri = static_cast<int>(std::llround(r));
  int ci = static_cast<int>(std::llround(c));
  ri = std::clamp(ri, 0, spec.rows - 1);
  ci = std::clamp(ci, 0, spec.cols - 1);
  return {ri, ci};
}

}  // namespace

EdgeCost edge_cost(const Waypoint& from, const Waypoint& to,
                   const AgentCapabilities& caps, const SeamContext& ctx) {
  if (!ctx.work || !ctx.hard || !ctx.soft_region)
    throw contract_error("seam context is incomplete");
  const GridSpec& spec = ctx.work->spec;

  EdgeCost out;
  const double dr = to.cell.row - from.cell.row;
  const double dc = to.cell.col - from.cell.col;
  const double dist_cells = std::hypot(dr, dc);
  const double d = dist_cells * spec.pixel_size_km;

  double v_eff = caps.cruise_speed_kmh;
  if (dist_cells > 0.0) {
    // East = +col, north = -row.
    const double ex = dc / dist_cells;
    const double en = -dr / dist_cells;
    double u_mean = 0.0, v_mean = 0.0;
    for (double t : {0.0, 0.5, 1.0}) {
      Cell s = sample_cell(spec, from.cell, to.cell, t);
      u_mean += ctx.work->u[spec.index(s.row, s.col)];
      v_mean += ctx.work->v[spec.index(s.row, s.col)];
    }
    u_mean /= 3.0;
    v_mean /= 3.0;
    const double u_hat = u_mean * ex + v_mean * en;
    v_eff = caps.cruise_speed_kmh + caps.boost_gain * u_hat;
  }

  if (v_eff <= kSpeedFloorKmh) {
    out.hours = std::numeric_limits<double>::infinity();
    out.energy = std::numeric_limits<double>::infinity();
    out.feasible = false;
    return out;
  }

  out.hours = d / v_eff;
  out.energy = caps.energy_per_km * d * (caps.cruise_speed_kmh / v_eff);

  const int n = std::max(1, ctx.risk_samples);
  int in_soft = 0;
  bool hits_hard = false;
  for (int i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.5 : static_cast<double>(i) / (n - 1);
    Cell s = sample_cell(spec, from.cell, to.cell, t);
    const std::size_t idx = spec.index(s.row, s.col);
    if (ctx.soft_region->data[idx] != 0.0) ++in_soft;
    if (ctx.hard->data[idx] == 0.0) hits_hard = true;
  }
  out.risk = static_cast<double>(in_soft) / n;

  const double budget =
      std::min(ctx.window_duration_hours, caps.travel_budget_hours);
  out.feasible = !hits_hard && out.hours <= budget;
  return out;
}

double seam_score(const EdgeCost& cost, const Policy& policy, double w_next) {
  if (!cost.feasible)
    throw planning_error("seam_score on infeasible edge");
  return policy.lambda_time * cost.hours + policy.lambda_energy * cost.energy +
         policy.lambda_hazard * cost.risk +
         policy.lambda_uncertainty * (1.0 - w_next);
}

std::optional<CellPath> micro_path(const GridSpec& spec,
                                   const VectorField& work, const Mask& hard,
                                   const AgentCapabilities& caps, Cell start,
                                   Cell goal) {
  if (!spec.contains(start.row, start.col) || !spec.contains(goal.row, goal.col))
    throw contract_error("micro_path endpoints off grid");
  if (hard.at(start.row, start.col) == 0.0 || hard.at(goal.row, goal.col) == 0.0)
    throw planning_error("micro_path endpoint inside hard-masked region");

  const std::size_t n = spec.cell_count();
  const std::size_t start_idx = spec.index(start.row, start.col);
  const std::size_t goal_idx = spec.index(goal.row, goal.col);

  std::vector<double> time(n, std::numeric_limits<double>::infinity());
  std::vector<double> energy(n, 0.0);
  std::vector<std::int64_t> prev(n, -1);
  using QItem = std::pair<double, std::size_t>;  // (time, cell index)
  std::priority_queue<QItem, std::vector<QItem>, std::greater<>> queue;
  time[start_idx] = 0.0;
  queue.push({0.0, start_idx});

  static const int kDr[8] = {-1, -1, -1, 0, 0, 1, 1, 1};
  static const int kDc[8] = {-1, 0, 1, -1, 1, -1, 0, 1};

  while (!queue.empty()) {
    auto [t, idx] = queue.top();
    queue.pop();
    if (t > time[idx]) continue;
    if (idx == goal_idx) break;
    const int r = static_cast<int>(idx) / spec.cols;
    const int c = static_cast<int>(idx) % spec.cols;
    const double u_here = work.u[idx];
    const double v_here = work.v[idx];

    for (int k = 0; k < 8; ++k) {
      const int nr = r + kDr[k], nc = c + kDc[k];
      if (!spec.contains(nr, nc)) continue;
      const std::size_t nidx = spec.index(nr, nc);
      if (hard.data[nidx] == 0.0) continue;

      const double step_cells = (kDr[k] != 0 && kDc[k] != 0) ? std::sqrt(2.0) : 1.0;
      const double ex = kDc[k] / step_cells;
      const double en = -kDr[k] / step_cells;
      const double u_hat = u_here * ex + v_here * en;
      const double v_eff = caps.cruise_speed_kmh + caps.boost_gain * u_hat;
      if (v_eff <= kSpeedFloorKmh) continue;

      const double step_km = step_cells * spec.pixel_size_km;
      const double nt = t + step_km / v_eff;
      if (nt < time[nidx]) {
        time[nidx] = nt;
        energy[nidx] = energy[idx] +
                       caps.energy_per_km * step_km *
                           (caps.cruise_speed_kmh / v_eff);
        prev[nidx] = static_cast<std::int64_t>(idx);
        queue.push({nt, nidx});
      }
    }
  }

  if (!std::isfinite(time[goal_idx])) return std::nullopt;

  CellPath path;
  path.hours = time[goal_idx];
  path.energy = energy[goal_idx];
  for (std::int64_t idx = static_cast<std::int64_t>(goal_idx); idx >= 0;
       idx = prev[idx]) {
    path.cells.push_back({static_cast<int>(idx) / spec.cols,
                          static_cast<int>(idx) % spec.cols});
    if (static_cast<std::size_t>(idx) == start_idx) break;
  }
  std::reverse(path.cells.begin(), path.cells.end());
  return path;
}

}  // namespace mission
