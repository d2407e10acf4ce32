#include "mission/replan.hpp"

#include <chrono>

#include "mission/errors.hpp"

namespace mission {

MissionSession::MissionSession(Scenario scenario)
    : scenario_(std::move(scenario)),
      rasters_(build_rasters(scenario_)),
      engine_(scenario_.grid, scenario_.planner, &rasters_) {
  populate_store(scenario_, store_);
  baseline_ = store_.version();
}

const PlanResult& MissionSession::last() const {
  if (!last_) throw contract_error("no plan has been produced yet");
  return *last_;
}

void MissionSession::write_back(const PlanResult& result) {
  store_.apply_lines(engine_.artifact_lines(store_.snapshot()));
  store_.assert_facts(engine_.plan_facts(store_.snapshot(), result));
  baseline_ = store_.version();
}

PlanResult MissionSession::plan() {
  PlanResult result = engine_.run(store_.snapshot());
  write_back(result);
  last_ = result;
  return result;
}

std::pair<std::int64_t, std::set<int>> MissionSession::apply_update(
    const std::vector<FactLine>& lines) {
  const std::int64_t v = store_.apply_lines(lines);
  return {v, store_.dirty_windows(baseline_)};
}

std::optional<CommittedPrefix> MissionSession::build_prefix(
    int committed_through) const {
  if (committed_through < 0) return std::nullopt;
  if (!last_) throw contract_error("cannot commit a prefix before planning");
  CommittedPrefix prefix;
  prefix.through = committed_through;
  for (const auto& [id, path] : last_->plan.selected) {
    if (static_cast<int>(path.nodes.size()) <= committed_through)
      throw contract_error("committed prefix exceeds the planned horizon");
    auto& nodes = prefix.nodes[id];
    nodes.assign(path.nodes.begin(),
                 path.nodes.begin() + committed_through + 1);
  }
  return prefix;
}

std::pair<PlanResult, ReplanReport> MissionSession::replan(
    int committed_through) {
  ReplanReport report;
  report.from_version = baseline_;
  report.dirty = store_.dirty_windows(baseline_);
  for (const ChangeRecord& rec : store_.change_log())
    if (rec.version > baseline_) ++report.changed_facts;
  if (!report.dirty.empty() && committed_through >= *report.dirty.begin()) {
    throw validation_error(
        "committed-through window " + std::to_string(committed_through) +
        " is not clean: window " + std::to_string(*report.dirty.begin()) +
        " changed");
  }

  const auto prefix = build_prefix(committed_through);
  const TeamPlan before = last_ ? last_->plan : TeamPlan{};

  const auto t0 = std::chrono::steady_clock::now();
  PlanResult result = engine_.run(store_.snapshot(), &report.dirty,
                                  prefix ? &*prefix : nullptr);
  const auto t1 = std::chrono::steady_clock::now();
  report.incremental_ms =
      std::chrono::duration<double, std::milli>(t1 - t0).count();
  report.tensors_recompiled = result.tensors_recompiled;
  report.tensors_reused = result.tensors_reused;
  report.counters = result.counters;
  report.to_version = result.world_version;

  for (const Assignment& a : result.plan.assignments) {
    const Waypoint* old = nullptr;
    for (const Assignment& b : before.assignments) {
      if (b.agent_id == a.agent_id && b.window == a.window) {
        old = &b.waypoint;
        break;
      }
    }
    if (old && old->cell == a.waypoint.cell) continue;
    std::string entry = a.agent_id + " w" + std::to_string(a.window) + ": ";
    entry += old ? "(" + std::to_string(old->cell.row) + "," +
                       std::to_string(old->cell.col) + ")"
                 : "(none)";
    entry += " -> (" + std::to_string(a.waypoint.cell.row) + "," +
             std::to_string(a.waypoint.cell.col) + ")";
    report.assignment_diff.push_back(std::move(entry));
  }

  write_back(result);
  last_ = result;
  return {result, report};
}

PlanResult MissionSession::replan_from_scratch(int committed_through) {
  const auto prefix = build_prefix(committed_through);
  PlanEngine fresh(scenario_.grid, scenario_.planner, &rasters_);
  return fresh.run(store_.snapshot(), nullptr, prefix ? &*prefix : nullptr);
}

}  // namespace mission
