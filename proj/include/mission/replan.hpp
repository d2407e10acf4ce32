#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mission/pipeline.hpp"

namespace mission {

/// What an incremental replan did, against the plan it replaced.
struct ReplanReport {
  std::int64_t from_version = 0;
  std::int64_t to_version = 0;
  std::size_t changed_facts = 0;  // change records applied since the baseline
  std::set<int> dirty;
  std::uint64_t tensors_recompiled = 0;
  std::uint64_t tensors_reused = 0;
  StageCounters counters;
  double incremental_ms = 0.0;
  // "alpha w3: (r,c) -> (r,c)" per moved assignment.
  std::vector<std::string> assignment_diff;
};

/// Receding-horizon planning session: owns the fact store, the rasters and
/// the engine's artifact cache. Updates arrive as fact batches; replans
/// recompile only artifacts whose windows the updates touched.
class MissionSession {
 public:
  explicit MissionSession(Scenario scenario);

  const Scenario& scenario() const { return scenario_; }
  FactStore& store() { return store_; }
  const RasterRegistry& rasters() const { return rasters_; }
  PlanEngine& engine() { return engine_; }

  /// Version the facts were at after the last plan's write-back; dirtiness
  /// is tracked from here.
  std::int64_t baseline_version() const { return baseline_; }

  /// Full-horizon plan at the current version, written back to the store.
  PlanResult plan();

  /// Commits an update batch; returns the new version and the windows dirty
  /// since the last plan.
  std::pair<std::int64_t, std::set<int>> apply_update(
      const std::vector<FactLine>& lines);

  /// MPC step. Windows 0..committed_through keep their executed
  /// assignments; the suffix is re-stitched from each agent's committed
  /// node and the selection re-run with committed cells claimed. Requires
  /// committed_through < every dirty window. -1 replans the whole horizon.
  std::pair<PlanResult, ReplanReport> replan(int committed_through);

  /// Control arm for equivalence checks: a fresh engine (no cached
  /// artifacts) planning from scratch at the current version with the same
  /// committed prefix. Does not touch session state.
  PlanResult replan_from_scratch(int committed_through);

  const PlanResult& last() const;

 private:
  std::optional<CommittedPrefix> build_prefix(int committed_through) const;
  void write_back(const PlanResult& result);

  Scenario scenario_;
  FactStore store_;
  RasterRegistry rasters_;
  PlanEngine engine_;
  std::optional<PlanResult> last_;
  std::int64_t baseline_ = 0;
};

}  // namespace mission
