#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mission/coordinator.hpp"
#include "mission/kg_views.hpp"
#include "mission/scenario.hpp"

namespace mission {

/// Deterministic work counters; wall-clock stays out so reruns compare
/// byte-identical.
struct StageCounters {
  std::uint64_t tensors_compiled = 0;   // per-agent mission tensors
  std::uint64_t metrics_tensors = 0;    // agent-independent reference tensors
  std::uint64_t edges_costed = 0;
  std::uint64_t chains_evaluated = 0;
  std::uint64_t micro_paths = 0;
};

struct WindowArtifact {
  MissionTensor tensor;
  NavGraph graph;
};

/// Costed transitions between consecutive windows' graphs; vectors are
/// parallel, scores meaningful only where the edge is feasible.
struct SeamArtifact {
  std::vector<SeamEdge> edges;
  std::vector<EdgeCost> costs;
  std::vector<double> scores;
};

struct AgentArtifacts {
  AgentView view;
  std::vector<WindowArtifact> windows;  // one per window
  std::vector<SeamArtifact> seams;      // one per window pair
};

/// Already-executed plan head kept fixed during a replan. Suffix stitching
/// starts from each agent's node at `through`, paying that node's outgoing
/// seam cost.
struct CommittedPrefix {
  int through = 0;                                      // last committed window
  std::map<std::string, std::vector<Waypoint>> nodes;   // windows 0..through
};

struct PlanResult {
  std::int64_t world_version = 0;  // snapshot version the plan was built from
  TeamPlan plan;
  TeamMetrics metrics;
  StageCounters counters;
  std::uint64_t tensors_recompiled = 0;
  std::uint64_t tensors_reused = 0;
};

/// Compile-and-plan orchestrator. Holds per-(agent, window) artifacts
/// between runs so a dirty-window replan recompiles only what changed.
class PlanEngine {
 public:
  PlanEngine(GridSpec grid, PlannerParams params, const RasterRegistry* rasters);

  /// Compile stage only: masks, reference tensors, mission tensors,
  /// navgraphs, seam costs. With `dirty`, artifacts of untouched windows are
  /// reused from the previous run (which must exist).
  void compile(const WorldSnapshot& snap, const std::set<int>* dirty,
               StageCounters& counters, std::uint64_t& recompiled,
               std::uint64_t& reused);

  /// Full pipeline: compile, stitch top-M chains per agent, deconflicted
  /// selection, micro-path realization, team metrics.
  PlanResult run(const WorldSnapshot& snap, const std::set<int>* dirty = nullptr,
                 const CommittedPrefix* prefix = nullptr);

  const GridSpec& grid() const { return grid_; }
  const PlannerParams& params() const { return params_; }
  const std::vector<TimeWindow>& windows() const { return windows_; }
  const std::vector<EventSpec>& events() const { return events_; }
  const std::vector<Mask>& hard_masks() const { return hard_; }
  const std::vector<Mask>& soft_regions() const { return soft_region_; }
  const std::vector<ScalarField>& reference_tensors() const {
    return ref_tensors_;
  }
  const std::map<std::string, AgentArtifacts>& agents() const {
    return agents_;
  }

  /// Fact-file lines replacing the previous compiled control plane in the
  /// store: retractions for stale tensor/navgraph/edge facts, assertions for
  /// the current ones.
  std::vector<FactLine> artifact_lines(const WorldSnapshot& snap) const;

  /// Plan-run record and assignments (appended, never replaced; run ids
  /// count existing PlanRun entities).
  std::vector<Fact> plan_facts(const WorldSnapshot& snap,
                               const PlanResult& result) const;

 private:
  void read_world(const WorldSnapshot& snap);
  void compile_environment(int t, StageCounters& counters);
  WindowArtifact compile_agent_window(const AgentView& agent, int t) const;
  SeamArtifact cost_seams(const AgentView& agent, const NavGraph& from,
                          const NavGraph& to, int pair) const;
  SeamContext seam_context(int dest_window) const;
  CandidateSet stitch_agent(const AgentArtifacts& arts,
                            const CommittedPrefix* prefix,
                            StageCounters& counters) const;
  CandidateSet restitch_agent(const AgentArtifacts& arts,
                              const CommittedPrefix* prefix,
                              const std::map<int, std::vector<Cell>>& claimed,
                              StageCounters& counters) const;
  CandidateSet stitch_graphs(const AgentArtifacts& arts,
                             const std::vector<const NavGraph*>& graphs,
                             const std::vector<const SeamArtifact*>& seams,
                             const CommittedPrefix* prefix,
                             StageCounters& counters) const;

  GridSpec grid_;
  PlannerParams params_;
  const RasterRegistry* rasters_;
  ConstraintRasterCache region_cache_;

  // World decoded from the last compiled snapshot.
  std::vector<TimeWindow> windows_;
  std::map<std::string, PolicyView> policies_;
  std::vector<ConstraintView> constraints_;
  std::vector<EventSpec> events_;

  bool compiled_ = false;  // a previous run's artifacts are cached
  std::vector<std::vector<ActiveConstraint>> active_;  // per window
  std::vector<Mask> hard_;
  std::vector<Mask> soft_region_;
  std::vector<ScalarField> ref_tensors_;
  std::map<std::string, AgentArtifacts> agents_;
};

/// Output bundle under out_dir: tensors/*.grd, heatmaps/*.pgm,
/// navgraph.json, and with a plan also plan.geojson, metrics.json,
/// cooling.facts, replan.json. manifest.json is written last as the
/// completion marker. All writes are atomic.
struct ExportOptions {
  bool rasters = true;
  std::string replan_json;  // written verbatim when non-empty
};

void export_run(const std::string& out_dir, const PlanEngine& engine,
                const Scenario& scenario, const PlanResult* result,
                const ExportOptions& options = {});

std::string plan_geojson(const PlanEngine& engine, const PlanResult& result);
std::string metrics_json(const PlanResult& result);

}  // namespace mission
