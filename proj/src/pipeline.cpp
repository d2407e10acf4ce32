#include "mission/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>

#include "json.hpp"
#include "mission/errors.hpp"
#include "mission/grid_io.hpp"
#include "mission/horizon.hpp"
#include "mission/util.hpp"

namespace mission {
namespace {

using nlohmann::json;

EntityId tensor_entity(const std::string& agent, int t) {
  return ex("tensor/" + agent + "/w" + std::to_string(t));
}
EntityId navgraph_entity(const std::string& agent, int t) {
  return ex("navgraph/" + agent + "/w" + std::to_string(t));
}
EntityId waypoint_entity(const std::string& agent, int t, int id) {
  return ex("waypoint/" + agent + "/w" + std::to_string(t) + "/" +
            std::to_string(id));
}
EntityId edge_entity(const std::string& agent, int pair, int id) {
  return ex("edge/" + agent + "/w" + std::to_string(pair) + "/" +
            std::to_string(id));
}
EntityId edgecost_entity(const std::string& agent, int pair, int id) {
  return ex("edgecost/" + agent + "/w" + std::to_string(pair) + "/" +
            std::to_string(id));
}
EntityId planrun_entity(int run) {
  return ex("planrun/" + std::to_string(run));
}

}  // namespace

PlanEngine::PlanEngine(GridSpec grid, PlannerParams params,
                       const RasterRegistry* rasters)
    : grid_(grid), params_(std::move(params)), rasters_(rasters) {
  grid_.validate();
  if (!rasters_) throw contract_error("raster registry is required");
}

void PlanEngine::read_world(const WorldSnapshot& snap) {
  windows_ = read_windows(snap);
  policies_ = read_policies(snap);
  constraints_ = read_constraints(snap);
  events_ = read_events(snap);
  if (windows_.empty()) throw validation_error("no time windows declared");
  if (!policies_.count(params_.metrics_policy)) {
    throw validation_error("metrics-policy: unknown policy '" +
                           params_.metrics_policy + "'");
  }
}

SeamContext PlanEngine::seam_context(int dest_window) const {
  SeamContext ctx;
  ctx.work = &rasters_->vector(current_field_entity(dest_window));
  ctx.hard = &hard_[dest_window];
  ctx.soft_region = &soft_region_[dest_window];
  ctx.window_duration_hours = windows_[dest_window].duration_hours;
  ctx.w_next = windows_[dest_window].confidence;
  ctx.risk_samples = params_.risk_samples;
  return ctx;
}

void PlanEngine::compile_environment(int t, StageCounters& counters) {
  std::vector<ActiveConstraint> active;
  for (const ConstraintView& view : constraints_) {
    if (!view.active_in(t)) continue;
    active.push_back(activate(view, region_cache_.region(view, grid_)));
  }

  Mask hard(grid_, 1.0);
  Mask soft_region(grid_, 0.0);
  for (const ActiveConstraint& a : active) {
    if (a.kind == ActiveConstraint::Kind::NoGo) {
      const Mask grown =
          a.buffer_cells > 0 ? buffer_mask(a.region, a.buffer_cells) : a.region;
      for (std::size_t i = 0; i < grown.data.size(); ++i)
        if (grown.data[i] != 0.0) hard.data[i] = 0.0;
    } else {
      for (std::size_t i = 0; i < a.region.data.size(); ++i)
        if (a.region.data[i] != 0.0) soft_region.data[i] = 1.0;
    }
  }

  const PolicyView& metrics_policy = policies_.at(params_.metrics_policy);
  std::map<std::string, const ScalarField*> priors;
  for (const auto& [name, beta] : metrics_policy.policy.betas)
    if (beta != 0.0) priors[name] = &rasters_->scalar(prior_entity(name));
  TensorProvenanceIds ids;
  ids.base_layer = base_layer_entity(t);
  ids.policy = metrics_policy.entity;
  ids.window = window_entity(t);
  for (const auto& [name, field] : priors) ids.priors[name] = prior_entity(name);

  active_[t] = std::move(active);
  hard_[t] = std::move(hard);
  soft_region_[t] = std::move(soft_region);
  ref_tensors_[t] = compile_mission_tensor(
                        params_.metrics_policy, metrics_policy.policy,
                        windows_[t], rasters_->scalar(base_layer_entity(t)),
                        priors, active_[t], events_, ids)
                        .field;
  ++counters.metrics_tensors;
}

WindowArtifact PlanEngine::compile_agent_window(const AgentView& agent,
                                                int t) const {
  std::map<std::string, const ScalarField*> priors;
  TensorProvenanceIds ids;
  ids.base_layer = base_layer_entity(t);
  ids.policy = agent.policy_entity;
  ids.window = window_entity(t);
  for (const auto& [name, beta] : agent.policy.betas) {
    if (beta == 0.0) continue;
    priors[name] = &rasters_->scalar(prior_entity(name));
    ids.priors[name] = prior_entity(name);
  }

  WindowArtifact out;
  out.tensor = compile_mission_tensor(
      agent.id, agent.policy, windows_[t],
      rasters_->scalar(base_layer_entity(t)), priors, active_[t], events_, ids);
  out.graph.window = t;
  out.graph.waypoints = sample_waypoints(out.tensor, params_.k_max,
                                         params_.pr_radius, params_.min_sep);
  return out;
}

SeamArtifact PlanEngine::cost_seams(const AgentView& agent,
                                    const NavGraph& from, const NavGraph& to,
                                    int pair) const {
  SeamArtifact out;
  out.edges = build_seams(from, to, params_.fanout);
  out.costs.resize(out.edges.size());
  out.scores.resize(out.edges.size(),
                    std::numeric_limits<double>::quiet_NaN());
  const SeamContext ctx = seam_context(pair + 1);
  for (std::size_t i = 0; i < out.edges.size(); ++i) {
    const SeamEdge& e = out.edges[i];
    out.costs[i] = edge_cost(from.waypoints[e.from], to.waypoints[e.to],
                             agent.caps, ctx);
    if (out.costs[i].feasible)
      out.scores[i] = seam_score(out.costs[i], agent.policy, ctx.w_next);
  }
  return out;
}

void PlanEngine::compile(const WorldSnapshot& snap, const std::set<int>* dirty,
                         StageCounters& counters, std::uint64_t& recompiled,
                         std::uint64_t& reused) {
  read_world(snap);
  auto views = read_agents(snap);
  if (views.empty()) throw validation_error("no agents declared");
  const int T = static_cast<int>(windows_.size());

  // Incremental reuse is only sound against an unchanged roster and horizon.
  bool same_shape = compiled_ && static_cast<int>(ref_tensors_.size()) == T &&
                    views.size() == agents_.size();
  if (same_shape)
    for (const AgentView& v : views)
      if (!agents_.count(v.id)) same_shape = false;
  const bool incremental = dirty != nullptr && same_shape;

  if (!same_shape) {
    agents_.clear();
    active_.assign(T, {});
    hard_.assign(T, Mask());
    soft_region_.assign(T, Mask());
    ref_tensors_.assign(T, ScalarField());
  }
  for (const AgentView& v : views) {
    AgentArtifacts& slot = agents_[v.id];
    slot.view = v;
    slot.windows.resize(T);
    slot.seams.resize(T > 0 ? T - 1 : 0);
  }

  auto recompute_window = [&](int t) {
    return !incremental || dirty->count(t) > 0;
  };

  for (int t = 0; t < T; ++t)
    if (recompute_window(t)) compile_environment(t, counters);

  struct Job {
    const AgentView* agent;
    int t;
    WindowArtifact* slot;
  };
  std::vector<Job> jobs;
  for (auto& [id, arts] : agents_)
    for (int t = 0; t < T; ++t)
      if (recompute_window(t)) jobs.push_back({&arts.view, t, &arts.windows[t]});
  parallel_for(jobs.size(), [&](std::size_t i) {
    *jobs[i].slot = compile_agent_window(*jobs[i].agent, jobs[i].t);
  });
  counters.tensors_compiled += jobs.size();
  recompiled = jobs.size();
  reused = static_cast<std::uint64_t>(agents_.size()) *
               static_cast<std::uint64_t>(T) -
           jobs.size();

  struct SeamJob {
    AgentArtifacts* arts;
    int pair;
  };
  std::vector<SeamJob> seam_jobs;
  for (auto& [id, arts] : agents_)
    for (int p = 0; p + 1 < T; ++p)
      if (recompute_window(p) || recompute_window(p + 1))
        seam_jobs.push_back({&arts, p});
  parallel_for(seam_jobs.size(), [&](std::size_t i) {
    AgentArtifacts& arts = *seam_jobs[i].arts;
    const int p = seam_jobs[i].pair;
    arts.seams[p] = cost_seams(arts.view, arts.windows[p].graph,
                               arts.windows[p + 1].graph, p);
  });
  for (const SeamJob& j : seam_jobs)
    counters.edges_costed += j.arts->seams[j.pair].edges.size();

  compiled_ = true;
}

CandidateSet PlanEngine::stitch_agent(const AgentArtifacts& arts,
                                      const CommittedPrefix* prefix,
                                      StageCounters& counters) const {
  std::vector<const NavGraph*> graphs;
  std::vector<const SeamArtifact*> seams;
  for (const WindowArtifact& w : arts.windows) graphs.push_back(&w.graph);
  for (const SeamArtifact& s : arts.seams) seams.push_back(&s);
  return stitch_graphs(arts, graphs, seams, prefix, counters);
}

CandidateSet PlanEngine::stitch_graphs(
    const AgentArtifacts& arts, const std::vector<const NavGraph*>& graphs,
    const std::vector<const SeamArtifact*>& seams,
    const CommittedPrefix* prefix, StageCounters& counters) const {
  const int T = static_cast<int>(graphs.size());
  const int c = prefix ? prefix->through : -1;

  horizon::StitchProblem problem;
  for (int t = c + 1; t < T; ++t) {
    std::vector<horizon::Node> nodes;
    for (const Waypoint& wp : graphs[t]->waypoints)
      nodes.push_back({wp.id, wp.score});
    problem.nodes.push_back(std::move(nodes));
  }
  for (int p = c + 1; p + 1 < T; ++p) {
    std::vector<horizon::Seam> hs;
    const SeamArtifact& sa = *seams[p];
    for (std::size_t i = 0; i < sa.edges.size(); ++i)
      if (sa.costs[i].feasible)
        hs.push_back({sa.edges[i].from, sa.edges[i].to, sa.scores[i]});
    problem.seams.push_back(std::move(hs));
  }

  double prefix_value = 0.0, prefix_cost = 0.0;
  std::vector<Waypoint> committed;
  if (prefix) {
    auto it = prefix->nodes.find(arts.view.id);
    if (it == prefix->nodes.end() ||
        static_cast<int>(it->second.size()) != c + 1) {
      throw contract_error("committed prefix missing nodes for agent " +
                           arts.view.id);
    }
    committed = it->second;
    for (const Waypoint& wp : committed) prefix_value += wp.score;
    for (int i = 0; i < c; ++i) {
      const EdgeCost ec = edge_cost(committed[i], committed[i + 1],
                                    arts.view.caps, seam_context(i + 1));
      ++counters.edges_costed;
      if (!ec.feasible) {
        throw planning_error("committed prefix no longer traversable: " +
                             arts.view.id + " window " + std::to_string(i + 1));
      }
      prefix_cost +=
          seam_score(ec, arts.view.policy, windows_[i + 1].confidence);
    }

    horizon::StartGate gate;
    const Waypoint& last = committed.back();
    const SeamContext ctx = seam_context(c + 1);
    for (const Waypoint& wp : graphs[c + 1]->waypoints) {
      const EdgeCost ec = edge_cost(last, wp, arts.view.caps, ctx);
      ++counters.edges_costed;
      if (!ec.feasible) continue;
      gate.allowed.push_back(wp.id);
      gate.entry_cost[wp.id] = seam_score(ec, arts.view.policy, ctx.w_next);
    }
    if (gate.allowed.empty()) {
      throw planning_error(
          "no-feasible-chain: no admissible entry into window " +
          std::to_string(c + 1) + " for " + arts.view.id);
    }
    problem.start = std::move(gate);
  }

  const std::vector<horizon::Chain> chains = horizon::top_m_candidates(
      problem, params_.m_candidates, &counters.chains_evaluated);

  CandidateSet out;
  out.agent_id = arts.view.id;
  for (const horizon::Chain& ch : chains) {
    HorizonPath hp;
    hp.agent_id = arts.view.id;
    hp.nodes = committed;
    for (std::size_t i = 0; i < ch.node_ids.size(); ++i)
      hp.nodes.push_back(
          graphs[c + 1 + static_cast<int>(i)]->waypoints[ch.node_ids[i]]);
    hp.total_value = prefix_value + ch.value;
    hp.total_seam_cost = prefix_cost + ch.seam_cost;
    hp.objective = hp.total_value - hp.total_seam_cost;
    out.paths.push_back(std::move(hp));
  }
  return out;
}

CandidateSet PlanEngine::restitch_agent(
    const AgentArtifacts& arts, const CommittedPrefix* prefix,
    const std::map<int, std::vector<Cell>>& claimed,
    StageCounters& counters) const {
  const int T = static_cast<int>(windows_.size());
  const int c = prefix ? prefix->through : -1;
  const int radius = std::max(params_.min_sep - 1, params_.cooling_radius);

  std::vector<NavGraph> local_graphs(T);
  std::vector<SeamArtifact> local_seams(T > 0 ? T - 1 : 0);
  for (int t = 0; t < T; ++t) {
    if (t <= c) {
      local_graphs[t] = arts.windows[t].graph;
      continue;
    }
    MissionTensor masked = arts.windows[t].tensor;
    if (auto it = claimed.find(t); it != claimed.end()) {
      for (const Cell& q : it->second) {
        const int r0 = std::max(0, q.row - radius);
        const int r1 = std::min(grid_.rows - 1, q.row + radius);
        const int c0 = std::max(0, q.col - radius);
        const int c1 = std::min(grid_.cols - 1, q.col + radius);
        for (int r = r0; r <= r1; ++r)
          for (int cc = c0; cc <= c1; ++cc) masked.field.at(r, cc) = 0.0;
      }
    }
    local_graphs[t].window = t;
    local_graphs[t].waypoints = sample_waypoints(
        masked, params_.k_max, params_.pr_radius, params_.min_sep);
  }
  for (int p = std::max(0, c + 1); p + 1 < T; ++p) {
    local_seams[p] =
        cost_seams(arts.view, local_graphs[p], local_graphs[p + 1], p);
    counters.edges_costed += local_seams[p].edges.size();
  }

  std::vector<const NavGraph*> graphs;
  std::vector<const SeamArtifact*> seams;
  for (const NavGraph& g : local_graphs) graphs.push_back(&g);
  for (const SeamArtifact& s : local_seams) seams.push_back(&s);
  return stitch_graphs(arts, graphs, seams, prefix, counters);
}

PlanResult PlanEngine::run(const WorldSnapshot& snap, const std::set<int>* dirty,
                           const CommittedPrefix* prefix) {
  PlanResult result;
  result.world_version = snap.version();
  compile(snap, dirty, result.counters, result.tensors_recompiled,
          result.tensors_reused);
  const int T = static_cast<int>(windows_.size());
  if (prefix && (prefix->through < 0 || prefix->through >= T - 1))
    throw contract_error("committed prefix must end before the final window");

  std::map<std::string, CandidateSet> candidates;
  for (const auto& [id, arts] : agents_)
    candidates[id] = stitch_agent(arts, prefix, result.counters);

  const RestitchFn restitch =
      [&](const std::string& agent_id,
          const std::map<int, std::vector<Cell>>& claimed) {
        return restitch_agent(agents_.at(agent_id), prefix, claimed,
                              result.counters);
      };
  result.plan = select_team_plan(candidates, events_, params_.min_sep,
                                 params_.cooling_radius, restitch);

  for (const auto& [id, path] : result.plan.selected) {
    const AgentView& view = agents_.at(id).view;
    std::vector<CellPath>& trajectories = result.plan.trajectories[id];
    for (int p = 0; p + 1 < T; ++p) {
      const VectorField& work = rasters_->vector(current_field_entity(p + 1));
      auto cp = micro_path(grid_, work, hard_[p + 1], view.caps,
                           path.nodes[p].cell, path.nodes[p + 1].cell);
      ++result.counters.micro_paths;
      if (!cp) {
        throw planning_error("trajectory unreachable: " + id + " into window " +
                             std::to_string(p + 1));
      }
      trajectories.push_back(std::move(*cp));
    }
  }

  result.metrics = team_metrics(result.plan, ref_tensors_,
                                params_.footprint_radius, hard_);
  return result;
}

std::vector<FactLine> PlanEngine::artifact_lines(
    const WorldSnapshot& snap) const {
  if (!compiled_) throw contract_error("artifact_lines before compile");
  std::vector<FactLine> lines;

  for (const EntityId& cls :
       {vocab::TensorArtifact, vocab::NavGraph, vocab::Waypoint,
        vocab::TraverseEdge, vocab::EdgeCost}) {
    for (const EntityId& e : snap.instances_of(cls))
      for (const Fact& f : snap.about(e)) lines.push_back({true, f});
  }

  auto add = [&lines](Fact f) { lines.push_back({false, std::move(f)}); };
  const int T = static_cast<int>(windows_.size());
  for (const auto& [id, arts] : agents_) {
    const EntityId agent_ent = agent_entity(id);
    for (int t = 0; t < T; ++t) {
      const WindowArtifact& w = arts.windows[t];
      const EntityId tens = tensor_entity(id, t);
      add(fact(tens, vocab::type, vocab::TensorArtifact));
      add(fact(tens, vocab::forAgent, agent_ent));
      add(fact(tens, vocab::forWindow, Literal::integer(t)));
      add(fact(tens, vocab::contentHash, Literal::str(hex64(w.tensor.hash))));
      for (const EntityId& src : w.tensor.provenance)
        add(fact(tens, vocab::wasDerivedFrom, src));

      const EntityId graph = navgraph_entity(id, t);
      add(fact(graph, vocab::type, vocab::NavGraph));
      add(fact(graph, vocab::forAgent, agent_ent));
      add(fact(graph, vocab::forWindow, Literal::integer(t)));
      add(fact(graph, vocab::wasDerivedFrom, tens));
      for (const Waypoint& wp : w.graph.waypoints) {
        const EntityId went = waypoint_entity(id, t, wp.id);
        add(fact(went, vocab::type, vocab::Waypoint));
        add(fact(went, vocab::inGraph, graph));
        add(fact(went, vocab::row, Literal::integer(wp.cell.row)));
        add(fact(went, vocab::col, Literal::integer(wp.cell.col)));
        add(fact(went, vocab::score, Literal::real(wp.score)));
        add(fact(went, vocab::asWKT,
                 Literal::wkt(wkt_write_point(wp.lonlat))));
      }
    }
    for (int p = 0; p + 1 < T; ++p) {
      const SeamArtifact& sa = arts.seams[p];
      for (std::size_t i = 0; i < sa.edges.size(); ++i) {
        const SeamEdge& e = sa.edges[i];
        const EntityId eent = edge_entity(id, p, e.id);
        add(fact(eent, vocab::type, vocab::TraverseEdge));
        add(fact(eent, vocab::fromWaypoint, waypoint_entity(id, p, e.from)));
        add(fact(eent, vocab::toWaypoint, waypoint_entity(id, p + 1, e.to)));

        const EdgeCost& cost = sa.costs[i];
        const EntityId cent = edgecost_entity(id, p, e.id);
        add(fact(cent, vocab::type, vocab::EdgeCost));
        add(fact(cent, vocab::forEdge, eent));
        add(fact(cent, vocab::forAgent, agent_ent));
        add(fact(cent, vocab::feasible,
                 Literal::integer(cost.feasible ? 1 : 0)));
        if (std::isfinite(cost.hours))
          add(fact(cent, vocab::costHours, Literal::real(cost.hours)));
        if (std::isfinite(cost.energy))
          add(fact(cent, vocab::costEnergy, Literal::real(cost.energy)));
        add(fact(cent, vocab::costRisk, Literal::real(cost.risk)));
        if (cost.feasible)
          add(fact(cent, vocab::seamScore, Literal::real(sa.scores[i])));
      }
    }
  }
  return lines;
}

std::vector<Fact> PlanEngine::plan_facts(const WorldSnapshot& snap,
                                         const PlanResult& result) const {
  const int run_id =
      static_cast<int>(snap.instances_of(vocab::PlanRun).size()) + 1;
  const EntityId pr = planrun_entity(run_id);

  std::vector<Fact> out;
  out.push_back(fact(pr, vocab::type, vocab::PlanRun));
  out.push_back(
      fact(pr, vocab::worldVersion, Literal::integer(result.world_version)));
  out.push_back(fact(pr, vocab::status, Literal::str("ok")));
  const int T = static_cast<int>(windows_.size());
  for (const auto& [id, arts] : agents_)
    for (int t = 0; t < T; ++t)
      out.push_back(fact(pr, vocab::used, tensor_entity(id, t)));

  for (const Assignment& a : result.plan.assignments) {
    const EntityId ent =
        ex("assignment/run" + std::to_string(run_id) + "/" + a.agent_id + "/w" +
           std::to_string(a.window));
    out.push_back(fact(ent, vocab::type, vocab::Assignment));
    out.push_back(fact(ent, vocab::forAgent, agent_entity(a.agent_id)));
    out.push_back(fact(ent, vocab::forWindow, Literal::integer(a.window)));
    out.push_back(fact(ent, vocab::row, Literal::integer(a.waypoint.cell.row)));
    out.push_back(fact(ent, vocab::col, Literal::integer(a.waypoint.cell.col)));
    out.push_back(fact(ent, vocab::score, Literal::real(a.waypoint.score)));
    out.push_back(
        fact(ent, vocab::asWKT, Literal::wkt(wkt_write_point(a.waypoint.lonlat))));
    out.push_back(fact(ent, vocab::wasGeneratedBy, pr));
  }
  return out;
}

std::string plan_geojson(const PlanEngine& engine, const PlanResult& result) {
  json features = json::array();
  for (const auto& [id, path] : result.plan.selected) {
    json coords = json::array();
    json windows = json::array();
    json scores = json::array();
    for (const Waypoint& wp : path.nodes) {
      coords.push_back({wp.lonlat.lon, wp.lonlat.lat});
      windows.push_back(wp.window);
      scores.push_back(wp.score);
    }
    json props;
    props["agent"] = id;
    props["objective"] = path.objective;
    props["total_value"] = path.total_value;
    props["total_seam_cost"] = path.total_seam_cost;
    props["windows"] = windows;
    props["scores"] = scores;
    json feature;
    feature["type"] = "Feature";
    feature["geometry"] = {{"type", "LineString"}, {"coordinates", coords}};
    feature["properties"] = props;
    features.push_back(feature);
  }
  json doc;
  doc["type"] = "FeatureCollection";
  doc["features"] = features;
  return doc.dump(2) + "\n";
}

std::string metrics_json(const PlanResult& result) {
  json doc;
  doc["mission_reward"] = result.metrics.mission_reward;
  doc["unique_coverage"] = result.metrics.unique_coverage;
  doc["hard_violations"] = result.metrics.hard_violations;
  doc["selection_order"] = result.plan.selection_order;
  json per_agent;
  for (const auto& [id, path] : result.plan.selected) {
    per_agent[id] = {{"objective", path.objective},
                     {"value", path.total_value},
                     {"seam_cost", path.total_seam_cost}};
  }
  doc["per_agent"] = per_agent;
  return doc.dump(2) + "\n";
}

void export_run(const std::string& out_dir, const PlanEngine& engine,
                const Scenario& scenario, const PlanResult* result,
                const ExportOptions& options) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(fs::path(out_dir) / "tensors", ec);
  fs::create_directories(fs::path(out_dir) / "heatmaps", ec);
  if (ec) throw io_error("cannot create output directory " + out_dir);

  std::vector<std::string> files;
  auto emit = [&](const std::string& rel, const std::string& bytes) {
    write_file_atomic((fs::path(out_dir) / rel).string(), bytes);
    files.push_back(rel);
  };

  const int T = static_cast<int>(engine.windows().size());
  json tensor_hashes;
  if (options.rasters) {
    for (const auto& [id, arts] : engine.agents()) {
      for (int t = 0; t < T; ++t) {
        const ScalarField& f = arts.windows[t].tensor.field;
        const std::string stem = id + "_w" + std::to_string(t);
        emit("tensors/" + stem + ".grd", grd_encode(f));
        emit("heatmaps/" + stem + ".pgm", to_pgm(f));
      }
    }
    for (int t = 0; t < T; ++t) {
      const std::string stem = "reference_w" + std::to_string(t);
      emit("tensors/" + stem + ".grd", grd_encode(engine.reference_tensors()[t]));
      emit("heatmaps/" + stem + ".pgm", to_pgm(engine.reference_tensors()[t]));
    }
  }
  for (const auto& [id, arts] : engine.agents())
    for (int t = 0; t < T; ++t)
      tensor_hashes[id + "/w" + std::to_string(t)] =
          hex64(arts.windows[t].tensor.hash);

  json navgraphs;
  for (const auto& [id, arts] : engine.agents()) {
    json agent_doc = json::array();
    for (int t = 0; t < T; ++t) {
      json wps = json::array();
      for (const Waypoint& wp : arts.windows[t].graph.waypoints) {
        wps.push_back({{"id", wp.id},
                       {"row", wp.cell.row},
                       {"col", wp.cell.col},
                       {"lon", wp.lonlat.lon},
                       {"lat", wp.lonlat.lat},
                       {"score", wp.score}});
      }
      json edges = json::array();
      if (t + 1 < T) {
        const SeamArtifact& sa = arts.seams[t];
        for (std::size_t i = 0; i < sa.edges.size(); ++i) {
          json e = {{"id", sa.edges[i].id},
                    {"from", sa.edges[i].from},
                    {"to", sa.edges[i].to},
                    {"feasible", sa.costs[i].feasible},
                    {"risk", sa.costs[i].risk}};
          if (std::isfinite(sa.costs[i].hours)) e["hours"] = sa.costs[i].hours;
          if (std::isfinite(sa.costs[i].energy))
            e["energy"] = sa.costs[i].energy;
          if (sa.costs[i].feasible) e["seam_score"] = sa.scores[i];
          edges.push_back(e);
        }
      }
      agent_doc.push_back(
          {{"window", t}, {"waypoints", wps}, {"edges", edges}});
    }
    navgraphs[id] = agent_doc;
  }
  emit("navgraph.json", navgraphs.dump(2) + "\n");

  if (result) {
    emit("plan.geojson", plan_geojson(engine, *result));
    emit("metrics.json", metrics_json(*result));
    std::string cooling;
    for (const Fact& f :
         cooling_overrides(result->plan, engine.grid(),
                           engine.params().cooling_radius,
                           engine.params().cooling_attenuation)) {
      cooling += format_fact(f);
      cooling += '\n';
    }
    emit("cooling.facts", cooling);
  }
  if (!options.replan_json.empty()) emit("replan.json", options.replan_json);

  json manifest;
  manifest["grid"] = {{"rows", engine.grid().rows},
                      {"cols", engine.grid().cols},
                      {"bbox",
                       {engine.grid().lon_min, engine.grid().lat_min,
                        engine.grid().lon_max, engine.grid().lat_max}},
                      {"pixel_size_km", engine.grid().pixel_size_km}};
  manifest["seed"] = scenario.seed;
  manifest["windows"] = T;
  json agents = json::array();
  for (const auto& [id, arts] : engine.agents()) agents.push_back(id);
  manifest["agents"] = agents;
  manifest["tensor_hashes"] = tensor_hashes;
  json ref_hashes = json::array();
  for (const ScalarField& f : engine.reference_tensors())
    ref_hashes.push_back(hex64(field_hash(f)));
  manifest["reference_hashes"] = ref_hashes;
  std::sort(files.begin(), files.end());
  manifest["files"] = files;
  if (result) {
    manifest["world_version"] = result->world_version;
    manifest["counters"] = {{"tensors_compiled", result->counters.tensors_compiled},
                            {"metrics_tensors", result->counters.metrics_tensors},
                            {"edges_costed", result->counters.edges_costed},
                            {"chains_evaluated", result->counters.chains_evaluated},
                            {"micro_paths", result->counters.micro_paths}};
    manifest["metrics"] = {{"mission_reward", result->metrics.mission_reward},
                           {"unique_coverage", result->metrics.unique_coverage},
                           {"hard_violations", result->metrics.hard_violations}};
    json objectives;
    for (const auto& [id, path] : result->plan.selected)
      objectives[id] = path.objective;
    manifest["objectives"] = objectives;
  }
  write_file_atomic((fs::path(out_dir) / "manifest.json").string(),
                    manifest.dump(2) + "\n");
}

}  // namespace mission
