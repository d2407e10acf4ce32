#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mission/errors.hpp"
#include "mission/grid_io.hpp"
#include "mission/kg_views.hpp"
#include "mission/pipeline.hpp"
#include "mission/replan.hpp"
#include "mission/util.hpp"

namespace {

using namespace mission;
using nlohmann::json;

Scenario prepare(const std::string& path, const std::string& preset,
                 std::optional<std::uint64_t> seed) {
  Scenario sc = load_scenario(path);
  if (seed) sc.seed = *seed;
  if (!preset.empty()) {
    if (!sc.policies.count(preset))
      throw validation_error("preset: unknown policy '" + preset + "'");
    for (AgentSpec& a : sc.agents) a.policy_name = preset;
  }
  return sc;
}

EntityId parse_entity(const std::string& token) {
  const auto colon = token.find(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == token.size())
    throw validation_error("expected a namespaced id, got '" + token + "'");
  EntityId e{token.substr(0, colon), token.substr(colon + 1)};
  if (!valid_namespace(e.ns))
    throw validation_error("unknown namespace '" + e.ns + "'");
  return e;
}

int cmd_gen_world(const Scenario& sc, const std::string& out) {
  const RasterRegistry rasters = build_rasters(sc);
  std::filesystem::create_directories(out);
  const int T = static_cast<int>(sc.windows.size());
  std::vector<std::string> files;
  for (int t = 0; t < T; ++t) {
    const ScalarField& base = rasters.scalar(base_layer_entity(t));
    const std::string stem = out + "/base_w" + std::to_string(t);
    save_grd(stem + ".grd", base);
    write_file_atomic(stem + ".pgm", to_pgm(normalize01(base)));
    save_vector_grd(out + "/currents_w" + std::to_string(t),
                    rasters.vector(current_field_entity(t)));
    files.push_back("base_w" + std::to_string(t) + ".grd");
  }
  for (const auto& [name, gen] : sc.prior_gen) {
    save_grd(out + "/prior_" + name + ".grd",
             rasters.scalar(prior_entity(name)));
    files.push_back("prior_" + name + ".grd");
  }
  std::cout << "generated " << files.size() << " scalar layers and " << T
            << " current fields under " << out << "\n";
  return 0;
}

int cmd_compile(const Scenario& sc, const std::string& out) {
  FactStore store;
  populate_store(sc, store);
  const RasterRegistry rasters = build_rasters(sc);
  PlanEngine engine(sc.grid, sc.planner, &rasters);
  StageCounters counters;
  std::uint64_t recompiled = 0, reused = 0;
  engine.compile(store.snapshot(), nullptr, counters, recompiled, reused);
  store.apply_lines(engine.artifact_lines(store.snapshot()));
  export_run(out, engine, sc, nullptr);
  std::cout << "compiled " << counters.tensors_compiled << " mission tensors, "
            << counters.edges_costed << " seam edges -> " << out << "\n";
  return 0;
}

int cmd_plan(const Scenario& sc, const std::string& out) {
  MissionSession session(sc);
  const PlanResult result = session.plan();
  export_run(out, session.engine(), sc, &result);
  std::cout << "planned " << result.plan.selected.size() << " agents over "
            << session.engine().windows().size()
            << " windows; mission reward "
            << format_double(result.metrics.mission_reward)
            << ", hard violations " << result.metrics.hard_violations << " -> "
            << out << "\n";
  return 0;
}

json report_json(const ReplanReport& report) {
  json doc;
  doc["from_version"] = report.from_version;
  doc["to_version"] = report.to_version;
  doc["changed_facts"] = report.changed_facts;
  doc["dirty_windows"] = report.dirty;
  doc["tensors_recompiled"] = report.tensors_recompiled;
  doc["tensors_reused"] = report.tensors_reused;
  doc["incremental_ms"] = report.incremental_ms;
  doc["assignment_diff"] = report.assignment_diff;
  return doc;
}

int cmd_replan(const Scenario& sc, const std::string& out,
               const std::string& perturb, int committed_through) {
  MissionSession session(sc);
  session.plan();
  const auto lines = parse_fact_lines(read_file(perturb));
  const auto [version, dirty] = session.apply_update(lines);
  auto [result, report] = session.replan(committed_through);
  ExportOptions options;
  options.replan_json = report_json(report).dump(2) + "\n";
  export_run(out, session.engine(), sc, &result, options);
  std::cout << "replanned at version " << version << ": "
            << report.tensors_recompiled << " tensors recompiled, "
            << report.tensors_reused << " reused, "
            << report.assignment_diff.size() << " assignments moved -> " << out
            << "\n";
  return 0;
}

int cmd_validate(const Scenario& sc) {
  FactStore store;
  populate_store(sc, store);
  const auto violations = store.snapshot().validate(default_shape_rules());
  for (const Violation& v : violations) {
    json line = {{"entity", v.entity.qualified()},
                 {"rule", v.rule},
                 {"reason", v.reason}};
    std::cout << line.dump() << "\n";
  }
  if (!violations.empty()) {
    std::cerr << "error: " << violations.size() << " shape violations\n";
    return 1;
  }
  std::cout << "ok: " << store.snapshot().fact_count()
            << " facts conform to the shape rules\n";
  return 0;
}

int cmd_query(const Scenario& sc, const std::string& provenance_of,
              double whatif_factor, bool audit, const std::string& pattern) {
  MissionSession session(sc);
  session.plan();
  const WorldSnapshot snap = session.store().snapshot();

  if (!provenance_of.empty()) {
    const auto trace = snap.provenance_trace(parse_entity(provenance_of));
    json out = json::array();
    for (const EntityId& e : trace) out.push_back(e.qualified());
    std::cout << out.dump(2) << "\n";
    return 0;
  }

  if (whatif_factor > 0.0) {
    std::map<std::string, double> budgets;
    for (const AgentView& a : read_agents(snap))
      budgets[a.entity.qualified()] = a.caps.energy_budget;
    json out = json::array();
    for (const EntityId& e : snap.instances_of(vocab::EdgeCost)) {
      const auto energy = snap.real_of(e, vocab::costEnergy);
      const auto feasible = snap.int_of(e, vocab::feasible);
      const auto agent = snap.object_of(e, vocab::forAgent);
      if (!energy || !feasible || *feasible != 1 || !agent ||
          !is_entity(*agent))
        continue;
      const double budget = budgets.at(as_entity(*agent).qualified());
      if (*energy > whatif_factor * budget) {
        out.push_back({{"edge_cost", e.qualified()},
                       {"agent", as_entity(*agent).qualified()},
                       {"energy", *energy},
                       {"budget_scaled", whatif_factor * budget}});
      }
    }
    std::cout << out.dump(2) << "\n";
    return 0;
  }

  if (audit) {
    int last_run = 0;
    EntityId last;
    for (const EntityId& e : snap.instances_of(vocab::PlanRun)) {
      const int n = std::atoi(e.local.substr(e.local.rfind('/') + 1).c_str());
      if (n > last_run) {
        last_run = n;
        last = e;
      }
    }
    if (last_run == 0) throw planning_error("no plan run recorded");
    json out = json::array();
    for (const Fact& f : snap.query(std::nullopt, vocab::wasGeneratedBy,
                                    Object{last})) {
      const EntityId& a = f.subject;
      json row = {{"assignment", a.qualified()}, {"plan_run", last.qualified()}};
      if (auto ag = snap.object_of(a, vocab::forAgent))
        row["agent"] = as_entity(*ag).qualified();
      if (auto w = snap.int_of(a, vocab::forWindow)) row["window"] = *w;
      if (auto r = snap.int_of(a, vocab::row)) row["row"] = *r;
      if (auto c = snap.int_of(a, vocab::col)) row["col"] = *c;
      if (auto s = snap.real_of(a, vocab::score)) row["score"] = *s;
      out.push_back(row);
    }
    std::cout << out.dump(2) << "\n";
    return 0;
  }

  if (!pattern.empty()) {
    // "s p o" with ? wildcards; the object uses fact-file literal syntax.
    const auto first = pattern.find(' ');
    const auto second = pattern.find(' ', first + 1);
    if (first == std::string::npos || second == std::string::npos)
      throw validation_error("pattern needs three tokens: \"s p o\"");
    const std::string st = pattern.substr(0, first);
    const std::string pt = pattern.substr(first + 1, second - first - 1);
    const std::string ot = pattern.substr(second + 1);
    std::optional<EntityId> s, p;
    std::optional<Object> o;
    if (st != "?") s = parse_entity(st);
    if (pt != "?") p = parse_entity(pt);
    if (ot != "?") {
      const auto parsed = parse_fact_line("ex:q ex:q " + ot);
      if (!parsed) throw validation_error("bad object token '" + ot + "'");
      o = parsed->fact.object;
    }
    if (!s && !p && !o)
      throw validation_error("pattern must bind at least one position");
    for (const Fact& f : snap.query(s, p, o))
      std::cout << format_fact(f) << "\n";
    return 0;
  }

  throw validation_error(
      "query needs one of --provenance, --whatif-energy, --audit, --pattern");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mission tensor compiler and multi-agent horizon planner"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir = "out", preset, perturb_file;
  std::string provenance_of, pattern;
  std::uint64_t seed_value = 0;
  bool seed_set = false;
  double whatif_factor = 0.0;
  bool audit = false;
  int committed_through = -1;

  auto add_common = [&](CLI::App* cmd, bool with_out) {
    cmd->add_option("--scenario", scenario_path, "Scenario JSON file")
        ->required();
    if (with_out) cmd->add_option("--out", out_dir, "Output directory");
    cmd->add_option("--preset", preset, "Apply this policy to every agent");
    cmd->add_option("--seed", seed_value, "Override the scenario seed")
        ->each([&](const std::string&) { seed_set = true; });
  };

  CLI::App* gen = app.add_subcommand("gen-world", "Write the synthetic rasters");
  add_common(gen, true);
  CLI::App* compile =
      app.add_subcommand("compile", "Compile tensors, navgraphs and seams");
  add_common(compile, true);
  CLI::App* plan = app.add_subcommand("plan", "Full compile-stitch-select run");
  add_common(plan, true);
  CLI::App* replan =
      app.add_subcommand("replan", "Plan, apply a fact update, replan");
  add_common(replan, true);
  replan->add_option("--perturb", perturb_file, "Fact-file update to apply")
      ->required();
  replan->add_option("--committed-through", committed_through,
                     "Last window whose assignment is already executed");
  CLI::App* query = app.add_subcommand("query", "Inspect a planned world");
  add_common(query, false);
  query->add_option("--provenance", provenance_of,
                    "Entity whose derivation chain to print");
  query->add_option("--whatif-energy", whatif_factor,
                    "Budget factor; prints edges exceeding it");
  query->add_flag("--audit", audit, "Print the last run's assignments");
  query->add_option("--pattern", pattern, "Triple pattern \"s p o\" with ?");
  CLI::App* validate =
      app.add_subcommand("validate", "Run shape validation on the scenario");
  add_common(validate, false);

  CLI11_PARSE(app, argc, argv);

  try {
    const std::optional<std::uint64_t> seed =
        seed_set ? std::optional<std::uint64_t>(seed_value) : std::nullopt;
    const Scenario sc = prepare(scenario_path, preset, seed);
    if (gen->parsed()) return cmd_gen_world(sc, out_dir);
    if (compile->parsed()) return cmd_compile(sc, out_dir);
    if (plan->parsed()) return cmd_plan(sc, out_dir);
    if (replan->parsed())
      return cmd_replan(sc, out_dir, perturb_file, committed_through);
    if (validate->parsed()) return cmd_validate(sc);
    if (query->parsed())
      return cmd_query(sc, provenance_of, whatif_factor, audit, pattern);
  } catch (const mission::MissionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
