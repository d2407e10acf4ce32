#include "mission/horizon.hpp"

#include <algorithm>

#include "mission/errors.hpp"

namespace mission::horizon {

namespace {

struct Entry {
  double value = 0.0;
  double seam_cost = 0.0;
  std::vector<int> path;

  double objective() const { return value - seam_cost; }
};

// Higher objective first; ties by lexicographically smaller path. Appending
// a common suffix preserves this order, which makes per-node top-M pruning
// exact.
bool better(const Entry& a, const Entry& b) {
  if (a.objective() != b.objective()) return a.objective() > b.objective();
  return a.path < b.path;
}

void keep_top_m(std::vector<Entry>& entries, int m) {
  std::sort(entries.begin(), entries.end(), better);
  if (static_cast<int>(entries.size()) > m) entries.resize(m);
}

}  // namespace

std::vector<Chain> top_m_candidates(const StitchProblem& problem, int m,
                                    std::uint64_t* chains_evaluated) {
  if (m < 1) throw contract_error("top_m_candidates needs m >= 1");
  const int T = static_cast<int>(problem.nodes.size());
  if (T < 1) throw planning_error("no-feasible-chain: empty horizon");
  if (static_cast<int>(problem.seams.size()) + 1 != T)
    throw contract_error("seam list must have one entry per window pair");
  for (int t = 0; t < T; ++t)
    if (problem.nodes[t].empty())
      throw planning_error("no-feasible-chain: window " + std::to_string(t) +
                           " has no nodes");

  std::uint64_t evaluated = 0;

  // entries[j]: top-M partial chains ending at node j of the current window.
  std::vector<std::vector<Entry>> entries(problem.nodes[0].size());
  for (const Node& node : problem.nodes[0]) {
    double entry_cost = 0.0;
    if (problem.start) {
      const StartGate& gate = *problem.start;
      if (std::find(gate.allowed.begin(), gate.allowed.end(), node.id) ==
          gate.allowed.end())
        continue;
      auto it = gate.entry_cost.find(node.id);
      if (it != gate.entry_cost.end()) entry_cost = it->second;
    }
    ++evaluated;
    entries[node.id].push_back({node.reward, entry_cost, {node.id}});
  }

  for (int t = 0; t + 1 < T; ++t) {
    std::vector<std::vector<Entry>> next(problem.nodes[t + 1].size());
    for (const Seam& seam : problem.seams[t]) {
      if (seam.from < 0 ||
          seam.from >= static_cast<int>(problem.nodes[t].size()) ||
          seam.to < 0 ||
          seam.to >= static_cast<int>(problem.nodes[t + 1].size()))
        throw contract_error("seam references a node outside its window");
      const Node& target = problem.nodes[t + 1][seam.to];
      for (const Entry& e : entries[seam.from]) {
        ++evaluated;
        Entry ext;
        ext.value = e.value + target.reward;
        ext.seam_cost = e.seam_cost + seam.cost;
        ext.path = e.path;
        ext.path.push_back(seam.to);
        next[seam.to].push_back(std::move(ext));
      }
    }
    for (auto& node_entries : next) keep_top_m(node_entries, m);
    entries = std::move(next);
  }

  std::vector<Entry> finals;
  for (const auto& node_entries : entries)
    finals.insert(finals.end(), node_entries.begin(), node_entries.end());
  if (finals.empty())
    throw planning_error("no-feasible-chain: no chain spans the horizon");
  keep_top_m(finals, m);

  if (chains_evaluated) *chains_evaluated += evaluated;

  std::vector<Chain> out;
  out.reserve(finals.size());
  for (Entry& e : finals) {
    Chain chain;
    chain.value = e.value;
    chain.seam_cost = e.seam_cost;
    chain.objective = e.objective();
    chain.node_ids = std::move(e.path);
    out.push_back(std::move(chain));
  }
  return out;
}

Chain stitch_viterbi(const StitchProblem& problem,
                     std::uint64_t* chains_evaluated) {
  return top_m_candidates(problem, 1, chains_evaluated).front();
}

}  // namespace mission::horizon
