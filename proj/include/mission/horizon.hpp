#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace mission::horizon {

/// One selectable node in one window. `id` indexes the window's node list.
struct Node {
  int id = 0;
  double reward = 0.0;
};

/// Feasible transition from node `from` of window t to node `to` of t+1.
struct Seam {
  int from = 0;
  int to = 0;
  double cost = 0.0;
};

/// Window-0 admission for replanning: only `allowed` nodes may start the
/// chain, each paying its recorded entry cost (the seam out of the last
/// committed node; zero when the gate merely filters starts).
struct StartGate {
  std::vector<int> allowed;
  std::map<int, double> entry_cost;
};

struct StitchProblem {
  std::vector<std::vector<Node>> nodes;  // per window, ids dense from 0
  std::vector<std::vector<Seam>> seams;  // seams[t]: window t -> t+1
  std::optional<StartGate> start;
};

struct Chain {
  std::vector<int> node_ids;  // one per window
  double value = 0.0;         // sum of node rewards
  double seam_cost = 0.0;     // sum of seam costs incl. entry cost
  double objective = 0.0;     // value - seam_cost
};

/// Maximizes sum of rewards minus seam costs over one node per window.
/// Throws planning_error when no feasible chain exists (empty window,
/// unreachable nodes, empty start gate). `chains_evaluated` counts DP
/// extension candidates when provided.
Chain stitch_viterbi(const StitchProblem& problem,
                     std::uint64_t* chains_evaluated = nullptr);

/// Exact top-M distinct chains, objective descending; ties ordered by
/// lexicographically smaller node-id sequence. Returns fewer than M when
/// fewer feasible chains exist.
std::vector<Chain> top_m_candidates(const StitchProblem& problem, int m,
                                    std::uint64_t* chains_evaluated = nullptr);

}  // namespace mission::horizon
