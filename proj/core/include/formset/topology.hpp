#pragma once

#include <utility>
#include <vector>

#include "formset/matcore.hpp"

namespace formset {

/// Undirected interaction graph with an orientation per edge. Edges are
/// 1-based (head, tail) pairs; the underlying graph must be connected and
/// free of duplicate undirected edges.
struct FormationGraph {
  int n_agents = 0;
  std::vector<std::pair<int, int>> edges;

  int num_edges() const { return static_cast<int>(edges.size()); }
};

/// Validating constructor.
FormationGraph make_graph(int n_agents, std::vector<std::pair<int, int>> edges);

/// Leader-First-Follower chain: agent 1 leads, agent 2 follows the leader,
/// agent i >= 3 follows agents i-2 and i-1. M = 1 + 2(N-2) edges.
FormationGraph lff(int n_agents);

/// M x N incidence matrix: +1 at an edge's head, -1 at its tail.
Matrix incidence(const FormationGraph& g);

/// Graph Laplacian H'H (symmetric PSD, rank N-1, kernel span{1}).
Matrix laplacian(const FormationGraph& g);

/// Leader-bias modification L + alpha e1 e1'; positive definite for
/// alpha > 0 on connected graphs (alpha = 0 is allowed and keeps the
/// singular Laplacian).
Matrix modified_laplacian(const Matrix& l, double alpha);

}  // namespace formset
