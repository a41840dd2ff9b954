#include "formset/topology.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace formset {

FormationGraph make_graph(int n_agents, std::vector<std::pair<int, int>> edges) {
  if (n_agents < 1) throw DimensionError("graph: need at least one agent");
  std::set<std::pair<int, int>> seen;
  for (const auto& [head, tail] : edges) {
    if (head < 1 || head > n_agents || tail < 1 || tail > n_agents)
      throw DimensionError("graph: vertex index out of range");
    if (head == tail) throw DimensionError("graph: self-loop");
    if (!seen.insert({std::min(head, tail), std::max(head, tail)}).second)
      throw DimensionError("graph: duplicate undirected edge");
  }
  // Connectivity via union-find.
  std::vector<int> parent(static_cast<size_t>(n_agents));
  for (int i = 0; i < n_agents; ++i) parent[static_cast<size_t>(i)] = i;
  std::function<int(int)> find = [&](int v) {
    while (parent[static_cast<size_t>(v)] != v) v = parent[static_cast<size_t>(v)] = parent[static_cast<size_t>(parent[static_cast<size_t>(v)])];
    return v;
  };
  for (const auto& [head, tail] : edges)
    parent[static_cast<size_t>(find(head - 1))] = find(tail - 1);
  for (int i = 1; i < n_agents; ++i)
    if (find(i) != find(0)) throw DimensionError("graph: not connected");
  return FormationGraph{n_agents, std::move(edges)};
}

FormationGraph lff(int n_agents) {
  if (n_agents < 2) throw DimensionError("lff: need at least two agents");
  std::vector<std::pair<int, int>> edges;
  edges.emplace_back(1, 2);
  for (int i = 3; i <= n_agents; ++i) {
    edges.emplace_back(i - 2, i);
    edges.emplace_back(i - 1, i);
  }
  return make_graph(n_agents, std::move(edges));
}

Matrix incidence(const FormationGraph& g) {
  Matrix h = Matrix::Zero(g.num_edges(), g.n_agents);
  for (int k = 0; k < g.num_edges(); ++k) {
    h(k, g.edges[static_cast<size_t>(k)].first - 1) = 1.0;
    h(k, g.edges[static_cast<size_t>(k)].second - 1) = -1.0;
  }
  return h;
}

Matrix laplacian(const FormationGraph& g) {
  const Matrix h = incidence(g);
  return h.transpose() * h;
}

Matrix modified_laplacian(const Matrix& l, double alpha) {
  if (alpha < 0.0) throw DimensionError("modified_laplacian: alpha must be nonnegative");
  Matrix out = l;
  out(0, 0) += alpha;  // alpha = 0 keeps the singular Laplacian
  return out;
}

}  // namespace formset
