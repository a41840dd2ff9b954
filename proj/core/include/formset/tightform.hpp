#pragma once

#include <vector>

#include "formset/closedloop.hpp"
#include "formset/invariants.hpp"
#include "formset/qp.hpp"
#include "formset/topology.hpp"

namespace formset {

/// Bounded polyhedral obstacle {x : faces x <= offsets} in position space.
struct Obstacle {
  Matrix faces;
  Vector offsets;
};

/// Minimum-norm displacement placement: anchor the leader, keep every edge
/// displacement above its error threshold, clear every inflated obstacle.
struct TightFormationProblem {
  FormationGraph graph;
  int dimension = 0;
  Vector anchor;       // leader target, length n
  Matrix q_z;          // SPD displacement weight, nM x nM
  Vector thresholds;   // t = |H~| r_p, per edge coordinate (nM)
  Vector position_bound;                        // r_p (nN)
  std::vector<Obstacle> obstacles;              // original obstacles
  std::vector<std::vector<Obstacle>> inflated;  // per agent, obstacle order kept
  Box workspace;       // per-agent position box
  double big_m = 0.0;  // 0 = exact per-row vacuity bound (default)
  double margin = 1e-3;
  long node_budget = 100000;
  double gap_tol = 1e-6;
  double binary_regularization = 1e-7;
};

/// Assembles the placement problem from an analyzed closed loop: separation
/// thresholds from the position error box, obstacles inflated per agent by
/// that agent's error sub-box.
TightFormationProblem build_problem(const FormationGraph& graph, int dimension,
                                    const Vector& anchor, const Matrix& q_z,
                                    const ClosedLoop& cl,
                                    const std::vector<Obstacle>& obstacles,
                                    const Box& workspace, double margin = 1e-3);

struct TightFormationSolution {
  bool feasible = false;
  bool optimal = false;  // proven within gap_tol
  Vector p_star;         // stacked positions (nN)
  Vector z_star;         // H~ p_star (nM)
  double objective = 0.0;
  double gap = 0.0;
  long nodes_explored = 0;
  std::vector<int> binaries;
};

/// Big-M branch-and-bound over the disjunction binaries with dense QP
/// relaxations. Returns the proven optimum, or the best incumbent with a
/// gap when the node budget runs out.
TightFormationSolution solve(const TightFormationProblem& p);

/// Constraint audit without binaries, against freshly inflated obstacles.
/// Slack convention: >= 0 means satisfied with room; pass requires every
/// family above -1e-7.
struct VerifyReport {
  double anchor_error = 0.0;
  double worst_separation = 0.0;  // min over edges of max_d |z_kd| - (t_kd + margin)
  double worst_obstacle = 0.0;    // min over (agent, obstacle) of best face clearance - margin
  double worst_workspace = 0.0;
  bool pass = false;
};
VerifyReport verify(const TightFormationSolution& sol, const TightFormationProblem& p);

}  // namespace formset
