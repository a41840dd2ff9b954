#include "formset/tightform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <queue>

namespace formset {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Matrix incidence_tilde(const FormationGraph& g, int dim) {
  return kron(incidence(g), Matrix::Identity(dim, dim));
}

Obstacle normalized(const Obstacle& o) {
  Obstacle out = o;
  for (Eigen::Index f = 0; f < o.faces.rows(); ++f) {
    const double norm = o.faces.row(f).norm();
    if (norm <= 0.0) throw DimensionError("obstacle: zero face normal");
    out.faces.row(f) /= norm;
    out.offsets(f) /= norm;
  }
  return out;
}

}  // namespace

TightFormationProblem build_problem(const FormationGraph& graph, int dimension,
                                    const Vector& anchor, const Matrix& q_z,
                                    const ClosedLoop& cl,
                                    const std::vector<Obstacle>& obstacles,
                                    const Box& workspace, double margin) {
  if (anchor.size() != dimension)
    throw DimensionError("build_problem: anchor dimension mismatch");
  if (workspace.center.size() != dimension)
    throw DimensionError("build_problem: missing or mismatched workspace");
  if (!cl.has_noise)
    throw DimensionError("build_problem: closed loop lacks noise analysis");

  TightFormationProblem p;
  p.graph = graph;
  p.dimension = dimension;
  p.anchor = anchor;
  p.q_z = q_z;
  p.position_bound = cl.position_bound;
  p.workspace = workspace;
  p.margin = margin;
  p.big_m = 0.0;  // exact per-row vacuity bounds

  const Matrix h_tilde = incidence_tilde(graph, dimension);
  p.thresholds = h_tilde.cwiseAbs() * cl.position_bound;

  p.obstacles.reserve(obstacles.size());
  for (const auto& o : obstacles) p.obstacles.push_back(normalized(o));
  p.inflated.resize(static_cast<size_t>(graph.n_agents));
  for (int i = 0; i < graph.n_agents; ++i) {
    const Box agent_box{Vector::Zero(dimension),
                        cl.position_bound.segment(i * dimension, dimension)};
    for (const auto& o : p.obstacles) {
      auto [f, g] = inflate_polyhedron(o.faces, o.offsets, agent_box);
      p.inflated[static_cast<size_t>(i)].push_back(Obstacle{std::move(f), std::move(g)});
    }
  }
  return p;
}

namespace {

// One big-M selectable constraint a'p_F >= c, active when its binary is 1.
struct Disjunct {
  Vector normal;  // over follower coordinates
  double rhs;
  double big_m;   // vacuity bound: a'p_F >= c - M holds on the whole box
};

struct MiqpData {
  const TightFormationProblem* prob;
  Eigen::Index n_free;               // follower coordinates
  Matrix hessian_p;                  // 2 Hf' Qz Hf
  Vector linear_p;                   // 2 Hf' Qz Hl pbar
  double constant;                   // pbar' Hl' Qz Hl pbar
  Vector lower_p, upper_p;
  std::vector<Disjunct> binaries;
  std::vector<std::vector<int>> covers;  // at least one binary per group
};

// Fixations: -1 free, 0 off, 1 on.
using Fixation = std::vector<signed char>;

std::optional<MiqpData> assemble(const TightFormationProblem& p) {
  const int n = p.dimension;
  const int agents = p.graph.n_agents;
  const Matrix h_tilde = incidence_tilde(p.graph, n);
  const Eigen::Index n_free = static_cast<Eigen::Index>(n) * (agents - 1);

  MiqpData d;
  d.prob = &p;
  d.n_free = n_free;
  const Matrix h_leader = h_tilde.leftCols(n);
  const Matrix h_follow = h_tilde.rightCols(n_free);
  d.hessian_p = 2.0 * h_follow.transpose() * p.q_z * h_follow;
  d.linear_p = 2.0 * h_follow.transpose() * p.q_z * (h_leader * p.anchor);
  d.constant = p.anchor.dot(h_leader.transpose() * p.q_z * h_leader * p.anchor);

  d.lower_p.resize(n_free);
  d.upper_p.resize(n_free);
  for (int i = 0; i < agents - 1; ++i) {
    d.lower_p.segment(i * n, n) = p.workspace.center - p.workspace.half_widths;
    d.upper_p.segment(i * n, n) = p.workspace.center + p.workspace.half_widths;
  }

  auto vacuity = [&](const Vector& normal, double rhs) {
    // max over the follower box of rhs - normal'p.
    double worst = rhs;
    for (Eigen::Index j = 0; j < normal.size(); ++j)
      worst -= normal(j) > 0 ? normal(j) * d.lower_p(j) : normal(j) * d.upper_p(j);
    const double floor = p.big_m > 0.0 ? p.big_m : 0.0;
    return std::max({worst, floor, 1.0});
  };

  // Leader clearance is a constant check; followers get face binaries.
  for (size_t o = 0; o < p.obstacles.size(); ++o) {
    const Obstacle& infl = p.inflated[0][o];
    if ((infl.faces * p.anchor - infl.offsets).maxCoeff() < p.margin)
      return std::nullopt;  // anchor inside the inflated obstacle
  }
  if (((p.anchor - p.workspace.center).cwiseAbs() - p.workspace.half_widths).maxCoeff() > 0.0)
    return std::nullopt;

  for (int i = 1; i < agents; ++i) {
    for (size_t o = 0; o < p.obstacles.size(); ++o) {
      const Obstacle& infl = p.inflated[static_cast<size_t>(i)][o];
      std::vector<int> group;
      for (Eigen::Index f = 0; f < infl.faces.rows(); ++f) {
        Vector normal = Vector::Zero(n_free);
        normal.segment((i - 1) * n, n) = infl.faces.row(f).transpose();
        const double rhs = infl.offsets(f) + p.margin;
        group.push_back(static_cast<int>(d.binaries.size()));
        d.binaries.push_back({std::move(normal), rhs, 0.0});
      }
      d.covers.push_back(std::move(group));
    }
  }

  // Edge separation: for some coordinate and sign, s z_kd >= t_kd + margin.
  // Edges with zero threshold impose nothing (zero-noise collapse allowed).
  for (int k = 0; k < p.graph.num_edges(); ++k) {
    if (p.thresholds.segment(k * n, n).maxCoeff() <= 0.0) continue;
    std::vector<int> group;
    for (int a = 0; a < n; ++a) {
      const Eigen::Index row = static_cast<Eigen::Index>(k) * n + a;
      const Vector z_row = h_tilde.row(row).transpose();
      const double lead = z_row.head(n).dot(p.anchor);
      for (double s : {1.0, -1.0}) {
        Vector normal = s * z_row.tail(n_free);
        const double rhs = p.thresholds(row) + p.margin - s * lead;
        group.push_back(static_cast<int>(d.binaries.size()));
        d.binaries.push_back({std::move(normal), rhs, 0.0});
      }
    }
    d.covers.push_back(std::move(group));
  }

  for (auto& b : d.binaries) b.big_m = vacuity(b.normal, b.rhs);
  return d;
}

struct NodeQp {
  QpResult qp;
  std::vector<int> free_ids;  // binary index per relaxed variable
  double bound = kInf;        // valid lower bound on the true objective
};

// Relaxation with fixed binaries substituted out and free ones in [0,1].
NodeQp solve_relaxation(const MiqpData& d, const Fixation& fix) {
  NodeQp out;
  for (size_t j = 0; j < d.binaries.size(); ++j)
    if (fix[j] < 0) out.free_ids.push_back(static_cast<int>(j));
  const Eigen::Index nb = static_cast<Eigen::Index>(out.free_ids.size());
  const Eigen::Index np = d.n_free;
  const double rho = d.prob->binary_regularization;

  QpProblem qp;
  qp.quadratic = Matrix::Zero(np + nb, np + nb);
  qp.quadratic.topLeftCorner(np, np) = d.hessian_p;
  qp.quadratic.bottomRightCorner(nb, nb) = 2.0 * rho * Matrix::Identity(nb, nb);
  qp.linear = Vector::Zero(np + nb);
  qp.linear.head(np) = d.linear_p;
  qp.lower = Vector::Constant(np + nb, -kInf);
  qp.upper = Vector::Constant(np + nb, kInf);
  qp.lower.head(np) = d.lower_p;
  qp.upper.head(np) = d.upper_p;
  qp.lower.tail(nb).setZero();
  qp.upper.tail(nb).setOnes();

  std::vector<Vector> rows;
  std::vector<double> rhss;
  // Enforced selections.
  for (size_t j = 0; j < d.binaries.size(); ++j) {
    if (fix[j] != 1) continue;
    Vector row = Vector::Zero(np + nb);
    row.head(np) = -d.binaries[j].normal;
    rows.push_back(std::move(row));
    rhss.push_back(-d.binaries[j].rhs);
  }
  // Big-M rows for free binaries.
  for (Eigen::Index v = 0; v < nb; ++v) {
    const Disjunct& b = d.binaries[static_cast<size_t>(out.free_ids[static_cast<size_t>(v)])];
    Vector row = Vector::Zero(np + nb);
    row.head(np) = -b.normal;
    row(np + v) = b.big_m;
    rows.push_back(std::move(row));
    rhss.push_back(b.big_m - b.rhs);
  }
  // Cover rows over the still-free members.
  for (const auto& group : d.covers) {
    bool satisfied = false;
    Vector row = Vector::Zero(np + nb);
    int free_members = 0;
    for (int j : group) {
      if (fix[static_cast<size_t>(j)] == 1) satisfied = true;
      if (fix[static_cast<size_t>(j)] < 0) {
        const auto it = std::find(out.free_ids.begin(), out.free_ids.end(), j);
        row(np + (it - out.free_ids.begin())) = -1.0;
        ++free_members;
      }
    }
    if (satisfied) continue;
    if (free_members == 0) {
      out.qp.status = QpStatus::infeasible;  // all members forced off
      return out;
    }
    rows.push_back(std::move(row));
    rhss.push_back(-1.0);
  }

  qp.ineq_mat.resize(static_cast<Eigen::Index>(rows.size()), np + nb);
  qp.ineq_rhs.resize(static_cast<Eigen::Index>(rows.size()));
  for (size_t r = 0; r < rows.size(); ++r) {
    qp.ineq_mat.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
    qp.ineq_rhs(static_cast<Eigen::Index>(r)) = rhss[r];
  }
  qp.eq_mat.resize(0, np + nb);
  qp.eq_rhs.resize(0);

  out.qp = qp_solve(qp);
  if (out.qp.status == QpStatus::optimal)
    out.bound = out.qp.objective + d.constant - rho * double(nb);
  return out;
}

// Clean follower-only QP under a full binary assignment. Returns objective
// and positions, or infinity when infeasible.
std::pair<double, Vector> solve_assignment(const MiqpData& d, const Fixation& fix) {
  for (const auto& group : d.covers) {
    bool satisfied = false;
    for (int j : group)
      if (fix[static_cast<size_t>(j)] == 1) satisfied = true;
    if (!satisfied) return {kInf, Vector()};
  }
  QpProblem qp;
  qp.quadratic = d.hessian_p;
  qp.linear = d.linear_p;
  qp.lower = d.lower_p;
  qp.upper = d.upper_p;
  std::vector<const Disjunct*> picked;
  for (size_t j = 0; j < d.binaries.size(); ++j)
    if (fix[j] == 1) picked.push_back(&d.binaries[j]);
  qp.ineq_mat.resize(static_cast<Eigen::Index>(picked.size()), d.n_free);
  qp.ineq_rhs.resize(static_cast<Eigen::Index>(picked.size()));
  for (size_t r = 0; r < picked.size(); ++r) {
    qp.ineq_mat.row(static_cast<Eigen::Index>(r)) = -picked[r]->normal.transpose();
    qp.ineq_rhs(static_cast<Eigen::Index>(r)) = -picked[r]->rhs;
  }
  qp.eq_mat.resize(0, d.n_free);
  qp.eq_rhs.resize(0);
  const QpResult res = qp_solve(qp);
  if (res.status != QpStatus::optimal) return {kInf, Vector()};
  return {res.objective + d.constant, res.x};
}

struct OpenNode {
  double bound;
  int depth;
  long id;
  Fixation fix;
};
struct NodeOrder {
  bool operator()(const OpenNode& a, const OpenNode& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.id > b.id;
  }
};

}  // namespace

TightFormationSolution solve(const TightFormationProblem& p) {
  TightFormationSolution sol;
  const auto data_opt = assemble(p);
  if (!data_opt) return sol;  // anchor violates a constant constraint
  const MiqpData& d = *data_opt;
  const int n = p.dimension;

  auto finish = [&](const Fixation& fix, double objective, const Vector& followers) {
    sol.feasible = true;
    sol.objective = objective;
    sol.p_star.resize(n * p.graph.n_agents);
    sol.p_star.head(n) = p.anchor;
    sol.p_star.tail(d.n_free) = followers;
    sol.z_star = incidence_tilde(p.graph, n) * sol.p_star;
    sol.binaries.assign(fix.begin(), fix.end());
  };

  const double int_tol = 1e-6;
  double incumbent = kInf;
  Fixation incumbent_fix;
  Vector incumbent_p;

  std::priority_queue<OpenNode, std::vector<OpenNode>, NodeOrder> open;
  long next_id = 0;
  open.push({-kInf, 0, next_id++, Fixation(d.binaries.size(), -1)});
  long explored = 0;
  double frontier_bound = -kInf;

  while (!open.empty()) {
    OpenNode node = open.top();
    open.pop();
    frontier_bound = node.bound;
    if (incumbent < kInf &&
        node.bound >= incumbent - p.gap_tol * std::max(1.0, std::abs(incumbent)))
      break;  // best-first: every remaining node is at least as bad
    if (explored >= p.node_budget) break;
    ++explored;

    const NodeQp relax = solve_relaxation(d, node.fix);
    if (relax.qp.status != QpStatus::optimal) continue;
    if (relax.bound >= incumbent - 1e-10) continue;

    // Fractionality check plus rounding heuristic for an early incumbent.
    int branch_var = -1;
    double worst_frac = int_tol;
    Fixation rounded = node.fix;
    for (size_t v = 0; v < relax.free_ids.size(); ++v) {
      const double beta = relax.qp.x(d.n_free + static_cast<Eigen::Index>(v));
      const double frac = std::min(beta, 1.0 - beta);
      rounded[static_cast<size_t>(relax.free_ids[v])] = beta > 0.5 ? 1 : 0;
      if (frac > worst_frac) {
        worst_frac = frac;
        branch_var = relax.free_ids[v];
      }
    }
    const auto [obj, followers] = solve_assignment(d, rounded);
    if (obj < incumbent - 1e-12) {
      incumbent = obj;
      incumbent_fix = rounded;
      incumbent_p = followers;
    }
    if (branch_var < 0) continue;  // relaxation already integral

    for (signed char val : {static_cast<signed char>(1), static_cast<signed char>(0)}) {
      Fixation child = node.fix;
      child[static_cast<size_t>(branch_var)] = val;
      open.push({relax.bound, node.depth + 1, next_id++, std::move(child)});
    }
  }

  if (incumbent == kInf) return sol;  // infeasible
  finish(incumbent_fix, incumbent, incumbent_p);
  sol.nodes_explored = explored;
  const double remaining = open.empty() ? incumbent : frontier_bound;
  sol.gap = std::max(0.0, (incumbent - remaining) / std::max(1.0, std::abs(incumbent)));
  sol.optimal = sol.gap <= p.gap_tol;
  return sol;
}

VerifyReport verify(const TightFormationSolution& sol, const TightFormationProblem& p) {
  VerifyReport rep;
  if (!sol.feasible) return rep;
  const int n = p.dimension;
  rep.anchor_error = (sol.p_star.head(n) - p.anchor).cwiseAbs().maxCoeff();

  const Vector z = incidence_tilde(p.graph, n) * sol.p_star;
  rep.worst_separation = kInf;
  for (int k = 0; k < p.graph.num_edges(); ++k) {
    const Vector t_k = p.thresholds.segment(k * n, n);
    if (t_k.maxCoeff() <= 0.0) continue;
    const double best =
        (z.segment(k * n, n).cwiseAbs() - t_k).maxCoeff() - p.margin;
    rep.worst_separation = std::min(rep.worst_separation, best);
  }
  if (rep.worst_separation == kInf) rep.worst_separation = 0.0;

  rep.worst_obstacle = kInf;
  for (int i = 0; i < p.graph.n_agents; ++i) {
    const Box agent_box{Vector::Zero(n), p.position_bound.segment(i * n, n)};
    for (const auto& o : p.obstacles) {
      const auto [f, g] = inflate_polyhedron(o.faces, o.offsets, agent_box);
      const double clearance =
          (f * sol.p_star.segment(i * n, n) - g).maxCoeff() - p.margin;
      rep.worst_obstacle = std::min(rep.worst_obstacle, clearance);
    }
  }
  if (rep.worst_obstacle == kInf) rep.worst_obstacle = 0.0;

  rep.worst_workspace = kInf;
  for (int i = 0; i < p.graph.n_agents; ++i) {
    const Vector off = (sol.p_star.segment(i * n, n) - p.workspace.center).cwiseAbs();
    rep.worst_workspace =
        std::min(rep.worst_workspace, (p.workspace.half_widths - off).minCoeff());
  }

  rep.pass = rep.anchor_error <= 1e-6 && rep.worst_separation >= -1e-7 &&
             rep.worst_obstacle >= -1e-7 && rep.worst_workspace >= -1e-7;
  return rep;
}

}  // namespace formset
