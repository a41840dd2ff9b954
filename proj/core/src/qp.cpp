#include "formset/qp.hpp"

#include <cmath>
#include <limits>

namespace formset {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Internal constraint in the form n'x >= d. kind: 0 equality, 1 inequality.
struct Row {
  Vector n;
  double d;
  int kind;
  int origin;  // row index in the source problem (-1 for bounds)
};

struct Workspace {
  Matrix q;                  // symmetrized Hessian
  Eigen::LLT<Matrix> llt;
  std::vector<int> active;   // indices into rows
  Vector u;                  // multipliers aligned with active
  Matrix normals;            // columns = active normals
};

Vector solve_q(const Workspace& w, const Vector& v) { return w.llt.solve(v); }

// Primal/dual step directions for candidate normal np against the working
// set, via the null-space method: with N = Y R (thin QR) and Z spanning
// ker(N'), z = Z (Z'QZ)^{-1} Z'np and r solves N r = np - Q z.
void step_directions(const Workspace& w, const Vector& np, Vector& z, Vector& r) {
  const auto n = np.size();
  const auto k = static_cast<Eigen::Index>(w.active.size());
  if (k == 0) {
    z = solve_q(w, np);
    r.resize(0);
    return;
  }
  Eigen::HouseholderQR<Matrix> qr(w.normals.leftCols(k));
  const Matrix full_q = qr.householderQ();
  if (k >= n) {
    z = Vector::Zero(n);
  } else {
    const Matrix basis = full_q.rightCols(n - k);
    const Matrix reduced = basis.transpose() * w.q * basis;
    z = basis * reduced.llt().solve(basis.transpose() * np);
  }
  const Vector rhs = full_q.leftCols(k).transpose() * (np - w.q * z);
  r = qr.matrixQR().topRows(k).template triangularView<Eigen::Upper>().solve(rhs);
}

}  // namespace

QpResult qp_solve(const QpProblem& p) {
  const Eigen::Index n = p.num_vars();
  if (p.quadratic.cols() != n || p.linear.size() != n)
    throw DimensionError("qp_solve: inconsistent cost dimensions");
  if (max_abs(p.quadratic - p.quadratic.transpose()) >
      1e-12 * std::max(1.0, max_abs(p.quadratic)))
    throw DimensionError("qp_solve: Q not symmetric");

  std::vector<Row> rows;
  for (Eigen::Index i = 0; i < p.eq_mat.rows(); ++i)
    rows.push_back({-p.eq_mat.row(i).transpose(), -p.eq_rhs(i), 0, int(i)});
  for (Eigen::Index i = 0; i < p.ineq_mat.rows(); ++i)
    rows.push_back({-p.ineq_mat.row(i).transpose(), -p.ineq_rhs(i), 1, int(i)});
  if (p.lower.size() == n) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!std::isfinite(p.lower(i))) continue;
      Vector e = Vector::Zero(n);
      e(i) = 1.0;
      rows.push_back({e, p.lower(i), 1, -1});
    }
  }
  if (p.upper.size() == n) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!std::isfinite(p.upper(i))) continue;
      Vector e = Vector::Zero(n);
      e(i) = -1.0;
      rows.push_back({e, -p.upper(i), 1, -1});
    }
  }

  Workspace w;
  w.q = 0.5 * (p.quadratic + p.quadratic.transpose());
  w.llt.compute(w.q);
  if (w.llt.info() != Eigen::Success)
    throw NumericalError(
        "qp_solve: Q not positive definite (problem may be unbounded)");
  w.normals.resize(n, n);
  w.u.resize(0);

  QpResult res;
  res.x = -solve_q(w, p.linear);

  const int max_iter = 200 + 20 * static_cast<int>(rows.size());
  std::vector<char> in_active(rows.size(), 0);

  auto violation = [&](const Row& row) { return row.n.dot(res.x) - row.d; };
  auto feas_tol = [&](const Row& row) { return 1e-10 * (1.0 + std::abs(row.d)); };

  // Brings one constraint into the working set, taking dual steps (dropping
  // blocking inequalities) as needed. Equalities may enter with flipped sign.
  auto add_constraint = [&](int idx) -> bool {
    Row row = rows[static_cast<size_t>(idx)];
    if (row.kind == 0 && violation(row) > 0) {
      row.n = -row.n;
      row.d = -row.d;
    }
    double u_plus = 0.0;
    while (true) {
      if (++res.iterations > max_iter) return false;
      Vector z, r;
      step_directions(w, row.n, z, r);
      const double denom = row.n.dot(z);
      const double s = violation(row);

      double t1 = kInf;
      int blocker = -1;
      for (size_t k = 0; k < w.active.size(); ++k) {
        const Row& ak = rows[static_cast<size_t>(w.active[k])];
        if (ak.kind != 1) continue;
        if (r(static_cast<Eigen::Index>(k)) > 1e-12) {
          const double ratio =
              w.u(static_cast<Eigen::Index>(k)) / r(static_cast<Eigen::Index>(k));
          if (ratio < t1) {
            t1 = ratio;
            blocker = static_cast<int>(k);
          }
        }
      }
      const bool have_primal = denom > 1e-13 * (1.0 + row.n.norm() * z.norm());
      const double t2 = have_primal ? -s / denom : kInf;
      const double t = std::min(t1, t2);
      if (t == kInf) return false;  // constraint unreachable -> infeasible

      if (have_primal) res.x += t * z;
      for (size_t k = 0; k < w.active.size(); ++k)
        w.u(static_cast<Eigen::Index>(k)) -= t * r(static_cast<Eigen::Index>(k));
      u_plus += t;

      if (t == t2) {
        const auto k = static_cast<Eigen::Index>(w.active.size());
        w.normals.col(k) = row.n;
        w.active.push_back(idx);
        in_active[static_cast<size_t>(idx)] = 1;
        Vector u_new(k + 1);
        u_new.head(k) = w.u;
        u_new(k) = u_plus;
        w.u = u_new;
        return true;
      }
      // Dual-only or partial step: drop the blocking constraint and retry.
      in_active[static_cast<size_t>(w.active[static_cast<size_t>(blocker)])] = 0;
      w.active.erase(w.active.begin() + blocker);
      Vector u_new(w.u.size() - 1);
      Eigen::Index out = 0;
      for (Eigen::Index k = 0; k < w.u.size(); ++k)
        if (k != blocker) u_new(out++) = w.u(k);
      w.u = u_new;
      for (size_t k = 0; k < w.active.size(); ++k)
        w.normals.col(static_cast<Eigen::Index>(k)) =
            rows[static_cast<size_t>(w.active[k])].n;
    }
  };

  // Equalities first; they never leave the working set.
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].kind != 0) continue;
    if (!add_constraint(static_cast<int>(i))) {
      res.status = res.iterations > max_iter ? QpStatus::iteration_limit
                                             : QpStatus::infeasible;
      return res;
    }
  }

  while (true) {
    int worst = -1;
    double worst_v = 0.0;
    for (size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].kind != 1 || in_active[i]) continue;
      const double v = violation(rows[i]);
      if (v < -feas_tol(rows[i]) && v < worst_v) {
        worst_v = v;
        worst = static_cast<int>(i);
      }
    }
    if (worst < 0) break;
    if (!add_constraint(worst)) {
      res.status = res.iterations > max_iter ? QpStatus::iteration_limit
                                             : QpStatus::infeasible;
      return res;
    }
  }

  res.status = QpStatus::optimal;
  res.objective = 0.5 * res.x.dot(p.quadratic * res.x) + p.linear.dot(res.x);
  res.eq_multipliers = Vector::Zero(p.eq_mat.rows());
  res.ineq_multipliers = Vector::Zero(p.ineq_mat.rows());
  Vector grad = p.quadratic * res.x + p.linear;
  for (size_t k = 0; k < w.active.size(); ++k) {
    const Row& row = rows[static_cast<size_t>(w.active[k])];
    const double mult = w.u(static_cast<Eigen::Index>(k));
    grad -= mult * row.n;
    if (row.origin >= 0) {
      if (row.kind == 0) {
        // Stationarity uses the possibly sign-flipped normal; recover the
        // multiplier w.r.t. the original equality row.
        const double sgn = row.n.dot(-p.eq_mat.row(row.origin).transpose()) > 0 ? 1.0 : -1.0;
        res.eq_multipliers(row.origin) = sgn * mult;
      } else {
        res.ineq_multipliers(row.origin) = mult;
      }
    }
  }
  double feas_defect = 0.0;
  for (const Row& row : rows) {
    const double v = violation(row);
    const double miss = row.kind == 0 ? std::abs(v) : std::max(0.0, -v);
    feas_defect = std::max(feas_defect, miss / (1.0 + std::abs(row.d)));
  }
  res.kkt_residual =
      std::max(grad.cwiseAbs().maxCoeff() /
                   (1.0 + max_abs(p.quadratic * res.x) + max_abs(p.linear)),
               feas_defect);
  for (Eigen::Index i = 0; i < p.ineq_mat.rows(); ++i) {
    const double slack = p.ineq_rhs(i) - p.ineq_mat.row(i).dot(res.x);
    if (std::abs(slack) <= 1e-7 * (1.0 + std::abs(p.ineq_rhs(i))))
      res.active_set.push_back(static_cast<int>(i));
  }
  return res;
}

}  // namespace formset
