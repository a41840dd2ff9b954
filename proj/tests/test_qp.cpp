#include <doctest.h>

#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "formset/qp.hpp"

using namespace formset;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

QpProblem blank(int n) {
  QpProblem p;
  p.quadratic = Matrix::Identity(n, n);
  p.linear = Vector::Zero(n);
  p.eq_mat = Matrix(0, n);
  p.eq_rhs = Vector();
  p.ineq_mat = Matrix(0, n);
  p.ineq_rhs = Vector();
  return p;
}

// Independent oracle: enumerate all active subsets of the inequality rows,
// solve the KKT system for each, and keep the best feasible stationary
// point with nonnegative multipliers.
struct OracleResult {
  Vector x;
  double objective = kInf;
  std::vector<int> binding;
};

std::optional<OracleResult> enumeration_oracle(const QpProblem& p) {
  const Eigen::Index n = p.num_vars();
  const Eigen::Index m = p.ineq_mat.rows();
  const Eigen::Index ne = p.eq_mat.rows();
  OracleResult best;
  bool found = false;

  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    std::vector<int> subset;
    for (Eigen::Index i = 0; i < m; ++i)
      if (mask & (1u << i)) subset.push_back(static_cast<int>(i));
    const Eigen::Index k = static_cast<Eigen::Index>(subset.size());

    Matrix kkt = Matrix::Zero(n + ne + k, n + ne + k);
    Vector rhs(n + ne + k);
    kkt.topLeftCorner(n, n) = p.quadratic;
    rhs.head(n) = -p.linear;
    if (ne > 0) {
      kkt.block(0, n, n, ne) = p.eq_mat.transpose();
      kkt.block(n, 0, ne, n) = p.eq_mat;
      rhs.segment(n, ne) = p.eq_rhs;
    }
    for (Eigen::Index j = 0; j < k; ++j) {
      kkt.block(0, n + ne + j, n, 1) = p.ineq_mat.row(subset[static_cast<size_t>(j)]).transpose();
      kkt.block(n + ne + j, 0, 1, n) = p.ineq_mat.row(subset[static_cast<size_t>(j)]);
      rhs(n + ne + j) = p.ineq_rhs(subset[static_cast<size_t>(j)]);
    }
    Eigen::FullPivLU<Matrix> lu(kkt);
    if (!lu.isInvertible()) continue;
    const Vector sol = lu.solve(rhs);
    const Vector x = sol.head(n);
    bool ok = true;
    for (Eigen::Index i = 0; i < m && ok; ++i)
      if (p.ineq_mat.row(i).dot(x) > p.ineq_rhs(i) + 1e-9) ok = false;
    for (Eigen::Index j = 0; j < k && ok; ++j)
      if (sol(n + ne + j) < -1e-9) ok = false;
    if (!ok) continue;
    const double obj = 0.5 * x.dot(p.quadratic * x) + p.linear.dot(x);
    if (!found || obj < best.objective - 1e-12) {
      found = true;
      best.x = x;
      best.objective = obj;
      best.binding.clear();
      for (Eigen::Index i = 0; i < m; ++i)
        if (std::abs(p.ineq_mat.row(i).dot(x) - p.ineq_rhs(i)) <=
            1e-7 * (1.0 + std::abs(p.ineq_rhs(i))))
          best.binding.push_back(static_cast<int>(i));
    }
  }
  if (!found) return std::nullopt;
  return best;
}

}  // namespace

TEST_CASE("minimum norm under a single equality") {
  QpProblem p = blank(4);
  p.eq_mat = Matrix::Zero(1, 4);
  p.eq_mat(0, 0) = 1.0;
  p.eq_rhs = Vector::Ones(1);
  const QpResult r = qp_solve(p);
  REQUIRE(r.status == QpStatus::optimal);
  Vector expected = Vector::Zero(4);
  expected(0) = 1.0;
  CHECK(max_abs(r.x - expected) < 1e-10);
  CHECK(r.kkt_residual <= 1e-8);
}

TEST_CASE("scalar active bound") {
  // min (x-2)^2 s.t. x <= 1
  QpProblem p = blank(1);
  p.quadratic(0, 0) = 2.0;
  p.linear(0) = -4.0;
  p.ineq_mat = Matrix::Ones(1, 1);
  p.ineq_rhs = Vector::Ones(1);
  const QpResult r = qp_solve(p);
  REQUIRE(r.status == QpStatus::optimal);
  CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(r.ineq_multipliers(0) > 0.0);
  REQUIRE(r.active_set.size() == 1);
  CHECK(r.active_set[0] == 0);
}

TEST_CASE("infeasible inequalities are detected") {
  QpProblem p = blank(1);
  p.ineq_mat = Matrix(2, 1);
  p.ineq_mat << 1, -1;  // x <= 0 and -x <= -1
  p.ineq_rhs = Vector(2);
  p.ineq_rhs << 0, -1;
  CHECK(qp_solve(p).status == QpStatus::infeasible);
}

TEST_CASE("conflicting equalities are infeasible") {
  QpProblem p = blank(2);
  p.eq_mat = Matrix(2, 2);
  p.eq_mat << 1, 1, 1, 1;
  p.eq_rhs = Vector(2);
  p.eq_rhs << 1, 2;
  CHECK(qp_solve(p).status == QpStatus::infeasible);
}

TEST_CASE("bounds are honored") {
  QpProblem p = blank(3);
  p.linear = Vector::Constant(3, -10.0);
  p.lower = Vector::Constant(3, -1.0);
  p.upper = Vector::Constant(3, 2.0);
  const QpResult r = qp_solve(p);
  REQUIRE(r.status == QpStatus::optimal);
  CHECK(max_abs(r.x - Vector::Constant(3, 2.0)) < 1e-10);
}

TEST_CASE("non-PD Hessian is rejected") {
  QpProblem p = blank(2);
  p.quadratic(1, 1) = 0.0;
  CHECK_THROWS_AS(qp_solve(p), NumericalError);
}

TEST_CASE("random QPs match the active-set enumeration oracle") {
  std::mt19937_64 rng(97);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  int solved = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + trial % 3;
    const int m = 3 + trial % 8;  // <= 10 inequalities
    QpProblem p = blank(n);
    Matrix half(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) half(i, j) = unif(rng);
    p.quadratic = half.transpose() * half + 0.3 * Matrix::Identity(n, n);
    for (int i = 0; i < n; ++i) p.linear(i) = 2.0 * unif(rng);
    p.ineq_mat = Matrix(m, n);
    p.ineq_rhs = Vector(m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) p.ineq_mat(i, j) = unif(rng);
      p.ineq_rhs(i) = unif(rng);
    }

    const auto oracle = enumeration_oracle(p);
    const QpResult got = qp_solve(p);
    if (!oracle) {
      CHECK(got.status == QpStatus::infeasible);
      continue;
    }
    ++solved;
    REQUIRE(got.status == QpStatus::optimal);
    CHECK(max_abs(got.x - oracle->x) < 1e-8);
    CHECK(got.objective == doctest::Approx(oracle->objective).epsilon(1e-8));
    CHECK(got.active_set == oracle->binding);
    CHECK(got.kkt_residual <= 1e-8);
  }
  CHECK(solved > 30);  // the sweep must exercise plenty of feasible cases
}

TEST_CASE("equality plus inequality interplay") {
  // min ||x||^2 s.t. x1 + x2 = 2, x1 <= 0.5
  QpProblem p = blank(2);
  p.quadratic *= 2.0;
  p.eq_mat = Matrix::Ones(1, 2);
  p.eq_rhs = Vector::Constant(1, 2.0);
  p.ineq_mat = Matrix::Zero(1, 2);
  p.ineq_mat(0, 0) = 1.0;
  p.ineq_rhs = Vector::Constant(1, 0.5);
  const QpResult r = qp_solve(p);
  REQUIRE(r.status == QpStatus::optimal);
  Vector expected(2);
  expected << 0.5, 1.5;
  CHECK(max_abs(r.x - expected) < 1e-9);
}
