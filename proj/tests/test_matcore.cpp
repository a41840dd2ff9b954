#include <doctest.h>

#include <algorithm>
#include <random>

#include "formset/matcore.hpp"

using namespace formset;

namespace {

Matrix random_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = unif(rng);
  return m;
}

Matrix random_symmetric(int n, std::mt19937_64& rng) {
  const Matrix m = random_matrix(n, n, rng);
  return 0.5 * (m + m.transpose());
}

// Well-conditioned diagonalizable matrix with a prescribed real spectrum.
Matrix with_spectrum(const Vector& values, std::mt19937_64& rng) {
  const int n = static_cast<int>(values.size());
  const Matrix q = Eigen::HouseholderQR<Matrix>(random_matrix(n, n, rng))
                       .householderQ();
  const Matrix v = q + 0.1 * random_matrix(n, n, rng);
  return v * values.asDiagonal() * v.inverse();
}

}  // namespace

TEST_CASE("kron identities") {
  CHECK(max_abs(kron(Matrix::Identity(2, 2), Matrix::Identity(3, 3)) -
                Matrix::Identity(6, 6)) == 0.0);

  Matrix a(2, 2);
  a << 1, 2, 3, 4;
  const Matrix k = kron(a, Matrix::Identity(2, 2));
  Matrix expected(4, 4);
  expected << 1, 0, 2, 0, 0, 1, 0, 2, 3, 0, 4, 0, 0, 3, 0, 4;
  CHECK(max_abs(k - expected) == 0.0);
}

TEST_CASE("kron mixed-product rule on random conforming instances") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix a = random_matrix(2, 3, rng);
    const Matrix b = random_matrix(3, 2, rng);
    const Matrix c = random_matrix(3, 2, rng);
    const Matrix d = random_matrix(2, 4, rng);
    CHECK(max_abs(kron(a, b) * kron(c, d) - kron(a * c, b * d)) < 1e-10);
  }
}

TEST_CASE("kron spectra multiply for symmetric factors") {
  std::mt19937_64 rng(11);
  const Matrix a = random_symmetric(3, rng);
  const Matrix b = random_symmetric(3, rng);
  const Vector ea = sym_eig(a).values;
  const Vector eb = sym_eig(b).values;
  Vector expected(9);
  int idx = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) expected(idx++) = ea(i) * eb(j);
  std::sort(expected.data(), expected.data() + 9);
  const Vector got = sym_eig(kron(a, b)).values;
  CHECK(max_abs(got - expected) < 1e-9);
}

TEST_CASE("hadamard basics and column scaling") {
  std::mt19937_64 rng(3);
  const Matrix a = random_matrix(3, 4, rng);
  CHECK(max_abs(hadamard(a, Matrix::Ones(3, 4)) - a) == 0.0);
  CHECK(max_abs(hadamard(a, Matrix::Zero(3, 4))) == 0.0);
  CHECK_THROWS_AS(hadamard(a, Matrix::Ones(4, 3)), DimensionError);

  // V ⊙ (1 b') scales column j by b_j.
  Vector b(2);
  b << 2, 3;
  const Matrix ones_b = kron(Vector::Ones(2), b.transpose());
  const Matrix scaled = hadamard(Matrix::Identity(2, 2), ones_b);
  Matrix expected(2, 2);
  expected << 2, 0, 0, 3;
  CHECK(max_abs(scaled - expected) == 0.0);
}

TEST_CASE("sym_eig on the 4-agent LFF Laplacian") {
  Matrix l(4, 4);
  l << 2, -1, -1, 0, -1, 3, -1, -1, -1, -1, 3, -1, 0, -1, -1, 2;
  const SpectralForm s = sym_eig(l);
  Vector expected(4);
  expected << 0, 2, 4, 4;
  CHECK(max_abs(s.values - expected) < 1e-9);

  // Stated eigenvectors: (1,0,0,-1) -> 2 and (1,-1,-1,1) -> 4.
  Vector v2(4), v4(4);
  v2 << 1, 0, 0, -1;
  v4 << 1, -1, -1, 1;
  CHECK((l * v2 - 2.0 * v2).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((l * v4 - 4.0 * v4).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("sym_eig trivial cases and symmetry guard") {
  const SpectralForm id = sym_eig(Matrix::Identity(3, 3));
  CHECK(max_abs(id.values - Vector::Ones(3)) < 1e-12);

  Vector d(3);
  d << 5, 1, 3;
  const SpectralForm diag = sym_eig(Matrix(d.asDiagonal()));
  Vector expected(3);
  expected << 1, 3, 5;
  CHECK(max_abs(diag.values - expected) < 1e-12);

  Matrix skew(2, 2);
  skew << 0, 1, -1, 0;
  CHECK_THROWS_AS(sym_eig(skew), DimensionError);
}

TEST_CASE("sym_eig reconstruction residual over random instances") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix a = random_symmetric(2 + trial % 6, rng);
    const SpectralForm s = sym_eig(a);
    const Matrix recon = s.vectors * s.values.asDiagonal() * s.vectors.transpose();
    CHECK(max_abs(a * s.vectors - s.vectors * Matrix(s.values.asDiagonal())) <=
          1e-9 * std::max(1.0, max_abs(a)));
    CHECK(max_abs(recon - a) <= 1e-9 * std::max(1.0, max_abs(a)));
  }
}

TEST_CASE("real_eig on the two-state example matrix") {
  Matrix a(2, 2);
  a << 0, -2, 1, -3;
  const SpectralForm s = real_eig(a);
  Vector expected(2);
  expected << -2, -1;
  CHECK(max_abs(s.values - expected) < 1e-10);
}

TEST_CASE("real_eig agrees with sym_eig on symmetric input") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = random_symmetric(4, rng);
    CHECK(max_abs(real_eig(a).values - sym_eig(a).values) < 1e-9);
  }
}

TEST_CASE("real_eig canonical form") {
  Vector d(2);
  d << -2, -1;
  const SpectralForm s = real_eig(Matrix(d.asDiagonal()));
  CHECK(max_abs(s.vectors - Matrix::Identity(2, 2)) < 1e-12);

  // Column-scale invariance of the canonicalization.
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> pos(0.1, 5.0);
  const Matrix v = random_matrix(4, 4, rng);
  Vector scale(4);
  for (int i = 0; i < 4; ++i) scale(i) = pos(rng);
  CHECK(max_abs(canonicalize_columns(v) -
                canonicalize_columns(v * scale.asDiagonal())) < 1e-12);
}

TEST_CASE("real_eig rejects defective and complex spectra") {
  Matrix jordan(2, 2);
  jordan << 0, 1, 0, 0;
  CHECK_THROWS_AS(real_eig(jordan), NumericalError);

  Matrix rotation(2, 2);
  rotation << 0, -1, 1, 0;
  CHECK_THROWS_AS(real_eig(rotation), NumericalError);
}

TEST_CASE("real_eig reconstruction over random diagonalizable matrices") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> gap(0.5, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 5;
    Vector values(n);
    double v = -1.0;
    for (int i = 0; i < n; ++i) {
      values(i) = v;
      v -= gap(rng);
    }
    const Matrix a = with_spectrum(values, rng);
    const SpectralForm s = real_eig(a);
    std::sort(values.data(), values.data() + n);
    CHECK(max_abs(s.values - values) < 1e-7 * std::max(1.0, max_abs(a)));
  }
}

TEST_CASE("least squares identity, consistent, and inconsistent systems") {
  std::mt19937_64 rng(43);
  Vector b = random_matrix(3, 1, rng).col(0);
  CHECK(max_abs(solve_least_squares(Matrix::Identity(3, 3), b).x - b) < 1e-12);

  // Consistent overdetermined stack: exact recovery.
  const Matrix a = random_matrix(7, 3, rng);
  const Vector x0 = random_matrix(3, 1, rng).col(0);
  const LeastSquares ls = solve_least_squares(a, a * x0);
  CHECK(max_abs(ls.x - x0) < 1e-10);
  CHECK(ls.residual <= 1e-10);

  // Inconsistent: matches the normal-equations minimizer.
  const Vector rhs = random_matrix(7, 1, rng).col(0);
  const LeastSquares inc = solve_least_squares(a, rhs);
  const Vector normal = (a.transpose() * a).ldlt().solve(a.transpose() * rhs);
  CHECK(max_abs(inc.x - normal) < 1e-9);
  CHECK(inc.residual > 1e-3);

  Matrix rank_def(3, 2);
  rank_def << 1, 1, 1, 1, 1, 1;
  CHECK_THROWS_AS(solve_least_squares(rank_def, Vector::Zero(3)), NumericalError);
}
