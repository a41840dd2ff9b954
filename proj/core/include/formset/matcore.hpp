#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace formset {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Centralized numeric tolerances used across the toolkit.
struct Tol {
  static constexpr double residual = 1e-8;    // relative reconstruction / KKT residual
  static constexpr double symmetry = 1e-10;   // absolute symmetry defect
  static constexpr double rank = 1e-12;       // rank threshold, scaled by ||A||
  static constexpr double membership = 1e-9;  // absolute set-membership slack
};

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Eigenvector matrix V and real eigenvalue vector of a diagonalizable
/// real-spectrum matrix, A = V diag(values) V^{-1}.
struct SpectralForm {
  Matrix vectors;  // columns are eigenvectors
  Vector values;   // ascending
};

Matrix kron(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);

/// Normalizes every column to unit 2-norm with its first nonzero entry
/// positive. Makes eigenvector matrices reproducible across scalings.
Matrix canonicalize_columns(Matrix v);

/// Eigendecomposition of a symmetric matrix; eigenvalues ascending,
/// eigenvectors orthonormal. Throws DimensionError on non-symmetric input.
SpectralForm sym_eig(const Matrix& a);

/// Eigendecomposition of a general square matrix with real diagonalizable
/// spectrum. Eigenvector columns are canonicalized. Throws NumericalError
/// when the reconstruction residual indicates a defective or complex
/// spectrum.
SpectralForm real_eig(const Matrix& a);

struct LeastSquares {
  Vector x;
  double residual;  // ||Ax - b||_2
};

/// Minimum-residual solution of Ax = b for full-column-rank A.
LeastSquares solve_least_squares(const Matrix& a, const Vector& b);

inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

}  // namespace formset
