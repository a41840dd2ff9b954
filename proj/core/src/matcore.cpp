#include "formset/matcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace formset {

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("hadamard: shape mismatch");
  return a.cwiseProduct(b);
}

Matrix canonicalize_columns(Matrix v) {
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    const double norm = v.col(j).norm();
    if (norm == 0.0) continue;
    const double peak = v.col(j).cwiseAbs().maxCoeff();
    double sign = 1.0;
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      if (std::abs(v(i, j)) > 1e-10 * peak) {
        sign = v(i, j) > 0 ? 1.0 : -1.0;
        break;
      }
    }
    v.col(j) *= sign / norm;
  }
  return v;
}

SpectralForm sym_eig(const Matrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("sym_eig: matrix not square");
  const double defect = max_abs(a - a.transpose());
  if (defect > Tol::symmetry * std::max(1.0, max_abs(a)))
    throw DimensionError("sym_eig: matrix not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (a + a.transpose()));
  if (solver.info() != Eigen::Success)
    throw NumericalError("sym_eig: eigensolver failed to converge");
  return {solver.eigenvectors(), solver.eigenvalues()};
}

SpectralForm real_eig(const Matrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("real_eig: matrix not square");
  const Eigen::Index n = a.rows();
  Eigen::EigenSolver<Matrix> solver(a);
  if (solver.info() != Eigen::Success)
    throw NumericalError("real_eig: eigensolver failed to converge");

  const Eigen::VectorXcd values = solver.eigenvalues();
  const Eigen::MatrixXcd vectors = solver.eigenvectors();
  const double scale = std::max(1.0, max_abs(a));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(values(i).imag()) > 1e-7 * scale)
      throw NumericalError("real_eig: defective or complex spectrum");
  }

  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) {
    return values(i).real() < values(j).real();
  });

  SpectralForm form;
  form.values.resize(n);
  form.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    form.values(k) = values(order[static_cast<size_t>(k)]).real();
    form.vectors.col(k) = vectors.col(order[static_cast<size_t>(k)]).real();
  }
  form.vectors = canonicalize_columns(form.vectors);

  // A posteriori diagonalizability check via reconstruction.
  Eigen::PartialPivLU<Matrix> lu(form.vectors);
  const Matrix recon = form.vectors * form.values.asDiagonal() * lu.inverse();
  if (max_abs(recon - a) > Tol::residual * scale)
    throw NumericalError("real_eig: defective or complex spectrum");
  return form;
}

LeastSquares solve_least_squares(const Matrix& a, const Vector& b) {
  if (a.rows() != b.size())
    throw DimensionError("solve_least_squares: rhs length mismatch");
  Eigen::ColPivHouseholderQR<Matrix> qr(a);
  qr.setThreshold(Tol::rank * std::max(1.0, max_abs(a)) * static_cast<double>(a.rows()));
  if (qr.rank() < a.cols())
    throw NumericalError("solve_least_squares: rank-deficient matrix");
  LeastSquares out;
  out.x = qr.solve(b);
  out.residual = (a * out.x - b).norm();
  return out;
}

}  // namespace formset
