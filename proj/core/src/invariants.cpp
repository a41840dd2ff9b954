#include "formset/invariants.hpp"

#include <cmath>
#include <random>

#include "formset/parallel.hpp"

namespace formset {

UltimateBounds ultimate_bounds(const SpectralForm& spectral, const Zonotope& disturbance) {
  const Eigen::Index n = spectral.vectors.rows();
  if (disturbance.center.size() != n)
    throw DimensionError("ultimate_bounds: disturbance dimension mismatch");
  if (spectral.values.maxCoeff() >= 0.0)
    throw NumericalError("ultimate_bounds: dynamics matrix is not Hurwitz");

  UltimateBounds ub;
  ub.spectral = spectral;
  ub.v_inverse = spectral.vectors.partialPivLu().inverse();
  const Vector inv_decay = spectral.values.cwiseInverse().cwiseAbs();
  Vector reach = (ub.v_inverse * disturbance.center).cwiseAbs();
  if (disturbance.generators.cols() > 0)
    reach += (ub.v_inverse * disturbance.generators).cwiseAbs() *
             Vector::Ones(disturbance.generators.cols());
  ub.bound = inv_decay.cwiseProduct(reach);
  ub.box = Box{Vector::Zero(n), spectral.vectors.cwiseAbs() * ub.bound};
  return ub;
}

UltimateBounds ultimate_bounds(const Matrix& a, const Zonotope& disturbance) {
  return ultimate_bounds(real_eig(a), disturbance);
}

Zonotope ub_zonotope(const UltimateBounds& ub) {
  const Eigen::Index n = ub.spectral.vectors.rows();
  const Matrix ones_b = kron(Vector::Ones(n), ub.bound.transpose());
  return Zonotope{Vector::Zero(n), hadamard(ub.spectral.vectors, ones_b)};
}

double volume_paper(const UltimateBounds& ub) {
  const double det_v = ub.spectral.vectors.determinant();
  const double prod_b = ub.bound.prod();
  const double v = 2.0 * det_v * prod_b;
  return v * v;
}

double volume_exact(const Zonotope& z) {
  const Eigen::Index n = z.center.size();
  const Eigen::Index d = z.generators.cols();
  if (d == n) return std::pow(2.0, double(n)) * std::abs(z.generators.determinant());
  if (n == 2) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = i + 1; j < d; ++j)
        sum += std::abs(z.generators(0, i) * z.generators(1, j) -
                        z.generators(1, i) * z.generators(0, j));
    return 4.0 * sum;
  }
  throw DimensionError("volume_exact: non-square generators only supported in 2-D");
}

double support(const Zonotope& z, const Vector& direction) {
  return direction.dot(z.center) +
         (z.generators.transpose() * direction).cwiseAbs().sum();
}

bool box_contains(const Box& b, const Vector& x, double tol) {
  if (x.size() != b.center.size()) throw DimensionError("box_contains: dimension mismatch");
  return ((x - b.center).cwiseAbs() - b.half_widths).maxCoeff() <= tol;
}

bool omega_contains(const UltimateBounds& ub, const Vector& x, double tol) {
  if (x.size() != ub.bound.size()) throw DimensionError("omega_contains: dimension mismatch");
  return ((ub.v_inverse * x).cwiseAbs() - ub.bound).maxCoeff() <= tol;
}

std::pair<Matrix, Vector> inflate_polyhedron(const Matrix& f, const Vector& g, const Box& box) {
  if (box.center.cwiseAbs().maxCoeff() > 1e-12)
    throw DimensionError("inflate_polyhedron: box must be centered at the origin");
  if (f.cols() != box.center.size() || f.rows() != g.size())
    throw DimensionError("inflate_polyhedron: dimension mismatch");
  return {f, g + f.cwiseAbs() * box.half_widths};
}

namespace {

Vector sample_disturbance(const Zonotope& dist, std::mt19937_64& rng, bool vertex) {
  const Eigen::Index d = dist.generators.cols();
  Vector lambda(d);
  if (vertex) {
    std::bernoulli_distribution coin(0.5);
    for (Eigen::Index i = 0; i < d; ++i) lambda(i) = coin(rng) ? 1.0 : -1.0;
  } else {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (Eigen::Index i = 0; i < d; ++i) lambda(i) = unif(rng);
  }
  return dist.center + dist.generators * lambda;
}

// One RK4 step of x' = Ax + d with the disturbance held constant.
Vector rk4_step(const Matrix& a, const Vector& x, const Vector& d, double dt) {
  const Vector k1 = a * x + d;
  const Vector k2 = a * (x + 0.5 * dt * k1) + d;
  const Vector k3 = a * (x + 0.5 * dt * k2) + d;
  const Vector k4 = a * (x + dt * k3) + d;
  return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

RpiReport rpi_check_sampled(const Matrix& a, const Zonotope& disturbance,
                            const UltimateBounds& ub, double dt, double t_final,
                            int n_trajectories, unsigned seed, SamplePolicy policy,
                            bool record_paths) {
  const auto steps = static_cast<long>(std::llround(t_final / dt));
  RpiReport report;
  report.trajectories.resize(static_cast<size_t>(n_trajectories));
  if (record_paths) report.paths.resize(static_cast<size_t>(n_trajectories));

  parallel_for(n_trajectories, [&](int traj) {
    std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL * static_cast<unsigned long long>(traj + 1));
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Vector x = ub.box.center;
    for (Eigen::Index i = 0; i < x.size(); ++i)
      x(i) += unif(rng) * ub.box.half_widths(i);

    const bool vertex = policy == SamplePolicy::vertex ||
                        (policy == SamplePolicy::alternate && traj % 2 == 1);
    RpiTrajectory& tr = report.trajectories[static_cast<size_t>(traj)];
    Matrix* path = record_paths ? &report.paths[static_cast<size_t>(traj)] : nullptr;
    if (path) {
      path->resize(steps + 1, x.size());
      path->row(0) = x.transpose();
    }
    for (long k = 0; k < steps; ++k) {
      const Vector d = sample_disturbance(disturbance, rng, vertex);
      x = rk4_step(a, x, d, dt);
      if (path) path->row(k + 1) = x.transpose();
      const bool inside = omega_contains(ub, x, 1e-6);
      if (!tr.entered && inside) {
        tr.entered = true;
        tr.entry_time = double(k + 1) * dt;
      } else if (tr.entered && !inside) {
        ++tr.post_entry_exits;
      }
    }
    tr.final_inside = omega_contains(ub, x, 1e-6);
  });

  report.pass = true;
  for (const auto& tr : report.trajectories)
    if (!tr.entered || tr.post_entry_exits > 0) report.pass = false;
  return report;
}

}  // namespace formset
