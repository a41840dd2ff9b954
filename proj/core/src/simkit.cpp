#include "formset/simkit.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace formset {

Vector target_positions(const FormationGraph& graph, int dimension,
                        const Vector& z_star, const Vector& anchor) {
  const int n = dimension;
  const Matrix h_tilde = kron(incidence(graph), Matrix::Identity(n, n));
  // [e1' ⊗ I_n ; H~] p = [anchor ; z_star]
  Matrix stacked = Matrix::Zero(n + h_tilde.rows(), h_tilde.cols());
  stacked.topLeftCorner(n, n) = Matrix::Identity(n, n);
  stacked.bottomRows(h_tilde.rows()) = h_tilde;
  Vector rhs(n + z_star.size());
  rhs.head(n) = anchor;
  rhs.tail(z_star.size()) = z_star;
  const LeastSquares ls = solve_least_squares(stacked, rhs);
  if (ls.residual > 1e-8 * (1.0 + rhs.norm()))
    throw NumericalError("target_positions: z_star is not cycle-consistent");
  return ls.x;
}

Trajectory simulate(const FormationGraph& graph, double alpha, Gains gains,
                    int dimension, const Vector& z_star, const Vector& anchor,
                    const NoiseBounds& noise, const Vector& x0, double t_final,
                    double dt, unsigned seed, SamplePolicy policy,
                    const Vector& leader_velocity) {
  const int n = dimension;
  const Eigen::Index nn = static_cast<Eigen::Index>(n) * graph.n_agents;
  const Eigen::Index nm = static_cast<Eigen::Index>(n) * graph.num_edges();
  if (x0.size() != 2 * nn) throw DimensionError("simulate: bad initial state length");
  if (z_star.size() != nm) throw DimensionError("simulate: bad z_star length");
  if (noise.position.size() != nm || noise.velocity.size() != nm)
    throw DimensionError("simulate: noise bounds must have length n*M");

  const Matrix h_tilde = kron(incidence(graph), Matrix::Identity(n, n));
  const Matrix h_tilde_t = h_tilde.transpose();
  const Vector p_star0 = target_positions(graph, n, z_star, anchor);
  const Vector v_ref = leader_velocity.size() == n
                           ? leader_velocity
                           : Vector(Vector::Zero(n));
  const Vector v_star = kron(Vector::Ones(graph.n_agents), v_ref);

  const auto steps = static_cast<long>(std::llround(t_final / dt));
  Trajectory traj;
  traj.dt = dt;
  traj.times.resize(steps + 1);
  traj.states.resize(steps + 1, 2 * nn);
  traj.errors.resize(steps + 1, 2 * nn);
  traj.noises.resize(steps, 2 * nm);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  const bool vertex = policy == SamplePolicy::vertex;

  auto control = [&](const Vector& p, const Vector& v, const Vector& eps,
                     const Vector& xi, const Vector& p_star) {
    Vector u = -gains.k_p * (h_tilde_t * (h_tilde * p + eps - z_star)) -
               gains.k_v * (h_tilde_t * (h_tilde * v + xi));
    u.head(n) += -gains.k_p * alpha * (p.head(n) - p_star.head(n)) -
                 gains.k_v * alpha * (v.head(n) - v_star.head(n));
    return u;
  };

  Vector x = x0;
  for (long k = 0; k <= steps; ++k) {
    const double t = double(k) * dt;
    traj.times(k) = t;
    traj.states.row(k) = x.transpose();
    const Vector p_star = p_star0 + t * v_star;
    traj.errors.row(k).head(nn) = (x.head(nn) - p_star).transpose();
    traj.errors.row(k).tail(nn) = (x.tail(nn) - v_star).transpose();
    if (traj.errors.row(k).cwiseAbs().maxCoeff() > 1e6)
      throw NumericalError("simulate: error diverged (unstable gains?)");
    if (k == steps) break;

    Vector eps(nm), xi(nm);
    for (Eigen::Index i = 0; i < nm; ++i)
      eps(i) = noise.position(i) * (vertex ? (coin(rng) ? 1.0 : -1.0) : unif(rng));
    for (Eigen::Index i = 0; i < nm; ++i)
      xi(i) = noise.velocity(i) * (vertex ? (coin(rng) ? 1.0 : -1.0) : unif(rng));
    traj.noises.row(k).head(nm) = eps.transpose();
    traj.noises.row(k).tail(nm) = xi.transpose();

    // RK4 with zero-order-hold noise. The reference translates during the
    // step for ramp leaders.
    auto deriv = [&](const Vector& s, double tau) {
      Vector ds(2 * nn);
      ds.head(nn) = s.tail(nn);
      const Vector ps = p_star0 + (t + tau) * v_star;
      ds.tail(nn) = control(s.head(nn), s.tail(nn), eps, xi, ps);
      return ds;
    };
    const Vector k1 = deriv(x, 0.0);
    const Vector k2 = deriv(x + 0.5 * dt * k1, 0.5 * dt);
    const Vector k3 = deriv(x + 0.5 * dt * k2, 0.5 * dt);
    const Vector k4 = deriv(x + dt * k3, dt);
    x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return traj;
}

InvarianceReport verify_invariance(const Trajectory& traj, const ClosedLoop& cl,
                                   double settle_fraction) {
  if (!cl.has_noise)
    throw DimensionError("verify_invariance: closed loop lacks noise analysis");
  const Eigen::Index samples = traj.errors.rows();
  const auto start = static_cast<Eigen::Index>(
      std::ceil(double(samples - 1) * (1.0 - settle_fraction)));

  InvarianceReport rep;
  const double slowest = cl.lambda_gamma.maxCoeff();  // least negative
  const double window_start_time = traj.times(start);
  rep.settled = window_start_time >= 5.0 / std::abs(slowest);

  const Eigen::Index nn = cl.gamma.rows() / 2;
  long inside = 0;
  rep.worst_omega_excess = -std::numeric_limits<double>::infinity();
  rep.worst_position_excess = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = start; k < samples; ++k) {
    const Vector e = traj.errors.row(k).transpose();
    const double omega_excess =
        ((cl.error_bounds.v_inverse * e).cwiseAbs() - cl.error_bounds.bound).maxCoeff();
    const double pos_excess =
        (e.head(nn).cwiseAbs() - cl.position_bound).maxCoeff();
    rep.worst_omega_excess = std::max(rep.worst_omega_excess, omega_excess);
    rep.worst_position_excess = std::max(rep.worst_position_excess, pos_excess);
    if (omega_excess <= 1e-6) ++inside;
  }
  rep.containment_fraction = double(inside) / double(samples - start);
  rep.pass = rep.settled && rep.containment_fraction >= 1.0 &&
             rep.worst_position_excess <= 1e-6;
  return rep;
}

}  // namespace formset
