#include "formset/closedloop.hpp"

#include <cmath>

namespace formset {

namespace {

void check_gains(Gains g) {
  if (g.k_p <= 0.0 || g.k_v <= 0.0)
    throw DimensionError("gains must be strictly positive");
}

}  // namespace

Matrix error_dynamics(const Matrix& l_mod, Gains gains, int dimension) {
  check_gains(gains);
  if (l_mod.rows() != l_mod.cols() || dimension < 1)
    throw DimensionError("error_dynamics: bad Laplacian or dimension");
  const Eigen::Index nn = l_mod.rows() * dimension;
  const Matrix l_tilde = kron(l_mod, Matrix::Identity(dimension, dimension));
  Matrix gamma = Matrix::Zero(2 * nn, 2 * nn);
  gamma.topRightCorner(nn, nn).setIdentity();
  gamma.bottomLeftCorner(nn, nn) = -gains.k_p * l_tilde;
  gamma.bottomRightCorner(nn, nn) = -gains.k_v * l_tilde;
  return gamma;
}

Matrix disturbance_matrix(const Matrix& h, Gains gains, int dimension) {
  check_gains(gains);
  const Matrix ht = kron(h.transpose(), Matrix::Identity(dimension, dimension));
  const Eigen::Index nn = ht.rows();
  const Eigen::Index nm = ht.cols();
  Matrix e = Matrix::Zero(2 * nn, 2 * nm);
  e.bottomLeftCorner(nn, nm) = -gains.k_p * ht;
  e.bottomRightCorner(nn, nm) = -gains.k_v * ht;
  return e;
}

ClosedLoop factorize(const Matrix& l_mod, Gains gains, int dimension,
                     double delta_margin) {
  check_gains(gains);
  const SpectralForm lap = sym_eig(l_mod);
  if (lap.values.minCoeff() <= 0.0)
    throw NumericalError("factorize: Laplacian not positive definite (missing leader bias?)");

  const Eigen::Index n_agents = lap.values.size();
  ClosedLoop cl;
  cl.gains = gains;
  cl.dimension = dimension;
  cl.lap_vectors = lap.vectors;
  cl.lap_values = lap.values;
  cl.discriminants.resize(n_agents);
  cl.mu_plus.resize(n_agents);
  cl.mu_minus.resize(n_agents);
  for (Eigen::Index i = 0; i < n_agents; ++i) {
    const double l = lap.values(i);
    const double kvl = gains.k_v * l;
    const double delta = kvl * kvl - 4.0 * gains.k_p * l;
    if (delta <= delta_margin * kvl * kvl)
      throw NumericalError("factorize: complex or defective closed-loop spectrum; infeasible gains");
    cl.discriminants(i) = delta;
    const double root = std::sqrt(delta);
    cl.mu_plus(i) = 0.5 * (-kvl + root);
    cl.mu_minus(i) = 0.5 * (-kvl - root);
  }

  const Matrix eye_n = Matrix::Identity(dimension, dimension);
  Matrix v_small(2 * n_agents, 2 * n_agents);
  v_small.topLeftCorner(n_agents, n_agents) = lap.vectors;
  v_small.topRightCorner(n_agents, n_agents) = lap.vectors;
  v_small.bottomLeftCorner(n_agents, n_agents) = lap.vectors * cl.mu_plus.asDiagonal();
  v_small.bottomRightCorner(n_agents, n_agents) = lap.vectors * cl.mu_minus.asDiagonal();
  cl.v_gamma = kron(v_small, eye_n);

  Vector mu_stack(2 * n_agents);
  mu_stack.head(n_agents) = cl.mu_plus;
  mu_stack.tail(n_agents) = cl.mu_minus;
  cl.lambda_gamma = kron(mu_stack, Vector::Ones(dimension));

  cl.gamma = error_dynamics(l_mod, gains, dimension);
  const Matrix recon = cl.v_gamma * cl.lambda_gamma.asDiagonal() *
                       cl.v_gamma.partialPivLu().inverse();
  if (max_abs(recon - cl.gamma) > Tol::residual * max_abs(cl.gamma))
    throw NumericalError("factorize: factorization residual out of tolerance");
  return cl;
}

Matrix v_gamma_inverse(const ClosedLoop& cl) {
  const Eigen::Index n_agents = cl.lap_values.size();
  const Vector s = cl.mu_minus - cl.mu_plus;  // diag entries -sqrt(Delta_i)
  if (s.cwiseAbs().minCoeff() == 0.0)
    throw NumericalError("v_gamma_inverse: singular S (repeated closed-loop roots)");
  const Vector s_inv = s.cwiseInverse();
  const Matrix v_inv = cl.lap_vectors.transpose();  // orthonormal V

  const Vector s_inv_mu = s_inv.cwiseProduct(cl.mu_plus);
  Matrix inv_small(2 * n_agents, 2 * n_agents);
  inv_small.topLeftCorner(n_agents, n_agents) = v_inv + s_inv_mu.asDiagonal() * v_inv;
  inv_small.topRightCorner(n_agents, n_agents) = -(s_inv.asDiagonal() * v_inv);
  inv_small.bottomLeftCorner(n_agents, n_agents) = -(s_inv_mu.asDiagonal() * v_inv);
  inv_small.bottomRightCorner(n_agents, n_agents) = s_inv.asDiagonal() * v_inv;
  return kron(inv_small, Matrix::Identity(cl.dimension, cl.dimension));
}

DBlocks d_blocks(const ClosedLoop& cl) {
  const Eigen::Index n_agents = cl.lap_values.size();
  DBlocks d;
  d.d11.resize(n_agents);
  d.d12.resize(n_agents);
  d.d21.resize(n_agents);
  d.d22.resize(n_agents);
  for (Eigen::Index i = 0; i < n_agents; ++i) {
    const double kvl = cl.gains.k_v * cl.lap_values(i);
    const double root = std::sqrt(cl.discriminants(i));
    d.d11(i) = (kvl + root) / (root * (kvl - root));
    // The block product [(L- - L+) L+]^{-1} is positive for stable real
    // spectra; the sign differs from the printed form, magnitudes agree.
    d.d12(i) = 2.0 / (root * (kvl - root));
    d.d21(i) = (root - kvl) / (root * (kvl + root));
    d.d22(i) = -2.0 / (root * (kvl + root));
  }
  return d;
}

Vector b_gamma(const ClosedLoop& cl, const Vector& delta_bar) {
  const Eigen::Index n_agents = cl.lap_values.size();
  const Eigen::Index n = cl.dimension;
  Vector per_node(n_agents);
  if (delta_bar.size() == n_agents) {
    per_node = delta_bar;
  } else if (delta_bar.size() == 2 * n * n_agents) {
    // Validate the uniform-across-half-blocks structure and reduce.
    for (Eigen::Index i = 0; i < n_agents; ++i) {
      const double v = delta_bar(i * n);
      per_node(i) = v;
      for (Eigen::Index a = 0; a < n; ++a) {
        if (std::abs(delta_bar(i * n + a) - v) > 1e-12 * (1.0 + std::abs(v)) ||
            std::abs(delta_bar(n * n_agents + i * n + a) - v) >
                1e-12 * (1.0 + std::abs(v)))
          throw DimensionError("b_gamma: disturbance box is not uniform across half-blocks");
      }
    }
  } else {
    throw DimensionError("b_gamma: delta_bar must have length N or 2nN");
  }
  if (per_node.minCoeff() < 0.0)
    throw DimensionError("b_gamma: negative disturbance bound");

  const Vector d_bar = cl.lap_vectors.transpose().cwiseAbs() * per_node;
  Vector b(2 * n_agents);
  for (Eigen::Index i = 0; i < n_agents; ++i) {
    const double kvl = cl.gains.k_v * cl.lap_values(i);
    const double root = std::sqrt(cl.discriminants(i));
    b(i) = (2.0 + kvl + root) / (root * (kvl - root)) * d_bar(i);
    b(i + n_agents) = (2.0 + kvl - root) / (root * (kvl + root)) * d_bar(i);
  }
  return kron(b, Vector::Ones(n));
}

double det_v_gamma_closed_form(const ClosedLoop& cl) {
  const double det_v = cl.lap_vectors.determinant();
  double prod = 1.0;
  for (Eigen::Index i = 0; i < cl.discriminants.size(); ++i)
    prod *= -std::sqrt(cl.discriminants(i));
  return std::pow(det_v * det_v * prod, double(cl.dimension));
}

double log_volume_closed_form(Gains gains, const Vector& lambdas, const Vector& d,
                              int dimension) {
  check_gains(gains);
  double log_sum = 0.0;
  for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
    const double l = lambdas(i);
    const double kvl = gains.k_v * l;
    const double delta = kvl * kvl - 4.0 * gains.k_p * l;
    if (delta <= 0.0 || l <= 0.0)
      throw NumericalError("volume_closed_form: nonpositive discriminant");
    const double mode = (1.0 + l * (gains.k_p + gains.k_v)) /
                        (std::sqrt(delta) * gains.k_p * l);
    log_sum += 2.0 * std::log(std::abs(d(i))) + dimension * std::log(mode);
  }
  return 2.0 * log_sum;  // (det V)^{2n} = 1 for orthonormal V
}

double volume_closed_form(Gains gains, const Vector& lambdas, const Vector& d,
                          int dimension) {
  return std::exp(log_volume_closed_form(gains, lambdas, d, dimension));
}

ClosedLoop analyze(const FormationGraph& graph, double alpha, Gains gains,
                   int dimension, const NoiseBounds& noise, double delta_margin) {
  const Eigen::Index nm = static_cast<Eigen::Index>(graph.num_edges()) * dimension;
  if (noise.position.size() != nm || noise.velocity.size() != nm)
    throw DimensionError("analyze: noise bounds must have length n*M");
  if (noise.position.minCoeff() < 0.0 || noise.velocity.minCoeff() < 0.0)
    throw DimensionError("analyze: noise bounds must be nonnegative");

  const Matrix l_mod = modified_laplacian(laplacian(graph), alpha);
  ClosedLoop cl = factorize(l_mod, gains, dimension, delta_margin);
  cl.graph = graph;
  cl.noise_input = disturbance_matrix(incidence(graph), gains, dimension);

  Vector noise_stack(2 * nm);
  noise_stack.head(nm) = noise.position;
  noise_stack.tail(nm) = noise.velocity;
  cl.state_disturbance = Zonotope{Vector::Zero(cl.gamma.rows()),
                                  cl.noise_input * noise_stack.asDiagonal()};

  cl.error_bounds = ultimate_bounds(SpectralForm{cl.v_gamma, cl.lambda_gamma},
                                    cl.state_disturbance);
  cl.b_tilde = cl.error_bounds.bound;
  cl.position_bound = cl.error_bounds.box.half_widths.head(cl.gamma.rows() / 2);
  cl.has_noise = true;
  return cl;
}

}  // namespace formset
