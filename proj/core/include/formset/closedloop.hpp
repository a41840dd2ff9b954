#pragma once

#include "formset/invariants.hpp"
#include "formset/matcore.hpp"
#include "formset/topology.hpp"

namespace formset {

/// Proportional and derivative gains of the displacement control law.
struct Gains {
  double k_p = 0.0;  // 1/s^2
  double k_v = 0.0;  // 1/s
};

/// Elementwise bounds on the relative position / velocity measurement
/// noise, one entry per edge coordinate (length n*M each).
struct NoiseBounds {
  Vector position;  // eps_bar, m
  Vector velocity;  // xi_bar, m/s
};

/// Tracking-error closed loop of the noisy PD displacement controller:
/// state matrix, closed-form spectral factorization, and (after analyze())
/// the ultimate-bounds set of the error dynamics.
struct ClosedLoop {
  FormationGraph graph;  // populated by analyze()
  Gains gains;
  int dimension = 0;

  Matrix gamma;          // 2nN x 2nN state matrix
  Matrix v_gamma;        // closed-form eigenvector matrix [[V,V],[VL+,VL-]] ⊗ I_n
  Vector lambda_gamma;   // [mu+ ; mu-] ⊗ 1_n
  Matrix lap_vectors;    // orthonormal eigenvectors of the modified Laplacian
  Vector lap_values;     // ascending, all > 0
  Vector mu_plus;        // per Laplacian mode
  Vector mu_minus;
  Vector discriminants;  // Delta_i = (k_v l_i)^2 - 4 k_p l_i

  // Noise-dependent quantities (analyze() only).
  bool has_noise = false;
  Matrix noise_input;           // E, 2nN x 2nM
  Zonotope state_disturbance;   // <0, E diag(eps,xi)>
  UltimateBounds error_bounds;  // direct ultimate-bounds pipeline on gamma
  Vector b_tilde;               // bound vector of error_bounds
  Vector position_bound;        // r_p, first nN half-widths of the error box
};

/// State matrix [[0, I], [-k_p L⊗I_n, -k_v L⊗I_n]] of the tracking error.
Matrix error_dynamics(const Matrix& l_mod, Gains gains, int dimension);

/// Noise input matrix [[0, 0], [-k_p H~', -k_v H~']]; noise enters through
/// the accelerations only.
Matrix disturbance_matrix(const Matrix& h, Gains gains, int dimension);

/// Closed-form spectral factorization of the error dynamics built on a
/// symmetric positive definite (modified) Laplacian. Requires every mode
/// discriminant to clear delta_margin*(k_v l_i)^2; throws NumericalError
/// ("infeasible gains") otherwise.
ClosedLoop factorize(const Matrix& l_mod, Gains gains, int dimension,
                     double delta_margin = 1e-6);

/// Closed-form (Schur complement) inverse of the eigenvector matrix.
Matrix v_gamma_inverse(const ClosedLoop& cl);

/// Diagonals of the four D blocks entering the elementwise bound formulas.
struct DBlocks {
  Vector d11, d12, d21, d22;
};
DBlocks d_blocks(const ClosedLoop& cl);

/// Elementwise ultimate-bound vector for a uniform disturbance box
/// replicated across both state half-blocks. `delta_bar` is either the
/// per-node bound (length N) or the full 2nN vector with that structure.
/// Returns b~ of length 2nN.
Vector b_gamma(const ClosedLoop& cl, const Vector& delta_bar);

/// Closed-form determinant ([det V]^2 prod(-sqrt(Delta_i)))^n.
double det_v_gamma_closed_form(const ClosedLoop& cl);

/// Gain-parameterized volume of the error ultimate-bounds set,
/// [ (det V)^{2n} prod d_i^2 ((1+l_i(k_p+k_v))/(sqrt(Delta_i) k_p l_i))^n ]^2
/// with orthonormal V (det V = ±1). Monotone transform of the true volume;
/// the argmin over gains is shared.
double volume_closed_form(Gains gains, const Vector& lambdas, const Vector& d,
                          int dimension);

/// log of volume_closed_form; overflow-safe objective for synthesis sweeps.
double log_volume_closed_form(Gains gains, const Vector& lambdas, const Vector& d,
                              int dimension);

/// Full pipeline: modified Laplacian, factorization, physical noise input,
/// and the Prop.-1 error bounds with position box r_p.
ClosedLoop analyze(const FormationGraph& graph, double alpha, Gains gains,
                   int dimension, const NoiseBounds& noise,
                   double delta_margin = 1e-6);

}  // namespace formset
