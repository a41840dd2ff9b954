#pragma once

#include "formset/closedloop.hpp"
#include "formset/invariants.hpp"
#include "formset/topology.hpp"

namespace formset {

/// Time history of the simulated formation: stacked physical states,
/// tracking errors, and the measurement noise applied over each step.
struct Trajectory {
  double dt = 0.0;
  Vector times;   // steps + 1 samples
  Matrix states;  // row per sample, [p; v] of length 2nN
  Matrix errors;  // row per sample, [e_p; e_v]
  Matrix noises;  // row per step, [eps; xi] of length 2nM
};

/// Integrates the double-integrator agents under the noisy PD displacement
/// law with leader bias (position and velocity, matching the modified
/// Laplacian in both blocks). Noise is held constant over each RK4 step and
/// resampled by policy. leader_velocity (optional) turns the anchor into a
/// ramp reference. Aborts with NumericalError when the error diverges.
Trajectory simulate(const FormationGraph& graph, double alpha, Gains gains,
                    int dimension, const Vector& z_star, const Vector& anchor,
                    const NoiseBounds& noise, const Vector& x0, double t_final,
                    double dt, unsigned seed, SamplePolicy policy,
                    const Vector& leader_velocity = Vector());

struct InvarianceReport {
  bool settled = false;            // window starts after ~5 slowest time constants
  double containment_fraction = 0.0;
  double worst_omega_excess = 0.0;     // max over window of max(|V^-1 e| - b)
  double worst_position_excess = 0.0;  // max over window of max(|e_p| - r_p)
  bool pass = false;
};

/// Audits the last settle_fraction of the horizon against the error
/// ultimate-bounds set and the componentwise position bound.
InvarianceReport verify_invariance(const Trajectory& traj, const ClosedLoop& cl,
                                   double settle_fraction = 0.5);

/// Target positions anchored at the leader: least-squares solution of the
/// stacked anchoring + incidence system (exact for cycle-consistent z_star).
Vector target_positions(const FormationGraph& graph, int dimension,
                        const Vector& z_star, const Vector& anchor);

}  // namespace formset
