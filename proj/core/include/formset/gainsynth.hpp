#pragma once

#include "formset/closedloop.hpp"
#include "formset/matcore.hpp"

namespace formset {

/// Inputs of the gain-synthesis problem: minimize the error-set volume over
/// (k_p, k_v) subject to a real closed-loop spectrum inside the corridor
/// [mu_lower, mu_upper], both strictly negative.
struct SynthesisSpec {
  Vector lambdas;   // modified-Laplacian eigenvalues, all > 0
  double mu_lower = -10.0;
  double mu_upper = -0.05;
  Vector d;         // per-mode disturbance term of the volume formula
  int dimension = 2;
  double k_min = 1e-3;  // log-spaced search box for both gains
  double k_max = 1e2;
  int grid = 60;
  int refine_iterations = 200;
  double delta_margin = 1e-6;
  double penalty = 1e6;
};

struct ConstraintMargins {
  Vector delta;     // Delta_i - margin*(k_v l_i)^2, >= 0 when feasible
  Vector mu_low;    // mu - mu_lower for both roots, stacked [+ ; -]
  Vector mu_high;   // mu_upper - mu for both roots
  double worst = 0.0;
  int violated_mode = -1;  // Laplacian mode index of the worst violation
};

struct FeasibilityReport {
  bool feasible = false;
  ConstraintMargins margins;
};

/// Checks the discriminant and corridor constraints for both closed-loop
/// roots of every mode, returning per-constraint slack.
FeasibilityReport feasible(Gains gains, const SynthesisSpec& spec);

struct SynthesisResult {
  bool feasible = false;
  Gains gains;
  double volume = 0.0;
  double log_volume = 0.0;
  Gains grid_gains;          // incumbent of the grid phase
  double grid_log_volume = 0.0;
  ConstraintMargins margins;
  Vector mu;                 // all closed-loop eigenvalues at the optimum
};

/// Two-phase synthesis: dense log-spaced grid, then derivative-free
/// (Nelder-Mead) refinement with constraint penalties. The returned point
/// is always feasible and never worse than the grid incumbent.
SynthesisResult synthesize(const SynthesisSpec& spec);

}  // namespace formset
