#pragma once

#include <utility>
#include <vector>

#include "formset/matcore.hpp"

namespace formset {

/// Set {c + G*l : ||l||_inf <= 1}. Generators are the columns of G.
struct Zonotope {
  Vector center;
  Matrix generators;
};

/// Axis-aligned box {x : |x - center| <= half_widths}.
struct Box {
  Vector center;
  Vector half_widths;
};

/// Componentwise steady-state bound of a disturbed stable LTI system,
/// derived from the eigenstructure of the dynamics matrix. Both the
/// non-conservative set omega = {x : |V^-1 x| <= b} and its bounding box
/// (half-widths |V| b) are robust positively invariant.
struct UltimateBounds {
  SpectralForm spectral;
  Matrix v_inverse;
  Vector bound;  // b >= 0
  Box box;       // centered at the origin
};

/// Eq.-(4)-style bound from an externally supplied factorization. The
/// eigenvector normalization of `spectral` is preserved (the resulting set
/// is scale-invariant, the bound vector itself is not).
UltimateBounds ultimate_bounds(const SpectralForm& spectral, const Zonotope& disturbance);

/// Same, factorizing `a` internally (real diagonalizable Hurwitz required).
UltimateBounds ultimate_bounds(const Matrix& a, const Zonotope& disturbance);

/// Zonotope form <0, V ⊙ (1 b')> of the ultimate-bounds set; generator j is
/// b_j times eigenvector j.
Zonotope ub_zonotope(const UltimateBounds& ub);

/// Closed-form volume expression (2 det V prod b)^2. Invariant under
/// rescaling of the eigenvector columns; not the Lebesgue volume (see
/// volume_exact for that).
double volume_paper(const UltimateBounds& ub);

/// Lebesgue volume 2^n |det G| of a zonotope with square generator matrix;
/// for n = 2 with extra generators, the pairwise-determinant sum.
double volume_exact(const Zonotope& z);

/// Support function h(d) = d'c + ||G'd||_1.
double support(const Zonotope& z, const Vector& direction);

bool box_contains(const Box& b, const Vector& x, double tol = Tol::membership);
bool omega_contains(const UltimateBounds& ub, const Vector& x, double tol = Tol::membership);

/// H-representation of {F x <= g} ⊕ box for an origin-centered box:
/// (F, g + |F| r). Exact for box inflation.
std::pair<Matrix, Vector> inflate_polyhedron(const Matrix& f, const Vector& g, const Box& box);

enum class SamplePolicy { uniform, vertex, alternate };

struct RpiTrajectory {
  bool entered = false;
  double entry_time = 0.0;
  int post_entry_exits = 0;
  bool final_inside = false;
};

struct RpiReport {
  std::vector<RpiTrajectory> trajectories;
  std::vector<Matrix> paths;  // states per step, only when record_paths
  bool pass = false;  // every trajectory entered and never exited afterwards
};

/// Simulates x' = Ax + d from random starts inside the bounding box, with
/// per-step disturbances sampled by policy (alternate = odd trajectories
/// vertex, even uniform), and audits entry into / permanence in the
/// ultimate-bounds set.
RpiReport rpi_check_sampled(const Matrix& a, const Zonotope& disturbance,
                            const UltimateBounds& ub, double dt, double t_final,
                            int n_trajectories, unsigned seed,
                            SamplePolicy policy = SamplePolicy::alternate,
                            bool record_paths = false);

}  // namespace formset
