#include "formset/gainsynth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "formset/parallel.hpp"

namespace formset {

FeasibilityReport feasible(Gains gains, const SynthesisSpec& spec) {
  const Eigen::Index n = spec.lambdas.size();
  FeasibilityReport rep;
  rep.margins.delta.resize(n);
  rep.margins.mu_low.resize(2 * n);
  rep.margins.mu_high.resize(2 * n);
  rep.margins.worst = std::numeric_limits<double>::infinity();
  rep.feasible = gains.k_p > 0.0 && gains.k_v > 0.0;
  if (!rep.feasible) {
    rep.margins.worst = -std::numeric_limits<double>::infinity();
    return rep;
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    const double l = spec.lambdas(i);
    const double kvl = gains.k_v * l;
    const double delta = kvl * kvl - 4.0 * gains.k_p * l;
    rep.margins.delta(i) = delta - spec.delta_margin * kvl * kvl;
    const double root = std::sqrt(std::max(delta, 0.0));
    const std::array<double, 2> mu = {0.5 * (-kvl + root), 0.5 * (-kvl - root)};
    for (int s = 0; s < 2; ++s) {
      rep.margins.mu_low(i + s * n) = mu[static_cast<size_t>(s)] - spec.mu_lower;
      rep.margins.mu_high(i + s * n) = spec.mu_upper - mu[static_cast<size_t>(s)];
    }
    const double mode_worst =
        std::min({rep.margins.delta(i), rep.margins.mu_low(i), rep.margins.mu_low(i + n),
                  rep.margins.mu_high(i), rep.margins.mu_high(i + n)});
    if (mode_worst < rep.margins.worst) {
      rep.margins.worst = mode_worst;
      if (mode_worst < 0.0) rep.margins.violated_mode = static_cast<int>(i);
    }
  }
  rep.feasible = rep.margins.worst >= 0.0;
  if (rep.feasible) rep.margins.violated_mode = -1;
  return rep;
}

namespace {

constexpr double kHuge = 1e30;

// Penalized objective over x = (log k_p, log k_v).
double penalized(const SynthesisSpec& spec, const Eigen::Vector2d& x) {
  const Gains g{std::exp(x(0)), std::exp(x(1))};
  double box_violation = 0.0;
  const double lo = std::log(spec.k_min), hi = std::log(spec.k_max);
  for (int i = 0; i < 2; ++i) {
    box_violation += std::max(0.0, lo - x(i)) + std::max(0.0, x(i) - hi);
  }
  const FeasibilityReport rep = feasible(g, spec);
  if (!rep.feasible || box_violation > 0.0) {
    const double infeas = std::max(0.0, -rep.margins.worst);
    return kHuge + spec.penalty * (infeas + box_violation);
  }
  return log_volume_closed_form(g, spec.lambdas, spec.d, spec.dimension);
}

}  // namespace

SynthesisResult synthesize(const SynthesisSpec& spec) {
  if (spec.lambdas.size() == 0 || spec.d.size() != spec.lambdas.size())
    throw DimensionError("synthesize: lambdas/d size mismatch");
  if (!(spec.mu_lower < spec.mu_upper && spec.mu_upper < 0.0))
    throw DimensionError("synthesize: corridor must satisfy mu_lower < mu_upper < 0");

  const int g = std::max(spec.grid, 2);
  const double lo = std::log(spec.k_min), hi = std::log(spec.k_max);
  auto coord = [&](int i) { return lo + (hi - lo) * double(i) / double(g - 1); };

  std::vector<double> values(static_cast<size_t>(g) * static_cast<size_t>(g), kHuge);
  parallel_for(g, [&](int i) {
    for (int j = 0; j < g; ++j) {
      const Gains gains{std::exp(coord(i)), std::exp(coord(j))};
      if (feasible(gains, spec).feasible)
        values[static_cast<size_t>(i) * static_cast<size_t>(g) + static_cast<size_t>(j)] =
            log_volume_closed_form(gains, spec.lambdas, spec.d, spec.dimension);
    }
  });

  SynthesisResult res;
  double best = kHuge;
  int best_i = -1, best_j = -1;
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) {
      const double v = values[static_cast<size_t>(i) * static_cast<size_t>(g) + static_cast<size_t>(j)];
      if (v < best) {
        best = v;
        best_i = i;
        best_j = j;
      }
    }
  if (best_i < 0) {
    res.feasible = false;  // infeasible corridor within the search box
    return res;
  }
  res.grid_gains = Gains{std::exp(coord(best_i)), std::exp(coord(best_j))};
  res.grid_log_volume = best;

  // Nelder-Mead refinement in log-gain space; the incumbent only improves.
  Eigen::Vector2d incumbent_x(coord(best_i), coord(best_j));
  double incumbent_f = best;
  std::array<Eigen::Vector2d, 3> simplex = {
      incumbent_x, incumbent_x + Eigen::Vector2d(0.08, 0.0),
      incumbent_x + Eigen::Vector2d(0.0, 0.08)};
  std::array<double, 3> f{};
  for (int k = 0; k < 3; ++k) f[static_cast<size_t>(k)] = penalized(spec, simplex[static_cast<size_t>(k)]);

  auto track = [&](const Eigen::Vector2d& x, double fx) {
    if (fx < incumbent_f) {
      incumbent_f = fx;
      incumbent_x = x;
    }
  };
  for (int iter = 0; iter < spec.refine_iterations; ++iter) {
    std::array<int, 3> ord = {0, 1, 2};
    std::sort(ord.begin(), ord.end(), [&](int a, int b) {
      return f[static_cast<size_t>(a)] < f[static_cast<size_t>(b)];
    });
    const auto lo_i = static_cast<size_t>(ord[0]);
    const auto mid_i = static_cast<size_t>(ord[1]);
    const auto hi_i = static_cast<size_t>(ord[2]);
    track(simplex[lo_i], f[lo_i]);

    const Eigen::Vector2d centroid = 0.5 * (simplex[lo_i] + simplex[mid_i]);
    const Eigen::Vector2d reflect = centroid + (centroid - simplex[hi_i]);
    const double f_r = penalized(spec, reflect);
    track(reflect, f_r);
    if (f_r < f[lo_i]) {
      const Eigen::Vector2d expand = centroid + 2.0 * (centroid - simplex[hi_i]);
      const double f_e = penalized(spec, expand);
      track(expand, f_e);
      simplex[hi_i] = f_e < f_r ? expand : reflect;
      f[hi_i] = std::min(f_e, f_r);
    } else if (f_r < f[mid_i]) {
      simplex[hi_i] = reflect;
      f[hi_i] = f_r;
    } else {
      const Eigen::Vector2d contract =
          centroid + 0.5 * ((f_r < f[hi_i] ? reflect : simplex[hi_i]) - centroid);
      const double f_c = penalized(spec, contract);
      track(contract, f_c);
      if (f_c < std::min(f_r, f[hi_i])) {
        simplex[hi_i] = contract;
        f[hi_i] = f_c;
      } else {
        for (size_t k = 0; k < 3; ++k) {
          if (k == lo_i) continue;
          simplex[k] = simplex[lo_i] + 0.5 * (simplex[k] - simplex[lo_i]);
          f[k] = penalized(spec, simplex[k]);
          track(simplex[k], f[k]);
        }
      }
    }
  }

  res.feasible = true;
  res.gains = Gains{std::exp(incumbent_x(0)), std::exp(incumbent_x(1))};
  res.log_volume = incumbent_f;
  res.volume = std::exp(incumbent_f);
  const FeasibilityReport rep = feasible(res.gains, spec);
  res.margins = rep.margins;
  const Eigen::Index n = spec.lambdas.size();
  res.mu.resize(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double kvl = res.gains.k_v * spec.lambdas(i);
    const double root = std::sqrt(std::max(kvl * kvl - 4.0 * res.gains.k_p * spec.lambdas(i), 0.0));
    res.mu(i) = 0.5 * (-kvl + root);
    res.mu(i + n) = 0.5 * (-kvl - root);
  }
  return res;
}

}  // namespace formset
