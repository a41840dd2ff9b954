#pragma once

#include <string>

#include "formset/closedloop.hpp"
#include "formset/gainsynth.hpp"
#include "formset/invariants.hpp"
#include "formset/simkit.hpp"
#include "formset/tightform.hpp"
#include "formset/topology.hpp"

namespace formset {

// JSON wire formats. Zonotope: {"center":[...], "generators":[[row],...]}
// (rows of G). Box: {"center":[...], "half_widths":[...]}. Graph:
// {"n_agents":N, "edges":[[head,tail],...]} with 1-based vertices.

std::string to_json(const Zonotope& z);
std::string to_json(const Box& b);
std::string to_json(const FormationGraph& g);

Zonotope zonotope_from_json(const std::string& text);
Box box_from_json(const std::string& text);
FormationGraph graph_from_json(const std::string& text);

/// Gains, Laplacian and closed-loop eigenvalues, bound vector and per-agent
/// position bound box of an analyzed loop.
std::string closed_loop_summary_json(const ClosedLoop& cl);

/// {"k_p","k_v","volume","mu","margins",...}; direct_volume is the Prop.-1
/// re-evaluation of the winning gains (NaN-free: pass 0 when unavailable).
std::string synthesis_result_json(const SynthesisResult& res, double direct_volume);

std::string solution_json(const TightFormationSolution& sol, const VerifyReport& rep);

/// CSV with one metadata comment line, a header row, then per-sample rows
/// t, p_{i,d}, v_{i,d}, ep_{i,d}, ev_{i,d}.
std::string trajectory_csv(const Trajectory& traj, int n_agents, int dimension,
                           const std::string& metadata);

}  // namespace formset
