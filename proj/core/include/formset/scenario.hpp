#pragma once

#include <string>
#include <vector>

#include "formset/closedloop.hpp"
#include "formset/gainsynth.hpp"
#include "formset/invariants.hpp"
#include "formset/tightform.hpp"
#include "formset/topology.hpp"

namespace formset {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parsed "formset/1" scenario. Either an LFF agent count or an explicit
/// graph; noise scalars are broadcast to per-edge-coordinate vectors.
struct ScenarioConfig {
  FormationGraph graph;
  int dimension = 2;
  double alpha = 1.0;
  Vector noise_position;  // length nM
  Vector noise_velocity;  // length nM
  double mu_lower = -10.0;
  double mu_upper = -0.05;
  Vector q_z_diag;        // length nM
  std::vector<Obstacle> obstacles;
  Box workspace;
  std::vector<Vector> anchors;

  // Synthesis controls.
  double k_min = 1e-3;
  double k_max = 1e2;
  int grid = 60;
  int refine_iterations = 200;
  double delta_margin = 1e-6;

  // Tight-formation controls.
  double margin = 1e-3;
  double big_m = 0.0;
  long node_budget = 100000;
  double gap_tol = 1e-6;

  // Simulation controls.
  double duration = 60.0;
  double dt = 1e-3;
  std::vector<unsigned> seeds;
  double settle_fraction = 0.5;
  std::string policy = "both";  // "uniform" | "vertex" | "both"

  // Standalone LTI mode for the ub command.
  bool has_lti = false;
  Matrix lti_a;
  Zonotope lti_disturbance;
  double lti_duration = 5.0;
  double lti_dt = 5e-4;
  int lti_trajectories = 5;
};

ScenarioConfig parse_scenario(const std::string& json_text);
ScenarioConfig load_scenario(const std::string& path);

/// The shipped default: the 4-agent LFF demo with stand-in obstacles in a
/// 120x60 workspace and the three leader anchors, plus the 2-D LTI example.
std::string default_scenario_json();

/// Per-mode disturbance term d for the synthesis volume objective: the
/// gain-independent per-node noise surrogate |H~'|(eps+xi), reduced to one
/// scalar per node (max over axes), mapped through |V'|.
Vector synthesis_disturbance(const ScenarioConfig& cfg);

SynthesisSpec make_synthesis_spec(const ScenarioConfig& cfg);
NoiseBounds make_noise_bounds(const ScenarioConfig& cfg);

}  // namespace formset
