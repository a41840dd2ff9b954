#include "formset/scenario.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace formset {

using nlohmann::json;

namespace {

Vector vec_from(const json& arr) {
  Vector v(arr.size());
  for (size_t i = 0; i < arr.size(); ++i) v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
  return v;
}

// Scalar broadcast or explicit per-entry array.
Vector broadcast(const json& j, Eigen::Index len, const char* what) {
  if (j.is_number()) return Vector::Constant(len, j.get<double>());
  const Vector v = vec_from(j);
  if (v.size() != len)
    throw ConfigError(std::string("config: ") + what + " has wrong length");
  return v;
}

Obstacle obstacle_from(const json& j, int dim) {
  if (j.contains("rect")) {
    if (dim != 2) throw ConfigError("config: rect obstacles need dimension 2");
    const auto r = j.at("rect");
    const double x0 = r.at(0), y0 = r.at(1), x1 = r.at(2), y1 = r.at(3);
    Matrix f(4, 2);
    f << 1, 0, -1, 0, 0, 1, 0, -1;
    Vector g(4);
    g << std::max(x0, x1), -std::min(x0, x1), std::max(y0, y1), -std::min(y0, y1);
    return Obstacle{f, g};
  }
  Obstacle o{Matrix(0, 0), Vector()};
  o.faces = Matrix(j.at("faces").size(), dim);
  o.offsets = vec_from(j.at("offsets"));
  for (size_t r = 0; r < j.at("faces").size(); ++r) {
    const Vector row = vec_from(j.at("faces")[r]);
    if (row.size() != dim) throw ConfigError("config: obstacle face dimension mismatch");
    o.faces.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  if (o.faces.rows() != o.offsets.size())
    throw ConfigError("config: obstacle faces/offsets mismatch");
  return o;
}

Box box_from(const json& j, int dim) {
  if (j.contains("rect")) {
    if (dim != 2) throw ConfigError("config: rect workspace needs dimension 2");
    const auto r = j.at("rect");
    Vector c(2), hw(2);
    c << 0.5 * (r.at(0).get<double>() + r.at(2).get<double>()),
        0.5 * (r.at(1).get<double>() + r.at(3).get<double>());
    hw << 0.5 * std::abs(r.at(2).get<double>() - r.at(0).get<double>()),
        0.5 * std::abs(r.at(3).get<double>() - r.at(1).get<double>());
    return Box{c, hw};
  }
  Box b{vec_from(j.at("center")), vec_from(j.at("half_widths"))};
  if (b.center.size() != dim || b.half_widths.size() != dim)
    throw ConfigError("config: workspace dimension mismatch");
  return b;
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  try {
    if (j.value("schema", "") != std::string("formset/1"))
      throw ConfigError("config: missing or unsupported schema (want formset/1)");

    ScenarioConfig cfg;
    cfg.dimension = j.value("dimension", 2);
    if (cfg.dimension < 1) throw ConfigError("config: dimension must be >= 1");

    if (j.contains("lff")) {
      cfg.graph = lff(j.at("lff").get<int>());
    } else if (j.contains("graph")) {
      std::vector<std::pair<int, int>> edges;
      for (const auto& e : j.at("graph").at("edges"))
        edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
      cfg.graph = make_graph(j.at("graph").at("n_agents").get<int>(), std::move(edges));
    } else if (!j.contains("lti")) {
      throw ConfigError("config: need lff, graph, or lti");
    } else {
      cfg.graph = lff(2);  // placeholder for pure-LTI configs
    }

    cfg.alpha = j.value("alpha", 1.0);
    if (cfg.alpha <= 0.0) throw ConfigError("config: alpha must be positive");

    const Eigen::Index nm = static_cast<Eigen::Index>(cfg.graph.num_edges()) * cfg.dimension;
    if (j.contains("noise")) {
      cfg.noise_position = broadcast(j.at("noise").at("position"), nm, "noise.position");
      cfg.noise_velocity = broadcast(j.at("noise").at("velocity"), nm, "noise.velocity");
    } else {
      cfg.noise_position = Vector::Zero(nm);
      cfg.noise_velocity = Vector::Zero(nm);
    }
    if (cfg.noise_position.minCoeff() < 0 || cfg.noise_velocity.minCoeff() < 0)
      throw ConfigError("config: noise bounds must be nonnegative");

    if (j.contains("corridor")) {
      cfg.mu_lower = j.at("corridor").at(0);
      cfg.mu_upper = j.at("corridor").at(1);
    }
    if (!(cfg.mu_lower < cfg.mu_upper && cfg.mu_upper < 0))
      throw ConfigError("config: corridor must satisfy lower < upper < 0");

    cfg.q_z_diag = j.contains("q_z") ? broadcast(j.at("q_z"), nm, "q_z")
                                     : Vector(Vector::Ones(nm));
    if (cfg.q_z_diag.minCoeff() <= 0)
      throw ConfigError("config: q_z diagonal must be positive");

    if (j.contains("obstacles"))
      for (const auto& o : j.at("obstacles"))
        cfg.obstacles.push_back(obstacle_from(o, cfg.dimension));
    if (j.contains("workspace")) {
      cfg.workspace = box_from(j.at("workspace"), cfg.dimension);
    } else if (!j.contains("lti")) {
      throw ConfigError("config: workspace required");
    }

    if (j.contains("anchors"))
      for (const auto& a : j.at("anchors")) {
        const Vector v = vec_from(a);
        if (v.size() != cfg.dimension)
          throw ConfigError("config: anchor dimension mismatch");
        cfg.anchors.push_back(v);
      }

    if (j.contains("synthesis")) {
      const auto& s = j.at("synthesis");
      cfg.k_min = s.value("k_min", cfg.k_min);
      cfg.k_max = s.value("k_max", cfg.k_max);
      cfg.grid = s.value("grid", cfg.grid);
      cfg.refine_iterations = s.value("refine_iterations", cfg.refine_iterations);
      cfg.delta_margin = s.value("delta_margin", cfg.delta_margin);
    }
    if (j.contains("formation")) {
      const auto& f = j.at("formation");
      cfg.margin = f.value("margin", cfg.margin);
      cfg.big_m = f.value("big_m", cfg.big_m);
      cfg.node_budget = f.value("node_budget", cfg.node_budget);
      cfg.gap_tol = f.value("gap_tol", cfg.gap_tol);
    }
    if (j.contains("sim")) {
      const auto& s = j.at("sim");
      cfg.duration = s.value("duration", cfg.duration);
      cfg.dt = s.value("dt", cfg.dt);
      cfg.settle_fraction = s.value("settle_fraction", cfg.settle_fraction);
      cfg.policy = s.value("policy", cfg.policy);
      if (s.contains("seeds"))
        for (const auto& v : s.at("seeds")) cfg.seeds.push_back(v.get<unsigned>());
    }
    if (cfg.seeds.empty()) cfg.seeds = {1};
    if (cfg.policy != "uniform" && cfg.policy != "vertex" && cfg.policy != "both")
      throw ConfigError("config: sim.policy must be uniform, vertex, or both");
    if (cfg.dt <= 0 || cfg.duration <= 0 || cfg.settle_fraction <= 0 ||
        cfg.settle_fraction >= 1)
      throw ConfigError("config: bad sim timing");

    if (j.contains("lti")) {
      const auto& l = j.at("lti");
      cfg.has_lti = true;
      const auto& rows = l.at("A");
      cfg.lti_a.resize(rows.size(), rows[0].size());
      for (size_t r = 0; r < rows.size(); ++r)
        cfg.lti_a.row(static_cast<Eigen::Index>(r)) = vec_from(rows[r]).transpose();
      const auto& d = l.at("disturbance");
      cfg.lti_disturbance.center = vec_from(d.at("center"));
      const auto& gens = d.at("generators");
      cfg.lti_disturbance.generators.resize(gens.size(), gens.empty() ? 0 : gens[0].size());
      for (size_t r = 0; r < gens.size(); ++r)
        cfg.lti_disturbance.generators.row(static_cast<Eigen::Index>(r)) =
            vec_from(gens[r]).transpose();
      cfg.lti_duration = l.value("duration", cfg.lti_duration);
      cfg.lti_dt = l.value("dt", cfg.lti_dt);
      cfg.lti_trajectories = l.value("trajectories", cfg.lti_trajectories);
    }
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const DimensionError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string default_scenario_json() {
  return R"({
  "schema": "formset/1",
  "lff": 4,
  "dimension": 2,
  "alpha": 1.0,
  "noise": {"position": 0.05, "velocity": 0.05},
  "corridor": [-10.0, -0.2],
  "q_z": 1.0,
  "workspace": {"rect": [0.0, -15.0, 120.0, 45.0]},
  "obstacles": [
    {"rect": [14.0, 14.0, 30.0, 26.0]},
    {"rect": [84.0, -15.0, 104.0, -4.0]},
    {"rect": [52.0, 28.0, 68.0, 45.0]}
  ],
  "anchors": [[10.0, 20.0], [100.0, -10.0], [60.0, 25.0]],
  "synthesis": {"grid": 60, "k_min": 0.001, "k_max": 100.0, "refine_iterations": 200},
  "formation": {"margin": 0.001, "node_budget": 100000, "gap_tol": 1e-6},
  "sim": {"duration": 60.0, "dt": 0.001, "seeds": [1, 2, 3, 4, 5, 6, 7, 8, 9, 10],
          "settle_fraction": 0.5, "policy": "both"},
  "lti": {
    "A": [[0.0, -2.0], [1.0, -3.0]],
    "disturbance": {"center": [0.0, 0.0], "generators": [[0.2, 0.0], [0.0, 0.2]]},
    "duration": 5.0, "dt": 0.0005, "trajectories": 5
  }
})";
}

Vector synthesis_disturbance(const ScenarioConfig& cfg) {
  const Matrix ht_abs =
      kron(incidence(cfg.graph).transpose(), Matrix::Identity(cfg.dimension, cfg.dimension))
          .cwiseAbs();
  const Vector per_coord = ht_abs * (cfg.noise_position + cfg.noise_velocity);
  Vector per_node(cfg.graph.n_agents);
  for (int i = 0; i < cfg.graph.n_agents; ++i)
    per_node(i) = per_coord.segment(i * cfg.dimension, cfg.dimension).maxCoeff();

  const Matrix l_mod = modified_laplacian(laplacian(cfg.graph), cfg.alpha);
  const SpectralForm lap = sym_eig(l_mod);
  return lap.vectors.transpose().cwiseAbs() * per_node;
}

SynthesisSpec make_synthesis_spec(const ScenarioConfig& cfg) {
  SynthesisSpec spec;
  const Matrix l_mod = modified_laplacian(laplacian(cfg.graph), cfg.alpha);
  spec.lambdas = sym_eig(l_mod).values;
  spec.mu_lower = cfg.mu_lower;
  spec.mu_upper = cfg.mu_upper;
  spec.d = synthesis_disturbance(cfg);
  spec.dimension = cfg.dimension;
  spec.k_min = cfg.k_min;
  spec.k_max = cfg.k_max;
  spec.grid = cfg.grid;
  spec.refine_iterations = cfg.refine_iterations;
  spec.delta_margin = cfg.delta_margin;
  return spec;
}

NoiseBounds make_noise_bounds(const ScenarioConfig& cfg) {
  return NoiseBounds{cfg.noise_position, cfg.noise_velocity};
}

}  // namespace formset
