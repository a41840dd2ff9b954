#include "formset/serialize.hpp"

#include <cstdio>

#include <nlohmann/json.hpp>

namespace formset {

using nlohmann::json;

namespace {

json vec_to_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

json mat_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Vector vec_from_json(const json& arr) {
  Vector v(arr.size());
  for (size_t i = 0; i < arr.size(); ++i) v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
  return v;
}

Matrix mat_from_json(const json& rows) {
  if (rows.empty()) return Matrix(0, 0);
  Matrix m(rows.size(), rows[0].size());
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size())
      throw DimensionError("json matrix: ragged rows");
    for (size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j].get<double>();
  }
  return m;
}

}  // namespace

std::string to_json(const Zonotope& z) {
  json j;
  j["center"] = vec_to_json(z.center);
  j["generators"] = mat_to_json(z.generators);
  return j.dump();
}

std::string to_json(const Box& b) {
  json j;
  j["center"] = vec_to_json(b.center);
  j["half_widths"] = vec_to_json(b.half_widths);
  return j.dump();
}

std::string to_json(const FormationGraph& g) {
  json j;
  j["n_agents"] = g.n_agents;
  json edges = json::array();
  for (const auto& [head, tail] : g.edges) edges.push_back(json::array({head, tail}));
  j["edges"] = std::move(edges);
  return j.dump();
}

Zonotope zonotope_from_json(const std::string& text) {
  const json j = json::parse(text);
  Zonotope z{vec_from_json(j.at("center")), mat_from_json(j.at("generators"))};
  if (z.generators.size() > 0 && z.generators.rows() != z.center.size())
    throw DimensionError("zonotope json: generator row count != center length");
  if (!z.center.allFinite() || !z.generators.allFinite())
    throw DimensionError("zonotope json: non-finite entries");
  return z;
}

Box box_from_json(const std::string& text) {
  const json j = json::parse(text);
  Box b{vec_from_json(j.at("center")), vec_from_json(j.at("half_widths"))};
  if (b.half_widths.size() != b.center.size())
    throw DimensionError("box json: length mismatch");
  if (b.half_widths.minCoeff() < 0.0)
    throw DimensionError("box json: negative half-width");
  return b;
}

FormationGraph graph_from_json(const std::string& text) {
  const json j = json::parse(text);
  std::vector<std::pair<int, int>> edges;
  for (const auto& e : j.at("edges"))
    edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  return make_graph(j.at("n_agents").get<int>(), std::move(edges));
}

std::string closed_loop_summary_json(const ClosedLoop& cl) {
  json j;
  j["k_p"] = cl.gains.k_p;
  j["k_v"] = cl.gains.k_v;
  j["dimension"] = cl.dimension;
  j["lambda"] = vec_to_json(cl.lap_values);
  j["mu_plus"] = vec_to_json(cl.mu_plus);
  j["mu_minus"] = vec_to_json(cl.mu_minus);
  if (cl.has_noise) {
    j["b_gamma"] = vec_to_json(cl.b_tilde);
    j["r_p"] = vec_to_json(cl.position_bound);
  }
  return j.dump();
}

std::string synthesis_result_json(const SynthesisResult& res, double direct_volume) {
  json j;
  j["feasible"] = res.feasible;
  if (res.feasible) {
    j["k_p"] = res.gains.k_p;
    j["k_v"] = res.gains.k_v;
    j["volume"] = res.volume;
    j["log_volume"] = res.log_volume;
    j["mu"] = vec_to_json(res.mu);
    j["margins"] = {{"delta", vec_to_json(res.margins.delta)},
                    {"mu_low", vec_to_json(res.margins.mu_low)},
                    {"mu_high", vec_to_json(res.margins.mu_high)},
                    {"worst", res.margins.worst}};
    j["grid"] = {{"k_p", res.grid_gains.k_p},
                 {"k_v", res.grid_gains.k_v},
                 {"log_volume", res.grid_log_volume}};
    j["direct_volume"] = direct_volume;
  }
  return j.dump();
}

std::string solution_json(const TightFormationSolution& sol, const VerifyReport& rep) {
  json j;
  j["feasible"] = sol.feasible;
  if (sol.feasible) {
    j["p_star"] = vec_to_json(sol.p_star);
    j["z_star"] = vec_to_json(sol.z_star);
    j["objective"] = sol.objective;
    j["gap"] = sol.gap;
    j["optimal"] = sol.optimal;
    j["nodes"] = sol.nodes_explored;
    j["margins"] = {{"anchor_error", rep.anchor_error},
                    {"separation", rep.worst_separation},
                    {"obstacle", rep.worst_obstacle},
                    {"workspace", rep.worst_workspace},
                    {"pass", rep.pass}};
  }
  return j.dump();
}

std::string trajectory_csv(const Trajectory& traj, int n_agents, int dimension,
                           const std::string& metadata) {
  std::string out = "# " + metadata + "\n";
  out += "t";
  const char* fields[] = {"p", "v", "ep", "ev"};
  for (const char* f : fields)
    for (int i = 1; i <= n_agents; ++i)
      for (int d = 1; d <= dimension; ++d)
        out += "," + std::string(f) + "_" + std::to_string(i) + "_" + std::to_string(d);
  out += "\n";

  char buf[32];
  auto append = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
  };
  const Eigen::Index nn = static_cast<Eigen::Index>(n_agents) * dimension;
  for (Eigen::Index k = 0; k < traj.times.size(); ++k) {
    append(traj.times(k));
    for (Eigen::Index c = 0; c < 2 * nn; ++c) {
      out += ",";
      append(traj.states(k, c));
    }
    for (Eigen::Index c = 0; c < 2 * nn; ++c) {
      out += ",";
      append(traj.errors(k, c));
    }
    out += "\n";
  }
  return out;
}

}  // namespace formset
