// formset: synthesize, bound, place, and simulate displacement formations.
//
// Subcommands: ub | gains | formation | simulate | demo, each driven by a
// formset/1 JSON scenario. Exit codes: 0 success, 2 config error,
// 3 infeasible, 4 numerical failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "formset/closedloop.hpp"
#include "formset/gainsynth.hpp"
#include "formset/invariants.hpp"
#include "formset/parallel.hpp"
#include "formset/scenario.hpp"
#include "formset/serialize.hpp"
#include "formset/simkit.hpp"
#include "formset/svg.hpp"
#include "formset/tightform.hpp"
#include "formset/topology.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace formset;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitNumerical = 4;

const char* kAgentColors[] = {"#1f77b4", "#d62728", "#e8b800", "#2ca02c",
                              "#9467bd", "#8c564b"};

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

json vec_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

int cmd_ub(const ScenarioConfig& cfg, const fs::path& out, unsigned seed) {
  if (!cfg.has_lti) throw ConfigError("ub: config lacks an lti section");
  const UltimateBounds ub = ultimate_bounds(cfg.lti_a, cfg.lti_disturbance);
  const Zonotope omega = ub_zonotope(ub);

  json bounds;
  bounds["eigenvalues"] = vec_json(ub.spectral.values);
  bounds["b"] = vec_json(ub.bound);
  bounds["omega"] = json::parse(to_json(omega));
  bounds["box"] = json::parse(to_json(ub.box));
  write_file(out / "bounds.json", bounds.dump(2) + "\n");

  const double vol_formula = volume_paper(ub);
  const double vol_exact = volume_exact(omega);
  json vol;
  vol["paper_formula"] = vol_formula;
  vol["exact"] = vol_exact;
  vol["ratio"] = vol_exact > 0 ? vol_formula / vol_exact : 0.0;
  write_file(out / "volume.json", vol.dump(2) + "\n");

  const RpiReport rpi =
      rpi_check_sampled(cfg.lti_a, cfg.lti_disturbance, ub, cfg.lti_dt,
                        cfg.lti_duration, cfg.lti_trajectories, seed,
                        SamplePolicy::alternate, true);
  json rep;
  rep["pass"] = rpi.pass;
  rep["trajectories"] = json::array();
  for (const auto& tr : rpi.trajectories)
    rep["trajectories"].push_back({{"entered", tr.entered},
                                   {"entry_time", tr.entry_time},
                                   {"post_entry_exits", tr.post_entry_exits},
                                   {"final_inside", tr.final_inside}});
  write_file(out / "rpi.json", rep.dump(2) + "\n");

  if (ub.bound.size() == 2) {
    const double hx = ub.box.half_widths(0), hy = ub.box.half_widths(1);
    SvgCanvas svg(-1.4 * hx, -1.4 * hy, 1.4 * hx, 1.4 * hy, 720);
    svg.rect(-hx, -hy, hx, hy, "fill:none;stroke:#555555;stroke-width:1.5");
    svg.polygon(zonotope_polygon(omega),
                "fill:#1f77b4;fill-opacity:0.12;stroke:#1f77b4;stroke-width:1.5");
    for (size_t i = 0; i < rpi.paths.size(); ++i) {
      std::vector<std::array<double, 2>> pts;
      for (Eigen::Index k = 0; k < rpi.paths[i].rows(); ++k)
        pts.push_back({rpi.paths[i](k, 0), rpi.paths[i](k, 1)});
      svg.polyline(pts, std::string("stroke:") +
                            kAgentColors[i % 6] + ";stroke-width:0.8");
      svg.circle(pts.front()[0], pts.front()[1], 3.0,
                 std::string("fill:") + kAgentColors[i % 6]);
    }
    write_file(out / "ub.svg", svg.str());
  }
  std::cout << "ub: pass=" << (rpi.pass ? "yes" : "no")
            << " vol_formula=" << vol_formula << " vol_exact=" << vol_exact << "\n";
  return rpi.pass ? kExitOk : kExitNumerical;
}

struct PipelineState {
  SynthesisResult synth;
  ClosedLoop loop;
  std::vector<TightFormationSolution> formations;
  std::vector<VerifyReport> audits;
};

int run_gains(const ScenarioConfig& cfg, const fs::path& out, PipelineState& st) {
  st.synth = synthesize(make_synthesis_spec(cfg));
  if (!st.synth.feasible) {
    std::cerr << "gains: infeasible corridor within the search box\n";
    return kExitInfeasible;
  }
  st.loop = analyze(cfg.graph, cfg.alpha, st.synth.gains, cfg.dimension,
                    make_noise_bounds(cfg), cfg.delta_margin);
  const double direct = volume_paper(st.loop.error_bounds);
  write_file(out / "gains.json", synthesis_result_json(st.synth, direct) + "\n");
  write_file(out / "closedloop.json", closed_loop_summary_json(st.loop) + "\n");
  std::cout << "gains: k_p=" << st.synth.gains.k_p << " k_v=" << st.synth.gains.k_v
            << " volume=" << st.synth.volume << "\n";
  return kExitOk;
}

void draw_formations(const ScenarioConfig& cfg, const PipelineState& st,
                     const fs::path& out) {
  const Vector c = cfg.workspace.center;
  const Vector hw = cfg.workspace.half_widths;
  SvgCanvas svg(c(0) - 1.05 * hw(0), c(1) - 1.05 * hw(1), c(0) + 1.05 * hw(0),
                c(1) + 1.05 * hw(1), 1100);
  svg.rect(c(0) - hw(0), c(1) - hw(1), c(0) + hw(0), c(1) + hw(1),
           "fill:none;stroke:#222222;stroke-width:1.5");
  for (const auto& o : cfg.obstacles) {
    // Obstacles are drawn via their vertices for the axis-aligned case.
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    bool axis = o.faces.rows() == 4;
    if (axis) {
      for (Eigen::Index f = 0; f < 4 && axis; ++f) {
        const double fx = o.faces(f, 0), fy = o.faces(f, 1), g = o.offsets(f);
        if (fx > 0.5) x1 = g;
        else if (fx < -0.5) x0 = -g;
        else if (fy > 0.5) y1 = g;
        else if (fy < -0.5) y0 = -g;
        else axis = false;
      }
    }
    if (axis)
      svg.rect(x0, y0, x1, y1,
               "fill:#1f77b4;fill-opacity:0.06;stroke:#1f77b4;stroke-width:1.2;"
               "stroke-dasharray:7,5");
  }
  const int n = cfg.dimension;
  for (size_t a = 0; a < st.formations.size(); ++a) {
    const auto& sol = st.formations[a];
    if (!sol.feasible) continue;
    for (int k = 0; k < cfg.graph.num_edges(); ++k) {
      const auto [head, tail] = cfg.graph.edges[static_cast<size_t>(k)];
      svg.arrow(sol.p_star((tail - 1) * n), sol.p_star((tail - 1) * n + 1),
                sol.p_star((head - 1) * n), sol.p_star((head - 1) * n + 1), "purple");
    }
    for (int i = 0; i < cfg.graph.n_agents; ++i) {
      const double x = sol.p_star(i * n), y = sol.p_star(i * n + 1);
      const double rx = st.loop.position_bound(i * n);
      const double ry = st.loop.position_bound(i * n + 1);
      svg.rect(x - rx, y - ry, x + rx, y + ry,
               "fill:none;stroke:#999999;stroke-width:0.7");
      svg.circle(x, y, 4.0, std::string("fill:") + kAgentColors[i % 6] +
                                ";stroke:black;stroke-width:0.6");
    }
    svg.text(cfg.anchors[a](0) + 1.0, cfg.anchors[a](1) + 1.5,
             "anchor " + std::to_string(a + 1), "");
  }
  write_file(out / "formations.svg", svg.str());
}

int run_formation(const ScenarioConfig& cfg, const fs::path& out, PipelineState& st) {
  if (cfg.anchors.empty()) throw ConfigError("formation: no anchors in config");
  const Matrix q_z = Matrix(cfg.q_z_diag.asDiagonal());
  bool any_infeasible = false;
  for (size_t a = 0; a < cfg.anchors.size(); ++a) {
    TightFormationProblem prob =
        build_problem(cfg.graph, cfg.dimension, cfg.anchors[a], q_z, st.loop,
                      cfg.obstacles, cfg.workspace, cfg.margin);
    prob.big_m = cfg.big_m;
    prob.node_budget = cfg.node_budget;
    prob.gap_tol = cfg.gap_tol;
    const TightFormationSolution sol = solve(prob);
    const VerifyReport rep = verify(sol, prob);
    st.formations.push_back(sol);
    st.audits.push_back(rep);
    write_file(out / ("formation_" + std::to_string(a + 1) + ".json"),
               solution_json(sol, rep) + "\n");
    if (!sol.feasible) {
      any_infeasible = true;
      std::cerr << "formation " << a + 1 << ": infeasible\n";
    } else {
      std::cout << "formation " << a + 1 << ": objective=" << sol.objective
                << " gap=" << sol.gap << " verify=" << (rep.pass ? "pass" : "FAIL")
                << "\n";
    }
  }
  draw_formations(cfg, st, out);
  return any_infeasible ? kExitInfeasible : kExitOk;
}

int run_simulate(const ScenarioConfig& cfg, const fs::path& out, PipelineState& st,
                 unsigned seed_base) {
  std::vector<SamplePolicy> policies;
  if (cfg.policy == "uniform" || cfg.policy == "both")
    policies.push_back(SamplePolicy::uniform);
  if (cfg.policy == "vertex" || cfg.policy == "both")
    policies.push_back(SamplePolicy::vertex);

  struct Run {
    size_t anchor;
    unsigned seed;
    SamplePolicy policy;
  };
  std::vector<Run> runs;
  for (size_t a = 0; a < st.formations.size(); ++a) {
    if (!st.formations[a].feasible) continue;
    for (unsigned s : cfg.seeds)
      for (SamplePolicy pol : policies)
        runs.push_back({a, seed_base + s, pol});
  }

  const Eigen::Index state_dim = st.loop.gamma.rows();
  std::vector<InvarianceReport> reports(runs.size());
  std::vector<std::string> csvs(runs.size());
  const NoiseBounds noise = make_noise_bounds(cfg);

  parallel_for(static_cast<int>(runs.size()), [&](int idx) {
    const Run& run = runs[static_cast<size_t>(idx)];
    const auto& sol = st.formations[run.anchor];
    std::mt19937_64 rng(run.seed * 2654435761u + 17);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Vector e0(state_dim);
    for (Eigen::Index i = 0; i < state_dim; ++i)
      e0(i) = unif(rng) * st.loop.error_bounds.box.half_widths(i);
    const Vector p_star = target_positions(cfg.graph, cfg.dimension, sol.z_star,
                                           cfg.anchors[run.anchor]);
    Vector x0(state_dim);
    x0.head(state_dim / 2) = p_star + e0.head(state_dim / 2);
    x0.tail(state_dim / 2) = e0.tail(state_dim / 2);

    const Trajectory traj =
        simulate(cfg.graph, cfg.alpha, st.synth.gains, cfg.dimension, sol.z_star,
                 cfg.anchors[run.anchor], noise, x0, cfg.duration, cfg.dt,
                 run.seed, run.policy);
    reports[static_cast<size_t>(idx)] =
        verify_invariance(traj, st.loop, cfg.settle_fraction);
    const std::string pol = run.policy == SamplePolicy::vertex ? "vertex" : "uniform";
    const std::string meta = "formset trajectory agents=" +
                             std::to_string(cfg.graph.n_agents) +
                             " dim=" + std::to_string(cfg.dimension) +
                             " dt=" + std::to_string(cfg.dt) +
                             " anchor=" + std::to_string(run.anchor + 1) +
                             " seed=" + std::to_string(run.seed) + " policy=" + pol;
    csvs[static_cast<size_t>(idx)] =
        trajectory_csv(traj, cfg.graph.n_agents, cfg.dimension, meta);
  });

  json inv = json::array();
  bool all_pass = true;
  for (size_t i = 0; i < runs.size(); ++i) {
    const std::string pol =
        runs[i].policy == SamplePolicy::vertex ? "vertex" : "uniform";
    const fs::path csv_path =
        out / ("traj_a" + std::to_string(runs[i].anchor + 1) + "_s" +
               std::to_string(runs[i].seed) + "_" + pol + ".csv");
    write_file(csv_path, csvs[i]);
    const auto& r = reports[i];
    inv.push_back({{"anchor", runs[i].anchor + 1},
                   {"seed", runs[i].seed},
                   {"policy", pol},
                   {"settled", r.settled},
                   {"containment", r.containment_fraction},
                   {"omega_excess", r.worst_omega_excess},
                   {"position_excess", r.worst_position_excess},
                   {"pass", r.pass}});
    all_pass = all_pass && r.pass;
  }
  write_file(out / "invariance.json", inv.dump(2) + "\n");
  std::cout << "simulate: " << runs.size() << " runs, "
            << (all_pass ? "all inside bounds" : "CONTAINMENT VIOLATION") << "\n";
  return all_pass ? kExitOk : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"displacement-formation ultimate-bounds toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  bool deterministic = false;
  long long seed_override = -1;
  app.add_option("--config", config_path, "scenario JSON (formset/1)")->required();
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("--deterministic", deterministic, "single-threaded, reproducible runs");
  app.add_option("--seed", seed_override, "override the base RNG seed");

  auto* sub_ub = app.add_subcommand("ub", "standalone LTI ultimate bounds + figure");
  auto* sub_gains = app.add_subcommand("gains", "synthesize volume-minimizing gains");
  auto* sub_form = app.add_subcommand("formation", "solve tight formations per anchor");
  auto* sub_sim = app.add_subcommand("simulate", "simulate and verify invariance");
  auto* sub_demo = app.add_subcommand("demo", "full pipeline");

  CLI11_PARSE(app, argc, argv);

  if (deterministic) set_worker_cap(1);
  const unsigned seed = seed_override >= 0 ? static_cast<unsigned>(seed_override) : 1u;

  try {
    const ScenarioConfig cfg = load_scenario(config_path);
    const fs::path out(out_dir);
    fs::create_directories(out);

    PipelineState st;
    if (sub_ub->parsed()) return cmd_ub(cfg, out, seed);
    if (sub_gains->parsed()) return run_gains(cfg, out, st);
    if (sub_form->parsed()) {
      if (int rc = run_gains(cfg, out, st); rc != kExitOk) return rc;
      return run_formation(cfg, out, st);
    }
    if (sub_sim->parsed()) {
      if (int rc = run_gains(cfg, out, st); rc != kExitOk) return rc;
      if (int rc = run_formation(cfg, out, st); rc != kExitOk) return rc;
      return run_simulate(cfg, out, st, seed);
    }
    // demo: every stage, ub first when configured.
    int rc = kExitOk;
    if (cfg.has_lti) rc = cmd_ub(cfg, out, seed);
    if (rc != kExitOk) return rc;
    if (rc = run_gains(cfg, out, st); rc != kExitOk) return rc;
    if (rc = run_formation(cfg, out, st); rc != kExitOk) return rc;
    return run_simulate(cfg, out, st, seed);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  } catch (const DimensionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
