#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "gliderdec/domain.hpp"
#include "gliderdec/inversion.hpp"
#include "gliderdec/io.hpp"
#include "gliderdec/navigation.hpp"
#include "gliderdec/operators.hpp"
#include "gliderdec/simulator.hpp"
#include "gliderdec/sparse_lsq.hpp"
#include "gliderdec/statespace.hpp"
#include "gliderdec/svg_plots.hpp"

namespace {

using namespace gliderdec;

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

// --- simulate ----------------------------------------------------------------

int run_simulate(const std::string& scenario_path, const std::string& out_dir,
                 const std::optional<std::uint64_t>& seed) {
  ScenarioSpec spec = read_scenario_file(scenario_path);
  if (seed) spec.seed = *seed;
  const SyntheticDive sd = generate(spec);
  write_dive_bundle(sd.dive, out_dir);
  write_truth_files(sd, out_dir);
  std::cout << "wrote dive bundle to " << out_dir << " (adcp "
            << sd.dive.adcp.size() << " samples, ttw " << sd.dive.ttw.t.size()
            << ", depth " << sd.dive.depth.t.size() << ")\n";
  std::cout << "wrote truth_profile.csv and truth_states.csv\n";
  return 0;
}

// --- process -----------------------------------------------------------------

/// Splits a profile into contiguous covered runs so plot lines do not bridge
/// coverage gaps. Only the first run carries the legend label.
void append_covered_runs(std::vector<PlotSeries>& out,
                         const std::vector<double>& z,
                         const std::vector<double>& val,
                         const std::vector<int>& coverage,
                         const std::string& label, bool dashed) {
  bool labeled = false;
  std::size_t l = 0;
  while (l < z.size()) {
    if (!coverage.empty() && coverage[l] == 0) {
      ++l;
      continue;
    }
    PlotSeries s;
    s.label = labeled ? "" : label;
    s.dashed = dashed;
    s.width = 2.2;
    s.color = dashed ? "#c23b22" : "#1f6fb4";
    while (l < z.size() && (coverage.empty() || coverage[l] > 0)) {
      s.x.push_back(val[l]);
      s.y.push_back(z[l]);
      ++l;
    }
    if (s.x.size() == 1) s.markers = true;  // isolated covered node
    out.push_back(std::move(s));
    labeled = true;
  }
}

void plot_traces_and_profile(const DiveRecord& dive,
                             const CurrentProfileEstimate& profile,
                             const std::vector<double>& glider_t,
                             const std::vector<double>& glider_u,
                             const std::vector<double>& glider_v,
                             const std::string& path) {
  PanelSpec pu, pv;
  pu.title = "east component";
  pv.title = "north component";
  for (PanelSpec* p : {&pu, &pv}) {
    p->x_label = "velocity (m/s)";
    p->y_label = "depth (m)";
    p->flip_y = true;
  }
  // per-ping absolute velocity samples: relative velocity plus the estimated
  // over-the-ground glider velocity at the ping time
  bool trace_labeled = false;
  std::size_t i = 0;
  while (i < dive.adcp.size()) {
    const int ping = dive.adcp.ping_index[i];
    PlotSeries su, sv;
    su.color = sv.color = "#9a9a9a";
    su.width = sv.width = 0.8;
    su.opacity = sv.opacity = 0.45;
    su.label = trace_labeled ? "" : "per-ping samples";
    trace_labeled = true;
    while (i < dive.adcp.size() && dive.adcp.ping_index[i] == ping) {
      const double ug = interp1_clamped(glider_t, glider_u, dive.adcp.t[i]);
      const double vg = interp1_clamped(glider_t, glider_v, dive.adcp.t[i]);
      su.x.push_back(dive.adcp.u_rel[i] + ug);
      su.y.push_back(dive.adcp.z[i]);
      sv.x.push_back(dive.adcp.v_rel[i] + vg);
      sv.y.push_back(dive.adcp.z[i]);
      ++i;
    }
    if (su.x.size() == 1) su.markers = sv.markers = true;
    pu.series.push_back(std::move(su));
    pv.series.push_back(std::move(sv));
  }
  append_covered_runs(pu.series, profile.z_hat, profile.u, profile.coverage,
                      "estimated profile", false);
  append_covered_runs(pv.series, profile.z_hat, profile.v, profile.coverage,
                      "estimated profile", false);
  write_panel_plot({pu, pv}, "current profile and per-ping samples", path);
}

void plot_method_comparison(const CurrentProfileEstimate& invert,
                            const CurrentProfileEstimate& joint,
                            const std::string& path) {
  PanelSpec pu, pv;
  pu.title = "east component";
  pv.title = "north component";
  for (PanelSpec* p : {&pu, &pv}) {
    p->x_label = "velocity (m/s)";
    p->y_label = "depth (m)";
    p->flip_y = true;
  }
  append_covered_runs(pu.series, invert.z_hat, invert.u, invert.coverage,
                      "global inversion", false);
  append_covered_runs(pu.series, joint.z_hat, joint.u, joint.coverage,
                      "joint state-space", true);
  append_covered_runs(pv.series, invert.z_hat, invert.v, invert.coverage,
                      "global inversion", false);
  append_covered_runs(pv.series, joint.z_hat, joint.v, joint.coverage,
                      "joint state-space", true);
  write_panel_plot({pu, pv}, "method comparison", path);
}

void plot_trajectories(const Trajectory& dead, const Trajectory& avg,
                       const Trajectory* adcp, const DiveRecord& dive,
                       const std::string& path) {
  PanelSpec p;
  p.title = "horizontal track";
  p.x_label = "east (m)";
  p.y_label = "north (m)";
  p.equal_aspect = true;
  auto track = [](const Trajectory& tr, const std::string& label,
                  const char* color, bool dashed) {
    PlotSeries s;
    s.label = label;
    s.x = tr.east;
    s.y = tr.north;
    s.color = color;
    s.dashed = dashed;
    return s;
  };
  p.series.push_back(track(dead, "dead reckoning", "#9a9a9a", false));
  p.series.push_back(track(avg, "depth-averaged correction", "#1f6fb4", false));
  if (adcp)
    p.series.push_back(track(*adcp, "ADCP-informed", "#c23b22", false));
  PlotSeries fixes;
  fixes.label = "GPS fixes";
  fixes.color = "#000000";
  fixes.line = false;
  fixes.markers = true;
  fixes.x = {dive.gps_start.east, dive.gps_end.east};
  fixes.y = {dive.gps_start.north, dive.gps_end.north};
  p.series.push_back(std::move(fixes));
  write_panel_plot({p}, "trajectory comparison", path);
}

/// Correlation between two profile estimates over nodes both cover. When the
/// grids differ the second profile is interpolated onto the first. Returns
/// nothing when fewer than two common nodes exist or a series is constant.
std::optional<double> profile_correlation(
    const std::vector<double>& za, const std::vector<double>& a,
    const std::vector<int>& cov_a, const std::vector<double>& zb,
    const std::vector<double>& b, const std::vector<int>& cov_b) {
  std::vector<double> xs, ys;
  const bool same_grid = za == zb;
  for (std::size_t l = 0; l < za.size(); ++l) {
    if (!cov_a.empty() && cov_a[l] == 0) continue;
    if (same_grid) {
      if (!cov_b.empty() && cov_b[l] == 0) continue;
      xs.push_back(a[l]);
      ys.push_back(b[l]);
    } else {
      xs.push_back(a[l]);
      ys.push_back(interp1_clamped(zb, b, za[l]));
    }
  }
  if (xs.size() < 2) return std::nullopt;
  try {
    return pearson_correlation(xs, ys);
  } catch (const std::invalid_argument&) {
    return std::nullopt;  // a constant profile has no defined correlation
  }
}

int run_process(const std::string& bundle_dir, const std::string& config_path,
                const std::string& method_override, std::string out_dir,
                bool plots_flag) {
  RunSettings rs;
  if (!config_path.empty()) rs = read_run_config_file(config_path);
  if (!method_override.empty()) rs.method = method_override;
  if (plots_flag) rs.plots = true;
  if (out_dir.empty()) out_dir = bundle_dir;

  const DiveRecord dive = read_dive_bundle(bundle_dir);
  const std::vector<Violation> violations = validate_dive(dive);
  if (!violations.empty()) {
    std::cerr << "dive bundle fails validation (" << violations.size()
              << " violation" << (violations.size() == 1 ? "" : "s") << "):\n";
    for (const Violation& v : violations) {
      std::cerr << "  [" << v.code << "] " << v.message;
      if (v.index) std::cerr << " (sample " << *v.index << ")";
      std::cerr << "\n";
    }
    return 2;
  }

  const bool want_invert = rs.method == "invert" || rs.method == "both";
  const bool want_joint = rs.method == "joint" || rs.method == "both";
  std::optional<InversionResult> inv;
  std::optional<StateSpaceResult> joi;
  if (want_invert) inv = invert_currents(dive, rs.inversion);
  if (want_joint) joi = estimate_joint(dive, rs.statespace);

  std::filesystem::create_directories(out_dir);
  auto out = [&](const std::string& name) { return out_dir + "/" + name; };

  if (inv) {
    write_profile_csv(inv->profile, out("profile_invert.csv"));
    std::cout << "wrote " << out("profile_invert.csv") << "\n";
  }
  if (joi) {
    write_profile_csv(joi->profile, out("profile_joint.csv"));
    std::cout << "wrote " << out("profile_joint.csv") << "\n";
  }

  const Trajectory dead = dead_reckon(dive.ttw, dive.gps_start, dive.ttw.t);
  const Trajectory avg = depth_averaged_correction(dead, dive.gps_end);
  std::optional<Trajectory> adcp;
  if (joi) adcp = adcp_informed_trajectory(*joi);
  write_trajectory_csv(dead, out("trajectory_dead.csv"));
  write_trajectory_csv(avg, out("trajectory_avg.csv"));
  std::cout << "wrote " << out("trajectory_dead.csv") << "\n";
  std::cout << "wrote " << out("trajectory_avg.csv") << "\n";
  if (adcp) {
    write_trajectory_csv(*adcp, out("trajectory_adcp.csv"));
    std::cout << "wrote " << out("trajectory_adcp.csv") << "\n";
  }

  write_residuals_json(inv ? &*inv : nullptr, joi ? &*joi : nullptr,
                       out("residuals.json"));
  std::cout << "wrote " << out("residuals.json") << "\n";

  ComparisonSummary cs;
  cs.dead_vs_avg = max_horizontal_offset(dead, avg);
  if (adcp) {
    cs.dead_vs_adcp = max_horizontal_offset(dead, *adcp);
    cs.avg_vs_adcp = max_horizontal_offset(avg, *adcp);
  }
  if (inv && joi) {
    cs.correlation_u = profile_correlation(
        inv->profile.z_hat, inv->profile.u, inv->profile.coverage,
        joi->profile.z_hat, joi->profile.u, joi->profile.coverage);
    cs.correlation_v = profile_correlation(
        inv->profile.z_hat, inv->profile.v, inv->profile.coverage,
        joi->profile.z_hat, joi->profile.v, joi->profile.coverage);
  }
  write_comparison_json(cs, out("comparison.json"));
  std::cout << "wrote " << out("comparison.json") << "\n";

  if (rs.plots) {
    const CurrentProfileEstimate& prof = inv ? inv->profile : joi->profile;
    if (inv)
      plot_traces_and_profile(dive, prof, inv->glider.t_hat, inv->glider.u_g,
                              inv->glider.v_g, out("traces_profile.svg"));
    else
      plot_traces_and_profile(dive, prof, joi->trajectory.t,
                              joi->trajectory.u_g, joi->trajectory.v_g,
                              out("traces_profile.svg"));
    std::cout << "wrote " << out("traces_profile.svg") << "\n";
    if (inv && joi) {
      plot_method_comparison(inv->profile, joi->profile,
                             out("method_comparison.svg"));
      std::cout << "wrote " << out("method_comparison.svg") << "\n";
    }
    plot_trajectories(dead, avg, adcp ? &*adcp : nullptr, dive,
                      out("trajectory_comparison.svg"));
    std::cout << "wrote " << out("trajectory_comparison.svg") << "\n";
  }
  return 0;
}

// --- sweep ---------------------------------------------------------------

struct SweepCell {
  std::vector<double> axis_values;
  std::string status = "ok";
  std::string note;
  double rmse_invert = 0.0;
  double rmse_joint = 0.0;
  double closure_invert_m = 0.0;
  double endpoint_joint_m = 0.0;
};

/// Combined-component RMSE of an estimate against the simulator truth,
/// over the estimate's covered nodes (truth interpolated in depth).
double profile_rmse(const CurrentProfileEstimate& est,
                    const CurrentProfileEstimate& truth) {
  double ss = 0.0;
  int n = 0;
  for (std::size_t l = 0; l < est.z_hat.size(); ++l) {
    if (!est.coverage.empty() && est.coverage[l] == 0) continue;
    const double du =
        est.u[l] - interp1_clamped(truth.z_hat, truth.u, est.z_hat[l]);
    const double dv =
        est.v[l] - interp1_clamped(truth.z_hat, truth.v, est.z_hat[l]);
    ss += du * du + dv * dv;
    n += 2;
  }
  if (n == 0) throw std::runtime_error("estimate covers no depth nodes");
  return std::sqrt(ss / n);
}

double gps_closure_gap(const InversionResult& inv, const DiveRecord& dive) {
  const GliderVelocitySeries& g = inv.glider;
  double int_u = 0.0, int_v = 0.0;
  for (std::size_t k = 1; k < g.t_hat.size(); ++k) {
    const double half_dt = 0.5 * (g.t_hat[k] - g.t_hat[k - 1]);
    int_u += half_dt * (g.u_g[k] + g.u_g[k - 1]);
    int_v += half_dt * (g.v_g[k] + g.v_g[k - 1]);
  }
  const double du = int_u - (dive.gps_end.east - dive.gps_start.east);
  const double dv = int_v - (dive.gps_end.north - dive.gps_start.north);
  return std::hypot(du, dv);
}

unsigned sweep_thread_count(std::size_t cells) {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("GLIDERDEC_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) n = static_cast<unsigned>(v);
  }
  return static_cast<unsigned>(
      std::min<std::size_t>(n, std::max<std::size_t>(1, cells)));
}

int run_sweep(const std::string& scenario_path, const std::string& config_path,
              const std::string& out_dir,
              const std::optional<std::uint64_t>& seed) {
  ScenarioSpec spec = read_scenario_file(scenario_path);
  if (seed) spec.seed = *seed;
  SweepConfig sc;
  if (!config_path.empty()) sc = read_sweep_config_file(config_path);

  const SyntheticDive sd = generate(spec);
  const DiveRecord& dive = sd.dive;
  const CurrentProfileEstimate& truth = sd.truth_profile;

  // cartesian grid in file order, first axis outermost
  std::size_t n_cells = 1;
  for (const SweepAxis& ax : sc.axes) n_cells *= ax.values.size();
  std::vector<SweepCell> cells(n_cells);
  for (std::size_t c = 0; c < n_cells; ++c) {
    std::size_t rem = c;
    std::vector<double> vals(sc.axes.size());
    for (std::size_t a = sc.axes.size(); a-- > 0;) {
      vals[a] = sc.axes[a].values[rem % sc.axes[a].values.size()];
      rem /= sc.axes[a].values.size();
    }
    cells[c].axis_values = std::move(vals);
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t c; (c = next.fetch_add(1)) < n_cells;) {
      SweepCell& cell = cells[c];
      try {
        RunSettings rs = sc.base;
        for (std::size_t a = 0; a < sc.axes.size(); ++a)
          apply_run_setting(rs, sc.axes[a].key, fmt17(cell.axis_values[a]),
                            0, 0);
        const InversionResult inv = invert_currents(dive, rs.inversion);
        const StateSpaceResult joi = estimate_joint(dive, rs.statespace);
        cell.rmse_invert = profile_rmse(inv.profile, truth);
        cell.rmse_joint = profile_rmse(joi.profile, truth);
        cell.closure_invert_m = gps_closure_gap(inv, dive);
        cell.endpoint_joint_m =
            std::hypot(joi.trajectory.east.back() - dive.gps_end.east,
                       joi.trajectory.north.back() - dive.gps_end.north);
        for (double m : {cell.rmse_invert, cell.rmse_joint,
                         cell.closure_invert_m, cell.endpoint_joint_m})
          if (!std::isfinite(m))
            throw std::runtime_error("non-finite metric");
      } catch (const std::exception& e) {
        cell.status = "failed";
        cell.note = e.what();
      }
    }
  };
  const unsigned n_threads = sweep_thread_count(n_cells);
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  std::filesystem::create_directories(out_dir);
  std::string csv;
  for (const SweepAxis& ax : sc.axes) csv += ax.key + ",";
  csv += "status,rmse_invert,rmse_joint,closure_invert_m,endpoint_joint_m\n";
  std::size_t failed = 0;
  for (const SweepCell& cell : cells) {
    for (double v : cell.axis_values) csv += fmt9(v) + ",";
    if (cell.status == "ok") {
      csv += "ok," + fmt9(cell.rmse_invert) + "," + fmt9(cell.rmse_joint) +
             "," + fmt9(cell.closure_invert_m) + "," +
             fmt9(cell.endpoint_joint_m) + "\n";
    } else {
      csv += "failed,,,,\n";
      ++failed;
    }
  }
  const std::string csv_path = out_dir + "/metrics.csv";
  {
    std::ofstream f(csv_path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + csv_path);
    f << csv;
  }
  for (std::size_t c = 0; c < n_cells; ++c)
    if (cells[c].status != "ok")
      std::cerr << "cell " << c << " failed: " << cells[c].note << "\n";
  std::cout << "sweep complete: " << n_cells << " cell"
            << (n_cells == 1 ? "" : "s") << ", " << failed << " failed\n";
  std::cout << "wrote " << csv_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"glider ADCP current-profile and trajectory estimation"};
  app.require_subcommand(1);

  std::string sim_scenario, sim_out;
  std::uint64_t seed_value = 0;
  auto* sim = app.add_subcommand(
      "simulate", "generate a synthetic dive bundle plus truth files");
  sim->add_option("scenario", sim_scenario, "scenario key=value file")
      ->required();
  sim->add_option("--out", sim_out, "output directory")->required();
  auto* sim_seed =
      sim->add_option("--seed", seed_value, "override the scenario RNG seed");

  std::string proc_bundle, proc_config, proc_method, proc_out;
  bool proc_plots = false;
  auto* proc = app.add_subcommand(
      "process", "estimate currents and trajectories from a dive bundle");
  proc->add_option("bundle", proc_bundle, "dive bundle directory")->required();
  proc->add_option("--config", proc_config, "run configuration key=value file");
  proc->add_option("--method", proc_method, "invert, joint or both")
      ->check(CLI::IsMember({"invert", "joint", "both"}));
  proc->add_option("--out", proc_out,
                   "output directory (default: the bundle directory)");
  proc->add_flag("--plots", proc_plots, "emit SVG plots");

  std::string swp_scenario, swp_config, swp_out;
  auto* swp = app.add_subcommand(
      "sweep", "run both methods over a weight grid on one synthetic dive");
  swp->add_option("scenario", swp_scenario, "scenario key=value file")
      ->required();
  swp->add_option("--config", swp_config,
                  "base run configuration; comma lists become sweep axes");
  swp->add_option("--out", swp_out, "output directory")->required();
  auto* swp_seed =
      swp->add_option("--seed", seed_value, "override the scenario RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const bool generating = sim->parsed() || swp->parsed();
  try {
    if (sim->parsed()) {
      std::optional<std::uint64_t> seed;
      if (sim_seed->count() > 0) seed = seed_value;
      return run_simulate(sim_scenario, sim_out, seed);
    }
    if (proc->parsed())
      return run_process(proc_bundle, proc_config, proc_method, proc_out,
                         proc_plots);
    std::optional<std::uint64_t> seed;
    if (swp_seed->count() > 0) seed = seed_value;
    return run_sweep(swp_scenario, swp_config, swp_out, seed);
  } catch (const ParseError& e) {
    std::cerr << "parse error (line " << e.line << ", column " << e.column
              << "): " << e.what() << "\n";
    return 2;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    if (generating) {
      std::cerr << "infeasible scenario: " << e.what() << "\n";
      return 3;
    }
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
