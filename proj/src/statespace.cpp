#include "gliderdec/statespace.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gliderdec/operators.hpp"
#include "gliderdec/sparse_lsq.hpp"

namespace gliderdec {
namespace {

void check_config(const StateSpaceConfig& c) {
  auto need = [](bool ok, const char* msg) {
    if (!ok)
      throw std::invalid_argument(std::string("state-space config: ") + msg);
  };
  need(std::isfinite(c.dz) && c.dz > 0.0, "dz must be positive");
  need(std::isfinite(c.sigma_accel) && c.sigma_accel > 0.0,
       "sigma_accel must be positive");
  need(std::isfinite(c.sigma_pos_gps) && c.sigma_pos_gps > 0.0,
       "sigma_pos_gps must be positive");
  need(std::isfinite(c.sigma_x0_pos) && c.sigma_x0_pos > 0.0,
       "sigma_x0_pos must be positive");
  need(std::isfinite(c.sigma_x0_vel) && c.sigma_x0_vel > 0.0,
       "sigma_x0_vel must be positive");
  need(std::isfinite(c.eta1) && c.eta1 > 0.0, "eta1 must be positive");
  need(std::isfinite(c.eta2) && c.eta2 > 0.0, "eta2 must be positive");
  need(std::isfinite(c.eta3) && c.eta3 >= 0.0, "eta3 must be non-negative");
}

// Column of each state entry at temporal node k.
int e_col(int k) { return 4 * k; }
int n_col(int k) { return 4 * k + 1; }
int ue_col(int k) { return 4 * k + 2; }
int un_col(int k) { return 4 * k + 3; }

}  // namespace

JointSystem assemble_joint(const DiveRecord& dive,
                           const StateSpaceConfig& cfg) {
  check_config(cfg);
  {
    const std::vector<Violation> bad = validate_dive(dive);
    if (!bad.empty())
      throw std::invalid_argument("estimate_joint: invalid dive record: " +
                                  bad.front().code);
  }

  const VelocityGrids grids = build_velocity_grids(dive, cfg.dz);
  const int N = static_cast<int>(grids.t_hat.size());
  const int L = static_cast<int>(grids.z_hat.size());
  if (N < 2) throw std::invalid_argument("estimate_joint: need two epochs");
  const int n = 4 * N + 2 * L;
  const int cu0 = 4 * N;      // first column of the east profile
  const int cv0 = 4 * N + L;  // first column of the north profile

  std::vector<LsqBlock> blocks;

  // Whitened white-acceleration transition: for each interval the position
  // and rate innovations are scaled by the inverse Cholesky factor of
  //   Q = sigma_a^2 [dt^3/3, dt^2/2; dt^2/2, dt].
  {
    LsqBlock b;
    b.label = "process";
    b.weight = 1.0;
    b.matrix.rows = 4 * (N - 1);
    b.matrix.cols = n;
    for (int k = 1; k < N; ++k) {
      const double dt = grids.t_hat[static_cast<std::size_t>(k)] -
                        grids.t_hat[static_cast<std::size_t>(k - 1)];
      const double l00 = cfg.sigma_accel * std::sqrt(dt * dt * dt / 3.0);
      const double l11 = cfg.sigma_accel * std::sqrt(dt) / 2.0;
      const double ratio = 3.0 / (2.0 * dt);  // l10 / l00
      const int r = 4 * (k - 1);
      // east: position innovation, then rate innovation with the position
      // part removed by forward substitution.
      b.matrix.add(r + 0, e_col(k), 1.0 / l00);
      b.matrix.add(r + 0, e_col(k - 1), -1.0 / l00);
      b.matrix.add(r + 0, ue_col(k - 1), -dt / l00);
      b.matrix.add(r + 1, ue_col(k), 1.0 / l11);
      b.matrix.add(r + 1, ue_col(k - 1), 0.5 / l11);
      b.matrix.add(r + 1, e_col(k), -ratio / l11);
      b.matrix.add(r + 1, e_col(k - 1), ratio / l11);
      // north
      b.matrix.add(r + 2, n_col(k), 1.0 / l00);
      b.matrix.add(r + 2, n_col(k - 1), -1.0 / l00);
      b.matrix.add(r + 2, un_col(k - 1), -dt / l00);
      b.matrix.add(r + 3, un_col(k), 1.0 / l11);
      b.matrix.add(r + 3, un_col(k - 1), 0.5 / l11);
      b.matrix.add(r + 3, n_col(k), -ratio / l11);
      b.matrix.add(r + 3, n_col(k - 1), ratio / l11);
    }
    b.rhs.assign(static_cast<std::size_t>(b.matrix.rows), 0.0);
    blocks.push_back(std::move(b));
  }

  const double ttw_u0 =
      interp1_clamped(dive.ttw.t, dive.ttw.u_ttw, grids.t_hat.front());
  const double ttw_v0 =
      interp1_clamped(dive.ttw.t, dive.ttw.v_ttw, grids.t_hat.front());

  // Mean water velocity over the dive from GPS closure: the fix-to-fix
  // displacement minus the integrated through-water velocity, over the
  // elapsed time. Used to make the start-rate seed consistent with the
  // data; for a depth-constant current the correction is exact.
  double drift_u = 0.0;
  double drift_v = 0.0;
  {
    double int_u = 0.0;
    double int_v = 0.0;
    for (std::size_t k = 1; k < dive.ttw.t.size(); ++k) {
      const double half_dt = 0.5 * (dive.ttw.t[k] - dive.ttw.t[k - 1]);
      int_u += half_dt * (dive.ttw.u_ttw[k] + dive.ttw.u_ttw[k - 1]);
      int_v += half_dt * (dive.ttw.v_ttw[k] + dive.ttw.v_ttw[k - 1]);
    }
    const double span = dive.gps_end.time - dive.gps_start.time;
    drift_u = (dive.gps_end.east - dive.gps_start.east - int_u) / span;
    drift_v = (dive.gps_end.north - dive.gps_start.north - int_v) / span;
  }

  {
    LsqBlock b;
    b.label = "prior_pos";
    b.weight = 1.0 / (cfg.sigma_x0_pos * cfg.sigma_x0_pos);
    b.matrix.rows = 2;
    b.matrix.cols = n;
    b.matrix.add(0, e_col(0), 1.0);
    b.matrix.add(1, n_col(0), 1.0);
    b.rhs = {dive.gps_start.east, dive.gps_start.north};
    blocks.push_back(std::move(b));
  }
  {
    // Start-rate seed: through-water velocity plus the GPS-closure mean
    // current. Seeding with the through-water velocity alone leaves a bias
    // of the size of the local current in an otherwise-consistent system.
    LsqBlock b;
    b.label = "prior_vel";
    b.weight = 1.0 / (cfg.sigma_x0_vel * cfg.sigma_x0_vel);
    b.matrix.rows = 2;
    b.matrix.cols = n;
    b.matrix.add(0, ue_col(0), 1.0);
    b.matrix.add(1, un_col(0), 1.0);
    b.rhs = {ttw_u0 + drift_u, ttw_v0 + drift_v};
    blocks.push_back(std::move(b));
  }

  {
    LsqBlock b;
    b.label = "gps";
    b.weight = 1.0 / (cfg.sigma_pos_gps * cfg.sigma_pos_gps);
    b.matrix.rows = 4;
    b.matrix.cols = n;
    b.matrix.add(0, e_col(0), 1.0);
    b.matrix.add(1, n_col(0), 1.0);
    b.matrix.add(2, e_col(N - 1), 1.0);
    b.matrix.add(3, n_col(N - 1), 1.0);
    b.rhs = {dive.gps_start.east, dive.gps_start.north, dive.gps_end.east,
             dive.gps_end.north};
    blocks.push_back(std::move(b));
  }

  // Relative-velocity rows: profile at the bin depth minus the glider rate
  // at the sample's epoch, one row per horizontal component.
  {
    LsqBlock b;
    b.label = "adcp";
    b.weight = cfg.eta1;
    const std::size_t ns = dive.adcp.size();
    b.matrix.rows = static_cast<int>(2 * ns);
    b.matrix.cols = n;
    const SparseMatrix pick = build_subsample_matrix(grids.t_hat, dive.adcp.t);
    std::vector<int> epoch(ns, -1);
    for (const Triplet& t : pick.triplets) epoch[static_cast<std::size_t>(t.row)] = t.col;
    const SparseMatrix hz = build_linear_interp_matrix(grids.z_hat, dive.adcp.z);
    for (const Triplet& t : hz.triplets) {
      b.matrix.add(2 * t.row, cu0 + t.col, t.value);
      b.matrix.add(2 * t.row + 1, cv0 + t.col, t.value);
    }
    b.rhs.resize(2 * ns);
    for (std::size_t i = 0; i < ns; ++i) {
      const int k = epoch[i];
      b.matrix.add(static_cast<int>(2 * i), ue_col(k), -1.0);
      b.matrix.add(static_cast<int>(2 * i + 1), un_col(k), -1.0);
      b.rhs[2 * i] = dive.adcp.u_rel[i];
      b.rhs[2 * i + 1] = dive.adcp.v_rel[i];
    }
    blocks.push_back(std::move(b));
  }

  // Through-water compare rows at every epoch: glider rate minus the profile
  // at the glider's own depth matches the measured through-water velocity.
  {
    LsqBlock b;
    b.label = "ttw";
    b.weight = cfg.eta2;
    b.matrix.rows = 2 * N;
    b.matrix.cols = n;
    std::vector<double> zg(static_cast<std::size_t>(N));
    for (int k = 0; k < N; ++k)
      zg[static_cast<std::size_t>(k)] =
          interp1_clamped(dive.depth.t, dive.depth.z,
                          grids.t_hat[static_cast<std::size_t>(k)]);
    const SparseMatrix hz = build_linear_interp_matrix(grids.z_hat, zg);
    for (const Triplet& t : hz.triplets) {
      b.matrix.add(2 * t.row, cu0 + t.col, -t.value);
      b.matrix.add(2 * t.row + 1, cv0 + t.col, -t.value);
    }
    b.rhs.resize(static_cast<std::size_t>(2 * N));
    for (int k = 0; k < N; ++k) {
      b.matrix.add(2 * k, ue_col(k), 1.0);
      b.matrix.add(2 * k + 1, un_col(k), 1.0);
      const double t = grids.t_hat[static_cast<std::size_t>(k)];
      b.rhs[static_cast<std::size_t>(2 * k)] =
          interp1_clamped(dive.ttw.t, dive.ttw.u_ttw, t);
      b.rhs[static_cast<std::size_t>(2 * k + 1)] =
          interp1_clamped(dive.ttw.t, dive.ttw.v_ttw, t);
    }
    blocks.push_back(std::move(b));
  }

  if (L >= 2 && cfg.eta3 > 0.0) {
    LsqBlock b;
    b.label = "smooth_profile";
    b.weight = cfg.eta3;
    b.matrix.rows = 2 * (L - 1);
    b.matrix.cols = n;
    const SparseMatrix d1 = adjacent_difference(L);
    for (const Triplet& t : d1.triplets) {
      b.matrix.add(t.row, cu0 + t.col, t.value);
      b.matrix.add(L - 1 + t.row, cv0 + t.col, t.value);
    }
    b.rhs.assign(static_cast<std::size_t>(b.matrix.rows), 0.0);
    blocks.push_back(std::move(b));
  }

  JointSystem sys;
  sys.grids = grids;
  sys.n_unknowns = n;
  sys.blocks = std::move(blocks);
  return sys;
}

StateSpaceResult estimate_joint(const DiveRecord& dive,
                                const StateSpaceConfig& cfg) {
  JointSystem sys = assemble_joint(dive, cfg);
  const VelocityGrids& grids = sys.grids;
  const int N = static_cast<int>(grids.t_hat.size());
  const int L = static_cast<int>(grids.z_hat.size());
  const int cu0 = 4 * N;
  const int cv0 = 4 * N + L;
  const std::vector<LsqBlock>& blocks = sys.blocks;

  const LsqSolution sol = solve(sys.blocks, sys.n_unknowns);

  StateSpaceResult out;
  out.grids = grids;
  out.condition_estimate = sol.normal_matrix_condition_estimate;

  out.trajectory.t = grids.t_hat;
  out.trajectory.east.resize(static_cast<std::size_t>(N));
  out.trajectory.north.resize(static_cast<std::size_t>(N));
  out.trajectory.u_g.resize(static_cast<std::size_t>(N));
  out.trajectory.v_g.resize(static_cast<std::size_t>(N));
  for (int k = 0; k < N; ++k) {
    const std::size_t ki = static_cast<std::size_t>(k);
    out.trajectory.east[ki] = sol.x[static_cast<std::size_t>(e_col(k))];
    out.trajectory.north[ki] = sol.x[static_cast<std::size_t>(n_col(k))];
    out.trajectory.u_g[ki] = sol.x[static_cast<std::size_t>(ue_col(k))];
    out.trajectory.v_g[ki] = sol.x[static_cast<std::size_t>(un_col(k))];
  }

  out.profile.z_hat = grids.z_hat;
  out.profile.form = ProfileForm::Single;
  out.profile.u.assign(sol.x.begin() + cu0, sol.x.begin() + cu0 + L);
  out.profile.v.assign(sol.x.begin() + cv0, sol.x.begin() + cv0 + L);
  out.profile.coverage = count_node_touches(grids.z_hat, dive.adcp.z);

  for (std::size_t b = 0; b < blocks.size(); ++b) {
    BlockResidual r;
    r.label = blocks[b].label;
    r.rows = static_cast<std::size_t>(blocks[b].matrix.rows);
    const double rms =
        sol.residual_norms[b] / std::sqrt(static_cast<double>(r.rows));
    r.rms_u = rms;  // rows interleave components; one shared figure
    r.rms_v = rms;
    out.residuals.push_back(std::move(r));
  }
  return out;
}

}  // namespace gliderdec
