#include "gliderdec/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gliderdec/operators.hpp"
#include "gliderdec/sparse_lsq.hpp"

namespace gliderdec {
namespace {

void check_config(const InversionConfig& c) {
  auto need = [](bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(std::string("inversion config: ") + msg);
  };
  need(std::isfinite(c.dz) && c.dz > 0.0, "dz must be positive");
  need(std::isfinite(c.sigma_adcp) && c.sigma_adcp > 0.0,
       "sigma_adcp must be positive");
  need(std::isfinite(c.sigma_ttw) && c.sigma_ttw > 0.0,
       "sigma_ttw must be positive");
  need(std::isfinite(c.sigma_gps) && c.sigma_gps > 0.0,
       "sigma_gps must be positive");
  need(std::isfinite(c.lambda_g) && c.lambda_g >= 0.0,
       "lambda_g must be non-negative");
  need(std::isfinite(c.lambda_o) && c.lambda_o >= 0.0,
       "lambda_o must be non-negative");
  need(std::isfinite(c.bottom_match_weight) && c.bottom_match_weight > 0.0,
       "bottom_match_weight must be positive");
}

// Appends src's triplets shifted to (row_offset, col_offset), scaled.
void append_shifted(const SparseMatrix& src, int row_offset, int col_offset,
                    double scale, SparseMatrix* dst) {
  for (const Triplet& t : src.triplets)
    dst->add(t.row + row_offset, t.col + col_offset, scale * t.value);
}

}  // namespace

InversionSystem assemble_inversion(const DiveRecord& dive,
                                   const InversionConfig& cfg) {
  check_config(cfg);
  {
    const std::vector<Violation> bad = validate_dive(dive);
    if (!bad.empty())
      throw std::invalid_argument("invert_currents: invalid dive record: " +
                                  bad.front().code);
  }

  const VelocityGrids grids = build_velocity_grids(dive, cfg.dz);
  const int M = static_cast<int>(grids.t_hat.size());
  const int L = static_cast<int>(grids.z_hat.size());
  const bool two = cfg.two_profile.has_value() ? *cfg.two_profile
                                               : dive.duration() > 7200.0;
  const int n = M + (two ? 2 * L : L);

  const std::size_t ns = dive.adcp.size();
  std::vector<bool> is_desc(ns), is_asc(ns);
  for (std::size_t i = 0; i < ns; ++i) {
    is_desc[i] = dive.adcp.cast_label[i] == Cast::Descent;
    is_asc[i] = !is_desc[i];
  }

  const double w_adcp = 1.0 / (cfg.sigma_adcp * cfg.sigma_adcp);
  const double w_ttw = 1.0 / (cfg.sigma_ttw * cfg.sigma_ttw);
  const double w_gps = 1.0 / (cfg.sigma_gps * cfg.sigma_gps);

  std::vector<LsqBlock> blocks_u;

  // Relative-velocity rows: profile at the bin depth minus glider velocity
  // at the ping time.
  {
    LsqBlock b;
    b.label = "adcp";
    b.weight = w_adcp;
    b.matrix.rows = static_cast<int>(ns);
    b.matrix.cols = n;
    const SparseMatrix ht = build_subsample_matrix(grids.t_hat, dive.adcp.t);
    append_shifted(ht, 0, 0, -1.0, &b.matrix);
    if (two) {
      const SparseMatrix hd =
          build_linear_interp_matrix(grids.z_hat, dive.adcp.z, &is_desc);
      const SparseMatrix ha =
          build_linear_interp_matrix(grids.z_hat, dive.adcp.z, &is_asc);
      append_shifted(hd, 0, M, 1.0, &b.matrix);
      append_shifted(ha, 0, M + L, 1.0, &b.matrix);
    } else {
      const SparseMatrix hz =
          build_linear_interp_matrix(grids.z_hat, dive.adcp.z);
      append_shifted(hz, 0, M, 1.0, &b.matrix);
    }
    b.rhs = dive.adcp.u_rel;
    blocks_u.push_back(std::move(b));
  }

  // Dive-displacement row: trapezoid quadrature of the glider velocity
  // across the whole grid equals the surfacing fix delta.
  {
    LsqBlock b;
    b.label = "gps";
    b.weight = w_gps;
    b.matrix.rows = 1;
    b.matrix.cols = n;
    const std::vector<double> w = trapezoid_weights(grids.t_hat);
    for (int m = 0; m < M; ++m) b.matrix.add(0, m, w[static_cast<std::size_t>(m)]);
    b.rhs = {dive.gps_end.east - dive.gps_start.east};
    blocks_u.push_back(std::move(b));
  }

  // Through-water rows at every grid time: glider velocity minus the profile
  // at the glider's own depth matches the measured through-water velocity.
  const double cast_split = descent_end_time(dive.depth);
  std::vector<double> zg(static_cast<std::size_t>(M));
  std::vector<double> ttw_u(static_cast<std::size_t>(M)),
      ttw_v(static_cast<std::size_t>(M));
  for (int m = 0; m < M; ++m) {
    const std::size_t mi = static_cast<std::size_t>(m);
    zg[mi] = interp1_clamped(dive.depth.t, dive.depth.z, grids.t_hat[mi]);
    ttw_u[mi] = interp1_clamped(dive.ttw.t, dive.ttw.u_ttw, grids.t_hat[mi]);
    ttw_v[mi] = interp1_clamped(dive.ttw.t, dive.ttw.v_ttw, grids.t_hat[mi]);
  }
  {
    LsqBlock b;
    b.label = "ttw";
    b.weight = w_ttw;
    b.matrix.rows = M;
    b.matrix.cols = n;
    for (int m = 0; m < M; ++m) b.matrix.add(m, m, -1.0);
    if (two) {
      std::vector<bool> md(static_cast<std::size_t>(M)),
          ma(static_cast<std::size_t>(M));
      for (int m = 0; m < M; ++m) {
        const std::size_t mi = static_cast<std::size_t>(m);
        md[mi] = grids.t_hat[mi] <= cast_split;
        ma[mi] = !md[mi];
      }
      append_shifted(build_linear_interp_matrix(grids.z_hat, zg, &md), 0, M,
                     1.0, &b.matrix);
      append_shifted(build_linear_interp_matrix(grids.z_hat, zg, &ma), 0,
                     M + L, 1.0, &b.matrix);
    } else {
      append_shifted(build_linear_interp_matrix(grids.z_hat, zg), 0, M, 1.0,
                     &b.matrix);
    }
    b.rhs.resize(static_cast<std::size_t>(M));
    for (int m = 0; m < M; ++m)
      b.rhs[static_cast<std::size_t>(m)] = -ttw_u[static_cast<std::size_t>(m)];
    blocks_u.push_back(std::move(b));
  }

  // Temporal curvature penalty on the glider velocity, optionally re-centered
  // on the measured through-water velocity so commanded turns survive.
  if (M >= 3 && cfg.lambda_g > 0.0) {
    LsqBlock b;
    b.label = "smooth_glider";
    b.weight = cfg.lambda_g * cfg.lambda_g;
    b.matrix.rows = M - 2;
    b.matrix.cols = n;
    const SparseMatrix d2 = second_difference(M);
    append_shifted(d2, 0, 0, 1.0, &b.matrix);
    b.rhs.assign(static_cast<std::size_t>(M - 2), 0.0);
    if (cfg.smoothing_target == SmoothingTarget::TtwResidual)
      b.rhs = d2.apply(ttw_u);
    blocks_u.push_back(std::move(b));
  }

  // Vertical curvature penalty per profile.
  if (L >= 3 && cfg.lambda_o > 0.0) {
    LsqBlock b;
    b.label = "smooth_profile";
    b.weight = cfg.lambda_o * cfg.lambda_o;
    b.matrix.rows = two ? 2 * (L - 2) : (L - 2);
    b.matrix.cols = n;
    const SparseMatrix d2 = second_difference(L);
    append_shifted(d2, 0, M, 1.0, &b.matrix);
    if (two) append_shifted(d2, L - 2, M + L, 1.0, &b.matrix);
    b.rhs.assign(static_cast<std::size_t>(b.matrix.rows), 0.0);
    blocks_u.push_back(std::move(b));
  }

  // The branches share the deepest node, enforced as a stiff residual.
  if (two) {
    LsqBlock b;
    b.label = "bottom_match";
    b.weight = cfg.bottom_match_weight * std::max({w_adcp, w_ttw, w_gps});
    b.matrix.rows = 1;
    b.matrix.cols = n;
    b.matrix.add(0, M + L - 1, 1.0);
    b.matrix.add(0, M + 2 * L - 1, -1.0);
    b.rhs = {0.0};
    blocks_u.push_back(std::move(b));
  }

  // Same design, second component: swap in the north-facing right sides.
  std::vector<LsqBlock> blocks_v = blocks_u;
  for (LsqBlock& b : blocks_v) {
    if (b.label == "adcp") {
      b.rhs = dive.adcp.v_rel;
    } else if (b.label == "gps") {
      b.rhs = {dive.gps_end.north - dive.gps_start.north};
    } else if (b.label == "ttw") {
      for (int m = 0; m < M; ++m)
        b.rhs[static_cast<std::size_t>(m)] =
            -ttw_v[static_cast<std::size_t>(m)];
    } else if (b.label == "smooth_glider" &&
               cfg.smoothing_target == SmoothingTarget::TtwResidual) {
      b.rhs = second_difference(M).apply(ttw_v);
    }
  }

  InversionSystem sys;
  sys.grids = grids;
  sys.two_profile = two;
  sys.n_unknowns = n;
  sys.blocks_u = std::move(blocks_u);
  sys.blocks_v = std::move(blocks_v);
  return sys;
}

InversionResult invert_currents(const DiveRecord& dive,
                                const InversionConfig& cfg) {
  InversionSystem sys = assemble_inversion(dive, cfg);
  const VelocityGrids& grids = sys.grids;
  const int M = static_cast<int>(grids.t_hat.size());
  const int L = static_cast<int>(grids.z_hat.size());
  const bool two = sys.two_profile;
  const std::vector<LsqBlock>& blocks_u = sys.blocks_u;

  const std::size_t ns = dive.adcp.size();
  std::vector<bool> is_desc(ns), is_asc(ns);
  for (std::size_t i = 0; i < ns; ++i) {
    is_desc[i] = dive.adcp.cast_label[i] == Cast::Descent;
    is_asc[i] = !is_desc[i];
  }

  const LsqSolution su = solve(sys.blocks_u, sys.n_unknowns);
  const LsqSolution sv = solve(sys.blocks_v, sys.n_unknowns);

  InversionResult out;
  out.grids = grids;
  out.condition_estimate = std::max(su.normal_matrix_condition_estimate,
                                    sv.normal_matrix_condition_estimate);

  out.glider.t_hat = grids.t_hat;
  out.glider.u_g.assign(su.x.begin(), su.x.begin() + M);
  out.glider.v_g.assign(sv.x.begin(), sv.x.begin() + M);

  CurrentProfileEstimate& p = out.profile;
  p.z_hat = grids.z_hat;
  if (two) {
    p.form = ProfileForm::TwoProfile;
    p.u_descent.assign(su.x.begin() + M, su.x.begin() + M + L);
    p.u_ascent.assign(su.x.begin() + M + L, su.x.begin() + M + 2 * L);
    p.v_descent.assign(sv.x.begin() + M, sv.x.begin() + M + L);
    p.v_ascent.assign(sv.x.begin() + M + L, sv.x.begin() + M + 2 * L);
    p.u.resize(static_cast<std::size_t>(L));
    p.v.resize(static_cast<std::size_t>(L));
    for (int l = 0; l < L; ++l) {
      const std::size_t li = static_cast<std::size_t>(l);
      p.u[li] = 0.5 * (p.u_descent[li] + p.u_ascent[li]);
      p.v[li] = 0.5 * (p.v_descent[li] + p.v_ascent[li]);
    }
    p.coverage_descent = count_node_touches(grids.z_hat, dive.adcp.z, &is_desc);
    p.coverage_ascent = count_node_touches(grids.z_hat, dive.adcp.z, &is_asc);
    p.coverage.resize(static_cast<std::size_t>(L));
    for (int l = 0; l < L; ++l) {
      const std::size_t li = static_cast<std::size_t>(l);
      p.coverage[li] = p.coverage_descent[li] + p.coverage_ascent[li];
    }
  } else {
    p.form = ProfileForm::Single;
    p.u.assign(su.x.begin() + M, su.x.begin() + M + L);
    p.v.assign(sv.x.begin() + M, sv.x.begin() + M + L);
    p.coverage = count_node_touches(grids.z_hat, dive.adcp.z);
  }

  for (std::size_t b = 0; b < blocks_u.size(); ++b) {
    BlockResidual r;
    r.label = blocks_u[b].label;
    r.rows = static_cast<std::size_t>(blocks_u[b].matrix.rows);
    const double root = std::sqrt(static_cast<double>(r.rows));
    r.rms_u = su.residual_norms[b] / root;
    r.rms_v = sv.residual_norms[b] / root;
    out.residuals.push_back(std::move(r));
  }
  return out;
}

}  // namespace gliderdec
