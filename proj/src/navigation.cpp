#include "gliderdec/navigation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gliderdec/operators.hpp"

namespace gliderdec {

namespace {

void check_trajectory(const Trajectory& tr, const char* who) {
  const std::size_t n = tr.t.size();
  if (tr.east.size() != n || tr.north.size() != n)
    throw std::invalid_argument(std::string(who) + ": component lengths differ");
  for (std::size_t k = 0; k < n; ++k) {
    if (!std::isfinite(tr.t[k]) || !std::isfinite(tr.east[k]) ||
        !std::isfinite(tr.north[k]))
      throw std::invalid_argument(std::string(who) + ": non-finite entry");
    if (k > 0 && tr.t[k] <= tr.t[k - 1])
      throw std::invalid_argument(std::string(who) +
                                  ": epochs not strictly increasing");
  }
}

double lerp_at(const Trajectory& tr, double t, bool east) {
  return interp1_clamped(tr.t, east ? tr.east : tr.north, t);
}

}  // namespace

Trajectory dead_reckon(const TtwVelocitySeries& ttw, const GpsFix& start,
                       const std::vector<double>& epochs) {
  if (ttw.t.size() < 2)
    throw std::invalid_argument("dead_reckon: velocity series needs two samples");
  if (epochs.empty()) throw std::invalid_argument("dead_reckon: no epochs");
  const double eps = 1e-9;
  if (epochs.front() < ttw.t.front() - eps || epochs.back() > ttw.t.back() + eps)
    throw std::invalid_argument("dead_reckon: epochs outside the velocity span");
  for (std::size_t k = 1; k < epochs.size(); ++k)
    if (epochs[k] <= epochs[k - 1])
      throw std::invalid_argument("dead_reckon: epochs not strictly increasing");

  Trajectory tr;
  tr.t = epochs;
  tr.east.resize(epochs.size());
  tr.north.resize(epochs.size());
  tr.east[0] = start.east;
  tr.north[0] = start.north;
  double ue_prev = interp1_clamped(ttw.t, ttw.u_ttw, epochs[0]);
  double un_prev = interp1_clamped(ttw.t, ttw.v_ttw, epochs[0]);
  for (std::size_t k = 1; k < epochs.size(); ++k) {
    const double ue = interp1_clamped(ttw.t, ttw.u_ttw, epochs[k]);
    const double un = interp1_clamped(ttw.t, ttw.v_ttw, epochs[k]);
    const double half_dt = 0.5 * (epochs[k] - epochs[k - 1]);
    tr.east[k] = tr.east[k - 1] + half_dt * (ue + ue_prev);
    tr.north[k] = tr.north[k - 1] + half_dt * (un + un_prev);
    ue_prev = ue;
    un_prev = un;
  }
  return tr;
}

Trajectory depth_averaged_correction(const Trajectory& dr, const GpsFix& gps_end) {
  check_trajectory(dr, "depth_averaged_correction");
  if (dr.t.size() < 2)
    throw std::invalid_argument(
        "depth_averaged_correction: trajectory spans no time");
  const double span = dr.t.back() - dr.t.front();
  const double vc_e = (gps_end.east - dr.east.back()) / span;
  const double vc_n = (gps_end.north - dr.north.back()) / span;
  Trajectory out = dr;
  for (std::size_t k = 0; k < out.t.size(); ++k) {
    const double dt = out.t[k] - out.t.front();
    out.east[k] += vc_e * dt;
    out.north[k] += vc_n * dt;
  }
  // Closure is exact by construction; kill the last rounding crumbs so the
  // corrected endpoint compares equal to the fix.
  out.east.back() = gps_end.east;
  out.north.back() = gps_end.north;
  return out;
}

Trajectory adcp_informed_trajectory(const StateSpaceResult& solution) {
  Trajectory tr;
  tr.t = solution.trajectory.t;
  tr.east = solution.trajectory.east;
  tr.north = solution.trajectory.north;
  check_trajectory(tr, "adcp_informed_trajectory");
  return tr;
}

double max_horizontal_offset(const Trajectory& a, const Trajectory& b) {
  check_trajectory(a, "max_horizontal_offset");
  check_trajectory(b, "max_horizontal_offset");
  const double lo = std::max(a.t.front(), b.t.front());
  const double hi = std::min(a.t.back(), b.t.back());
  if (lo > hi)
    throw std::invalid_argument("max_horizontal_offset: disjoint time spans");

  std::vector<double> probes;
  probes.reserve(a.t.size() + b.t.size());
  for (double t : a.t)
    if (t >= lo && t <= hi) probes.push_back(t);
  for (double t : b.t)
    if (t >= lo && t <= hi) probes.push_back(t);
  if (probes.empty()) probes.push_back(0.5 * (lo + hi));

  double worst = 0.0;
  for (double t : probes) {
    const double de = lerp_at(a, t, true) - lerp_at(b, t, true);
    const double dn = lerp_at(a, t, false) - lerp_at(b, t, false);
    worst = std::max(worst, std::hypot(de, dn));
  }
  return worst;
}

double path_length(const Trajectory& tr, double t_begin, double t_end) {
  check_trajectory(tr, "path_length");
  if (!(t_end >= t_begin))
    throw std::invalid_argument("path_length: window ends before it begins");
  const double lo = std::max(t_begin, tr.t.front());
  const double hi = std::min(t_end, tr.t.back());
  if (lo >= hi) return 0.0;

  double total = 0.0;
  double pe = lerp_at(tr, lo, true);
  double pn = lerp_at(tr, lo, false);
  for (std::size_t k = 0; k < tr.t.size(); ++k) {
    if (tr.t[k] <= lo) continue;
    if (tr.t[k] >= hi) break;
    total += std::hypot(tr.east[k] - pe, tr.north[k] - pn);
    pe = tr.east[k];
    pn = tr.north[k];
  }
  total += std::hypot(lerp_at(tr, hi, true) - pe, lerp_at(tr, hi, false) - pn);
  return total;
}

}  // namespace gliderdec
