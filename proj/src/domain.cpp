#include "gliderdec/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace gliderdec {

namespace {

bool all_finite(const std::vector<double>& v, std::size_t* bad) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      if (bad) *bad = i;
      return false;
    }
  }
  return true;
}

bool strictly_increasing(const std::vector<double>& v, std::size_t* bad) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) {
      if (bad) *bad = i;
      return false;
    }
  }
  return true;
}

void check_series(const std::vector<double>& t,
                  const std::vector<double>& y,
                  const char* name, const char* ycol,
                  std::vector<Violation>& out) {
  if (t.size() != y.size()) {
    out.push_back({std::string(name) + "_length_mismatch",
                   std::string(name) + ": column lengths differ", std::nullopt});
    return;
  }
  if (t.size() < 2) {
    out.push_back({std::string(name) + "_too_short",
                   std::string(name) + ": needs at least two samples", std::nullopt});
    return;
  }
  std::size_t bad = 0;
  if (!all_finite(t, &bad))
    out.push_back({std::string("nonfinite_") + name + "_time",
                   std::string(name) + ": non-finite time", bad});
  if (!all_finite(y, &bad))
    out.push_back({std::string("nonfinite_") + ycol,
                   std::string(name) + ": non-finite value", bad});
  if (!strictly_increasing(t, &bad))
    out.push_back({std::string(name) + "_time_not_increasing",
                   std::string(name) + ": time must be strictly increasing", bad});
}

}  // namespace

std::vector<Violation> validate_dive(const DiveRecord& d) {
  std::vector<Violation> v;
  const auto& a = d.adcp;

  const std::size_t n = a.t.size();
  if (a.u_rel.size() != n || a.v_rel.size() != n || a.z.size() != n ||
      a.ping_index.size() != n || a.cast_label.size() != n) {
    v.push_back({"adcp_length_mismatch", "adcp: parallel arrays differ in length",
                 std::nullopt});
    return v;  // indices below would be meaningless
  }
  if (n == 0)
    v.push_back({"adcp_empty", "adcp: no samples", std::nullopt});

  std::size_t bad = 0;
  if (!all_finite(a.u_rel, &bad))
    v.push_back({"nonfinite_u_rel", "adcp: non-finite u_rel", bad});
  if (!all_finite(a.v_rel, &bad))
    v.push_back({"nonfinite_v_rel", "adcp: non-finite v_rel", bad});
  if (!all_finite(a.t, &bad))
    v.push_back({"nonfinite_adcp_time", "adcp: non-finite time", bad});
  if (!all_finite(a.z, &bad))
    v.push_back({"nonfinite_adcp_depth", "adcp: non-finite depth", bad});
  for (std::size_t i = 0; i < a.z.size(); ++i) {
    if (std::isfinite(a.z[i]) && a.z[i] < 0.0) {
      v.push_back({"negative_adcp_depth", "adcp: depth below zero", i});
      break;
    }
  }

  // Time must be non-decreasing when walked in ping order (stable within a ping).
  if (n > 0) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
      return a.ping_index[i] < a.ping_index[j];
    });
    for (std::size_t k = 1; k < n; ++k) {
      if (a.t[order[k]] < a.t[order[k - 1]]) {
        v.push_back({"adcp_time_not_monotone",
                     "adcp: time decreases along ping order", order[k]});
        break;
      }
    }
  }

  check_series(d.ttw.t, d.ttw.u_ttw, "ttw", "u_ttw", v);
  if (d.ttw.t.size() == d.ttw.v_ttw.size()) {
    std::size_t b2 = 0;
    if (!all_finite(d.ttw.v_ttw, &b2))
      v.push_back({"nonfinite_v_ttw", "ttw: non-finite v_ttw", b2});
  } else {
    v.push_back({"ttw_length_mismatch", "ttw: column lengths differ", std::nullopt});
  }

  check_series(d.depth.t, d.depth.z, "depth", "depth_value", v);
  if (d.depth.t.size() == d.depth.z.size() && !d.depth.z.empty()) {
    for (std::size_t i = 0; i < d.depth.z.size(); ++i) {
      if (std::isfinite(d.depth.z[i]) && d.depth.z[i] < 0.0) {
        v.push_back({"negative_depth", "depth: below zero", i});
        break;
      }
    }
    // Exactly one contiguous deepest region.
    const double zmax = *std::max_element(d.depth.z.begin(), d.depth.z.end());
    if (std::isfinite(zmax)) {
      const double tol = 1e-9 * std::max(1.0, zmax);
      bool in_region = false, left_region = false, second = false;
      for (double z : d.depth.z) {
        const bool at_max = z >= zmax - tol;
        if (at_max && left_region) { second = true; break; }
        if (at_max) in_region = true;
        if (!at_max && in_region) left_region = true;
      }
      if (second)
        v.push_back({"depth_max_not_unique_region",
                     "depth: deepest region is not contiguous", std::nullopt});
    }
  }

  if (!std::isfinite(d.gps_start.time) || !std::isfinite(d.gps_start.east) ||
      !std::isfinite(d.gps_start.north))
    v.push_back({"nonfinite_gps_start", "gps: non-finite start fix", std::nullopt});
  if (!std::isfinite(d.gps_end.time) || !std::isfinite(d.gps_end.east) ||
      !std::isfinite(d.gps_end.north))
    v.push_back({"nonfinite_gps_end", "gps: non-finite end fix", std::nullopt});
  if (!(d.gps_start.time < d.gps_end.time))
    v.push_back({"gps_not_ordered", "gps: end fix not after start fix", std::nullopt});

  if (n > 0 && all_finite(a.t, nullptr)) {
    const auto [tmin, tmax] = std::minmax_element(a.t.begin(), a.t.end());
    if (!(d.gps_start.time < *tmin))
      v.push_back({"gps_start_after_first_ping",
                   "gps: start fix must precede the first ping", std::nullopt});
    if (!(*tmax < d.gps_end.time))
      v.push_back({"gps_end_before_last_ping",
                   "gps: end fix must follow the last ping", std::nullopt});
    if (d.depth.t.size() == d.depth.z.size() && d.depth.t.size() >= 2 &&
        strictly_increasing(d.depth.t, nullptr)) {
      for (std::size_t i = 0; i < n; ++i) {
        if (a.t[i] < d.depth.t.front() || a.t[i] > d.depth.t.back()) {
          v.push_back({"ping_outside_depth_span",
                       "adcp: ping time outside the depth series span", i});
          break;
        }
      }
    }
  }

  return v;
}

DiveRecord make_dive_record(AdcpObservationSet adcp, TtwVelocitySeries ttw,
                            DepthSeries depth, GpsFix gps_start, GpsFix gps_end) {
  DiveRecord d{std::move(adcp), std::move(ttw), std::move(depth), gps_start, gps_end};
  auto violations = validate_dive(d);
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << "invalid dive record:";
    for (const auto& w : violations) {
      msg << " " << w.code;
      if (w.index) msg << "[" << *w.index << "]";
    }
    throw std::invalid_argument(msg.str());
  }
  return d;
}

void latlon_to_local(double lat_deg, double lon_deg,
                     double anchor_lat_deg, double anchor_lon_deg,
                     double& east_m, double& north_m) {
  constexpr double kEarthRadius = 6371000.0;
  constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
  const double lat0 = anchor_lat_deg * kDegToRad;
  north_m = (lat_deg - anchor_lat_deg) * kDegToRad * kEarthRadius;
  east_m = (lon_deg - anchor_lon_deg) * kDegToRad * kEarthRadius * std::cos(lat0);
}

double descent_end_time(const DepthSeries& depth) {
  if (depth.t.size() != depth.z.size() || depth.t.size() < 2)
    throw std::invalid_argument("descent_end_time: malformed depth series");
  const double zmax = *std::max_element(depth.z.begin(), depth.z.end());
  const double tol = 1e-9 * std::max(1.0, zmax);
  double first = 0.0, last = 0.0;
  bool seen = false;
  for (std::size_t i = 0; i < depth.z.size(); ++i) {
    if (depth.z[i] >= zmax - tol) {
      if (!seen) first = depth.t[i];
      last = depth.t[i];
      seen = true;
    }
  }
  return 0.5 * (first + last);
}

}  // namespace gliderdec
