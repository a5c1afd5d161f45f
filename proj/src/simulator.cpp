#include "gliderdec/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "gliderdec/operators.hpp"

namespace gliderdec {
namespace {

constexpr double kPi = 3.14159265358979323846;

// Wichura's PPND16 rational approximation to the standard normal quantile;
// relative error below 1e-15 on (0,1).
double inverse_normal_cdf(double p) {
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
              6.7265770927008700853e4) *
                 r +
             4.5921953931549871457e4) *
                r +
            1.3731693765509461125e4) *
               r +
           1.9715909503065514427e3) *
              r +
          1.3314166789178437745e2) *
             r +
         3.3871328727963666080e0);
    const double den =
        (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
              3.9307895800092710610e4) *
                 r +
             2.1213794301586595867e4) *
                r +
            5.3941960214247511077e3) *
               r +
           6.8718700749205790830e2) *
              r +
          4.2313330701600911252e1) *
             r +
         1.0);
    return q * num / den;
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double x;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) *
                 r +
             1.27045825245236838258e0) *
                r +
            3.64784832476320460504e0) *
               r +
           5.76949722146069140550e0) *
              r +
          4.63033784615654529590e0) *
             r +
         1.42343711074968357734e0);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) *
                 r +
             1.48103976427480074590e-1) *
                r +
            6.89767334985100004550e-1) *
               r +
           1.67638483018380384940e0) *
              r +
          2.05319162663775882187e0) *
             r +
         1.0);
    x = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) *
                 r +
             2.65321895265761230930e-2) *
                r +
            2.96560571828504891230e-1) *
               r +
           1.78482653991729133580e0) *
              r +
          5.46378491116411436990e0) *
             r +
         6.65790464350110377720e0);
    const double den =
        ((((((1.42151175831644588870e-15 * r + 1.84631831751005468180e-6) * r +
             7.86869131145613259100e-4) *
                r +
            1.48753612908506148525e-2) *
               r +
           1.36929880922735805310e-1) *
              r +
          5.99832206555887937690e-1) *
             r +
         1.0);
    x = num / den;
  }
  return (q < 0.0) ? -x : x;
}

struct Geometry {
  double duration, max_depth;
  double t_desc_end;    // reach max depth
  double t_bottom_end;  // leave max depth
  double t_asc_end;     // reach surface

  double depth_at(double t) const {
    if (t <= 0.0) return 0.0;
    if (t < t_desc_end) return t / t_desc_end * max_depth;
    if (t < t_bottom_end) return max_depth;
    if (t < t_asc_end)
      return max_depth * (t_asc_end - t) / (t_asc_end - t_bottom_end);
    return 0.0;
  }
};

struct Field {
  const CurrentProfileNodes* desc;
  const CurrentProfileNodes* asc;  // nullptr when time-constant
  double duration;

  void eval(double z, double t, double* u, double* v) const {
    const double ud = interp1_clamped(desc->depth, desc->u, z);
    const double vd = interp1_clamped(desc->depth, desc->v, z);
    if (asc == nullptr) {
      *u = ud;
      *v = vd;
      return;
    }
    const double a = std::clamp(t / duration, 0.0, 1.0);
    const double ua = interp1_clamped(asc->depth, asc->u, z);
    const double va = interp1_clamped(asc->depth, asc->v, z);
    *u = (1.0 - a) * ud + a * ua;
    *v = (1.0 - a) * vd + a * va;
  }
};

struct Ttw {
  double speed, heading0_rad, omega_rad;  // heading measured from north

  void eval(double t, double* u, double* v) const {
    const double h = heading0_rad + omega_rad * t;
    *u = speed * std::sin(h);
    *v = speed * std::cos(h);
  }

  // Exact integral of the through-water velocity over [a, b].
  void displacement(double a, double b, double* du, double* dv) const {
    if (omega_rad == 0.0) {
      *du = speed * std::sin(heading0_rad) * (b - a);
      *dv = speed * std::cos(heading0_rad) * (b - a);
      return;
    }
    const double ha = heading0_rad + omega_rad * a;
    const double hb = heading0_rad + omega_rad * b;
    *du = speed * (std::cos(ha) - std::cos(hb)) / omega_rad;
    *dv = speed * (std::sin(hb) - std::sin(ha)) / omega_rad;
  }
};

// Cumulative drift integral evaluated with Simpson's rule on a breakpoint
// partition chosen so the integrand is quadratic inside every cell (glider
// depth linear, profile linear between crossed nodes, time blend linear).
class DriftTable {
 public:
  DriftTable(const Geometry& geo, const Field& field) : geo_(geo), field_(field) {
    std::vector<double> bp = {0.0, geo.t_desc_end, geo.t_bottom_end,
                              geo.t_asc_end, geo.duration};
    auto add_crossings = [&](const CurrentProfileNodes& p) {
      for (double z : p.depth) {
        if (z <= 0.0 || z >= geo.max_depth) continue;
        bp.push_back(z / geo.max_depth * geo.t_desc_end);
        bp.push_back(geo.t_asc_end -
                     z / geo.max_depth * (geo.t_asc_end - geo.t_bottom_end));
      }
    };
    add_crossings(*field.desc);
    if (field.asc != nullptr) add_crossings(*field.asc);
    std::sort(bp.begin(), bp.end());
    for (double t : bp) {
      if (t < -1e-12 || t > geo.duration + 1e-12) continue;
      if (!t_.empty() && t - t_.back() < 1e-12) continue;
      t_.push_back(std::clamp(t, 0.0, geo.duration));
    }
    cum_u_.resize(t_.size(), 0.0);
    cum_v_.resize(t_.size(), 0.0);
    for (std::size_t i = 1; i < t_.size(); ++i) {
      double du, dv;
      simpson(t_[i - 1], t_[i], &du, &dv);
      cum_u_[i] = cum_u_[i - 1] + du;
      cum_v_[i] = cum_v_[i - 1] + dv;
    }
  }

  void drift(double t, double* du, double* dv) const {
    t = std::clamp(t, t_.front(), t_.back());
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    std::size_t i = static_cast<std::size_t>(it - t_.begin());
    if (i > 0) --i;
    if (i + 1 >= t_.size()) i = t_.size() - 2;
    double pu, pv;
    simpson(t_[i], t, &pu, &pv);
    *du = cum_u_[i] + pu;
    *dv = cum_v_[i] + pv;
  }

 private:
  void simpson(double a, double b, double* du, double* dv) const {
    if (b <= a) {
      *du = *dv = 0.0;
      return;
    }
    double ua, va, um, vm, ub, vb;
    field_.eval(geo_.depth_at(a), a, &ua, &va);
    const double m = 0.5 * (a + b);
    field_.eval(geo_.depth_at(m), m, &um, &vm);
    field_.eval(geo_.depth_at(b), b, &ub, &vb);
    const double h = (b - a) / 6.0;
    *du = h * (ua + 4.0 * um + ub);
    *dv = h * (va + 4.0 * vm + vb);
  }

  Geometry geo_;
  Field field_;
  std::vector<double> t_;
  std::vector<double> cum_u_, cum_v_;
};

void check_profile(const CurrentProfileNodes& p, const char* name) {
  if (p.depth.empty())
    throw std::invalid_argument(std::string("scenario: ") + name +
                                " has no nodes");
  if (p.u.size() != p.depth.size() || p.v.size() != p.depth.size())
    throw std::invalid_argument(std::string("scenario: ") + name +
                                " node arrays differ in length");
  for (std::size_t i = 0; i < p.depth.size(); ++i) {
    if (!std::isfinite(p.depth[i]) || !std::isfinite(p.u[i]) ||
        !std::isfinite(p.v[i]))
      throw std::invalid_argument(std::string("scenario: ") + name +
                                  " has non-finite nodes");
    if (i > 0 && p.depth[i] <= p.depth[i - 1])
      throw std::invalid_argument(std::string("scenario: ") + name +
                                  " depths not strictly increasing");
  }
}

void validate(const ScenarioSpec& s) {
  auto need = [](bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(std::string("scenario: ") + msg);
  };
  need(std::isfinite(s.dive_duration) && s.dive_duration > 0.0,
       "dive_duration must be positive");
  need(std::isfinite(s.max_depth) && s.max_depth > 0.0,
       "max_depth must be positive");
  need(std::isfinite(s.descent_rate) && s.descent_rate > 0.0,
       "descent_rate must be positive");
  need(std::isfinite(s.ascent_rate) && s.ascent_rate > 0.0,
       "ascent_rate must be positive");
  need(std::isfinite(s.bottom_gap) && s.bottom_gap >= 0.0,
       "bottom_gap must be non-negative");
  need(std::isfinite(s.ttw_speed) && s.ttw_speed >= 0.0,
       "ttw_speed must be non-negative");
  need(std::isfinite(s.heading_deg) && std::isfinite(s.heading_rate_deg_per_s),
       "heading must be finite");
  need(std::isfinite(s.ping_interval) && s.ping_interval > 0.0,
       "ping_interval must be positive");
  need(std::isfinite(s.bin_size) && s.bin_size > 0.0,
       "bin_size must be positive");
  need(s.bins_per_ping >= 1, "bins_per_ping must be at least 1");
  need(std::isfinite(s.blanking_distance) && s.blanking_distance >= 0.0,
       "blanking_distance must be non-negative");
  need(std::isfinite(s.noise_adcp) && s.noise_adcp >= 0.0,
       "noise_adcp must be non-negative");
  need(std::isfinite(s.noise_ttw) && s.noise_ttw >= 0.0,
       "noise_ttw must be non-negative");
  need(std::isfinite(s.sample_dt) && s.sample_dt > 0.0,
       "sample_dt must be positive");
  check_profile(s.current_descent, "current_descent");
  if (!s.current_ascent.empty()) check_profile(s.current_ascent, "current_ascent");
  const double flight = s.max_depth / s.descent_rate + s.bottom_gap +
                        s.max_depth / s.ascent_rate;
  need(flight <= s.dive_duration + 1e-9,
       "dive_duration too short for descent, bottom gap and ascent");
}

std::vector<double> cadence_times(double duration, double dt,
                                  const std::vector<double>& extra) {
  std::vector<double> t;
  for (int i = 0; i * dt < duration - 1e-9; ++i) t.push_back(i * dt);
  t.push_back(duration);
  t.insert(t.end(), extra.begin(), extra.end());
  std::sort(t.begin(), t.end());
  std::vector<double> out;
  for (double x : t) {
    if (x < -1e-12 || x > duration + 1e-12) continue;
    if (!out.empty() && x - out.back() < 1e-9) continue;
    out.push_back(std::clamp(x, 0.0, duration));
  }
  return out;
}

// Per-cast coverage in the same convention the estimators report.
void cast_node_touches(const std::vector<double>& z_hat,
                       const AdcpObservationSet& adcp, std::vector<int>* desc,
                       std::vector<int>* asc) {
  std::vector<bool> is_desc(adcp.z.size());
  for (std::size_t i = 0; i < adcp.z.size(); ++i)
    is_desc[i] = adcp.cast_label[i] == Cast::Descent;
  std::vector<bool> is_asc(adcp.z.size());
  for (std::size_t i = 0; i < adcp.z.size(); ++i) is_asc[i] = !is_desc[i];
  *desc = count_node_touches(z_hat, adcp.z, &is_desc);
  *asc = count_node_touches(z_hat, adcp.z, &is_asc);
}

}  // namespace

double GaussianStream::next() {
  // 53-bit mantissa draw strictly inside (0,1).
  const double u =
      (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  return inverse_normal_cdf(u);
}

SyntheticDive generate(const ScenarioSpec& spec) {
  validate(spec);

  Geometry geo;
  geo.duration = spec.dive_duration;
  geo.max_depth = spec.max_depth;
  geo.t_desc_end = spec.max_depth / spec.descent_rate;
  geo.t_bottom_end = geo.t_desc_end + spec.bottom_gap;
  geo.t_asc_end = geo.t_bottom_end + spec.max_depth / spec.ascent_rate;

  const bool two_fields = !spec.current_ascent.empty();
  Field field{&spec.current_descent,
              two_fields ? &spec.current_ascent : nullptr, spec.dive_duration};
  Ttw ttw{spec.ttw_speed, spec.heading_deg * kPi / 180.0,
          spec.heading_rate_deg_per_s * kPi / 180.0};
  DriftTable drift(geo, field);

  GaussianStream noise(spec.seed);
  const double cast_split = 0.5 * (geo.t_desc_end + geo.t_bottom_end);

  SyntheticDive out;
  DiveRecord& dive = out.dive;

  // ADCP pings: every ping_interval while the instrument is on; bins that
  // land above the surface are dropped, so near-surface pings with nothing
  // in the water contribute no samples.
  int ping_counter = 0;
  for (int k = 1;; ++k) {
    const double t = k * spec.ping_interval;
    if (t > spec.dive_duration - 1e-9) break;
    if (t > geo.t_desc_end + 1e-9 && t < geo.t_bottom_end - 1e-9) continue;
    const double zg = geo.depth_at(t);
    std::vector<double> bins;
    for (int i = 1; i <= spec.bins_per_ping; ++i) {
      const double off = spec.blanking_distance + i * spec.bin_size;
      const double zb =
          spec.facing == AdcpFacing::Up ? zg - off : zg + off;
      if (zb < -1e-12) continue;
      bins.push_back(std::max(zb, 0.0));
    }
    if (bins.empty()) continue;
    double gu, gv, tu, tv;
    field.eval(zg, t, &gu, &gv);
    ttw.eval(t, &tu, &tv);
    gu += tu;  // over-the-ground glider velocity
    gv += tv;
    for (double zb : bins) {
      double cu, cv;
      field.eval(zb, t, &cu, &cv);
      dive.adcp.u_rel.push_back(cu - gu + spec.noise_adcp * noise.next());
      dive.adcp.v_rel.push_back(cv - gv + spec.noise_adcp * noise.next());
      dive.adcp.t.push_back(t);
      dive.adcp.z.push_back(zb);
      dive.adcp.ping_index.push_back(ping_counter);
      dive.adcp.cast_label.push_back(t <= cast_split ? Cast::Descent
                                                     : Cast::Ascent);
    }
    ++ping_counter;
  }

  const std::vector<double> corners = {geo.t_desc_end, geo.t_bottom_end,
                                       geo.t_asc_end};
  const std::vector<double> base =
      cadence_times(spec.dive_duration, spec.sample_dt, corners);

  dive.depth.t = base;
  dive.depth.z.reserve(base.size());
  for (double t : base) dive.depth.z.push_back(geo.depth_at(t));

  dive.ttw.t = base;
  for (double t : base) {
    double tu, tv;
    ttw.eval(t, &tu, &tv);
    dive.ttw.u_ttw.push_back(tu + spec.noise_ttw * noise.next());
    dive.ttw.v_ttw.push_back(tv + spec.noise_ttw * noise.next());
  }

  auto position = [&](double t, double* e, double* n) {
    double du, dv, pu, pv;
    drift.drift(t, &du, &dv);
    ttw.displacement(0.0, t, &pu, &pv);
    *e = spec.start_east + du + pu;
    *n = spec.start_north + dv + pv;
  };

  dive.gps_start = {0.0, spec.start_east, spec.start_north};
  double ee, en;
  position(spec.dive_duration, &ee, &en);
  dive.gps_end = {spec.dive_duration, ee, en};

  out.truth_t = base;
  out.truth_east.reserve(base.size());
  for (double t : base) {
    double e, n;
    position(t, &e, &n);
    out.truth_east.push_back(e);
    out.truth_north.push_back(n);
    double cu, cv, tu, tv;
    field.eval(geo.depth_at(t), t, &cu, &cv);
    ttw.eval(t, &tu, &tv);
    out.truth_u_otg.push_back(cu + tu);
    out.truth_v_otg.push_back(cv + tv);
  }

  // Truth profile on the grid the estimators will use for this dive.
  const VelocityGrids grids = build_velocity_grids(dive, spec.bin_size);
  CurrentProfileEstimate& tp = out.truth_profile;
  tp.z_hat = grids.z_hat;
  const std::size_t L = tp.z_hat.size();
  tp.u.resize(L);
  tp.v.resize(L);
  if (two_fields) {
    tp.form = ProfileForm::TwoProfile;
    tp.u_descent.resize(L);
    tp.v_descent.resize(L);
    tp.u_ascent.resize(L);
    tp.v_ascent.resize(L);
  } else {
    tp.form = ProfileForm::Single;
  }
  for (std::size_t l = 0; l < L; ++l) {
    const double z = tp.z_hat[l];
    const double zc = std::min(z, geo.max_depth);
    const double td = zc / spec.descent_rate;
    const double ta = geo.t_bottom_end + (geo.max_depth - zc) / spec.ascent_rate;
    double ud, vd, ua, va;
    field.eval(z, td, &ud, &vd);
    field.eval(z, ta, &ua, &va);
    if (two_fields) {
      tp.u_descent[l] = ud;
      tp.v_descent[l] = vd;
      tp.u_ascent[l] = ua;
      tp.v_ascent[l] = va;
      tp.u[l] = 0.5 * (ud + ua);
      tp.v[l] = 0.5 * (vd + va);
    } else {
      tp.u[l] = ud;
      tp.v[l] = vd;
    }
  }
  std::vector<int> cd, ca;
  cast_node_touches(tp.z_hat, dive.adcp, &cd, &ca);
  tp.coverage.resize(L);
  for (std::size_t l = 0; l < L; ++l) tp.coverage[l] = cd[l] + ca[l];
  if (two_fields) {
    tp.coverage_descent = cd;
    tp.coverage_ascent = ca;
  }

  const std::vector<Violation> bad = validate_dive(dive);
  if (!bad.empty())
    throw std::logic_error("generated dive failed validation: " +
                           bad.front().code);
  return out;
}

CoverageHistogram coverage_histogram(const DiveRecord& dive, double dz) {
  if (!(dz > 0.0) || !std::isfinite(dz))
    throw std::invalid_argument("coverage_histogram: dz must be positive");
  const AdcpObservationSet& a = dive.adcp;
  double zmax = 0.0;
  for (double z : a.z) zmax = std::max(zmax, z);
  const int ncells = static_cast<int>(std::llround(zmax / dz)) + 1;

  CoverageHistogram h;
  h.z_cells.resize(static_cast<std::size_t>(ncells));
  for (int c = 0; c < ncells; ++c) h.z_cells[static_cast<std::size_t>(c)] = c * dz;
  h.descent.assign(h.z_cells.size(), 0);
  h.ascent.assign(h.z_cells.size(), 0);
  h.total.assign(h.z_cells.size(), 0);

  // A ping counts once per cell it reaches, tracked with last-seen markers
  // (samples arrive grouped by ping).
  std::vector<int> seen_d(h.z_cells.size(), -1), seen_a(h.z_cells.size(), -1);
  for (std::size_t i = 0; i < a.z.size(); ++i) {
    const int cell = static_cast<int>(std::llround(a.z[i] / dz));
    if (cell < 0 || cell >= ncells) continue;
    const std::size_t c = static_cast<std::size_t>(cell);
    const int ping = a.ping_index[i];
    if (a.cast_label[i] == Cast::Descent) {
      if (seen_d[c] != ping) {
        seen_d[c] = ping;
        ++h.descent[c];
      }
    } else {
      if (seen_a[c] != ping) {
        seen_a[c] = ping;
        ++h.ascent[c];
      }
    }
  }
  for (std::size_t c = 0; c < h.z_cells.size(); ++c)
    h.total[c] = h.descent[c] + h.ascent[c];
  return h;
}

}  // namespace gliderdec
