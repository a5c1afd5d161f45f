#include "gliderdec/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "gliderdec/operators.hpp"
#include "gliderdec/simulator.hpp"

using namespace gliderdec;

#define CHECK_NEAR(a, b, tol) CHECK(std::abs((a) - (b)) <= (tol))

namespace {

double max_profile_error(const CurrentProfileEstimate& est,
                         const CurrentProfileEstimate& truth) {
  REQUIRE(est.z_hat.size() == truth.z_hat.size());
  double worst = 0.0;
  for (std::size_t l = 0; l < est.z_hat.size(); ++l) {
    worst = std::max(worst, std::abs(est.u[l] - truth.u[l]));
    worst = std::max(worst, std::abs(est.v[l] - truth.v[l]));
  }
  return worst;
}

double trapezoid(const std::vector<double>& t, const std::vector<double>& f) {
  double s = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i)
    s += 0.5 * (t[i] - t[i - 1]) * (f[i] + f[i - 1]);
  return s;
}

const BlockResidual& find_block(const InversionResult& r, const char* label) {
  for (const BlockResidual& b : r.residuals)
    if (b.label == label) return b;
  REQUIRE(false);
  return r.residuals.front();
}

}  // namespace

TEST_CASE("noise-free constant current is recovered to solver precision") {
  ScenarioSpec s;
  s.current_descent = {{0.0}, {0.08}, {-0.03}};
  const SyntheticDive sd = generate(s);
  const InversionResult r = invert_currents(sd.dive);

  CHECK(r.profile.form == ProfileForm::Single);
  CHECK(max_profile_error(r.profile, sd.truth_profile) < 1e-8);

  const double h = s.heading_deg * M_PI / 180.0;
  const double ug = 0.08 + s.ttw_speed * std::sin(h);
  const double vg = -0.03 + s.ttw_speed * std::cos(h);
  for (std::size_t m = 0; m < r.glider.t_hat.size(); ++m) {
    CHECK_NEAR(r.glider.u_g[m], ug, 1e-8);
    CHECK_NEAR(r.glider.v_g[m], vg, 1e-8);
  }

  // The fitted history integrates to the observed displacement.
  const double de = trapezoid(r.glider.t_hat, r.glider.u_g);
  CHECK_NEAR(de, sd.dive.gps_end.east - sd.dive.gps_start.east, 1e-6);

  for (const BlockResidual& b : r.residuals) {
    CHECK(b.rms_u < 1e-7);
    CHECK(b.rms_v < 1e-7);
  }
}

TEST_CASE("noise-free depth-linear shear is recovered") {
  ScenarioSpec s;
  // Gentle shear keeps the temporal curvature penalty's kink bias far below
  // the pinned tolerance.
  s.current_descent = {{0.0, 250.0}, {0.05, 0.01}, {-0.02, 0.02}};
  const SyntheticDive sd = generate(s);
  const InversionResult r = invert_currents(sd.dive);
  CHECK(max_profile_error(r.profile, sd.truth_profile) < 1e-6);
}

TEST_CASE("noisy recovery stays within a few millimetres per second") {
  ScenarioSpec s;
  s.current_descent = {{0.0, 250.0}, {0.05, 0.01}, {-0.02, 0.02}};
  s.noise_adcp = 0.03;
  s.noise_ttw = 0.05;
  s.seed = 99;
  const SyntheticDive sd = generate(s);
  const InversionResult r = invert_currents(sd.dive);

  // Long-wavelength vertical modes are pinned only by the single dive
  // displacement, so node errors exceed the per-sample noise floor.
  double worst = 0.0, sum2 = 0.0;
  int n = 0;
  for (std::size_t l = 0; l < r.profile.z_hat.size(); ++l) {
    if (r.profile.coverage[l] < 5) continue;
    const double eu = r.profile.u[l] - sd.truth_profile.u[l];
    const double ev = r.profile.v[l] - sd.truth_profile.v[l];
    worst = std::max({worst, std::abs(eu), std::abs(ev)});
    sum2 += eu * eu + ev * ev;
    n += 2;
  }
  CHECK(worst < 0.08);
  CHECK(worst > 0.0);
  CHECK(std::sqrt(sum2 / n) < 0.03);

  // Residual scale matches the injected noise.
  const BlockResidual& adcp = find_block(r, "adcp");
  CHECK(adcp.rms_u > 0.5 * s.noise_adcp);
  CHECK(adcp.rms_u < 1.5 * s.noise_adcp);
  const BlockResidual& ttw = find_block(r, "ttw");
  CHECK(ttw.rms_u < 1.5 * s.noise_ttw);

  const double de = trapezoid(r.glider.t_hat, r.glider.u_g);
  CHECK_NEAR(de, sd.dive.gps_end.east - sd.dive.gps_start.east,
             2.0 * 10.0 /* sigma_gps */);
}

TEST_CASE("two-profile fit on a steady field recovers both branches") {
  ScenarioSpec s;
  s.current_descent = {{0.0, 250.0}, {0.12, 0.02}, {0.04, -0.03}};
  const SyntheticDive sd = generate(s);
  InversionConfig cfg;
  cfg.two_profile = true;
  const InversionResult r = invert_currents(sd.dive, cfg);
  REQUIRE(r.profile.form == ProfileForm::TwoProfile);
  // The stiff deep-node tie raises the system's condition number, so branch
  // recovery is solver-limited rather than machine-precision.
  double worst = 0.0;
  for (std::size_t l = 0; l < r.profile.z_hat.size(); ++l)
    worst = std::max(
        {worst, std::abs(r.profile.u_descent[l] - sd.truth_profile.u[l]),
         std::abs(r.profile.u_ascent[l] - sd.truth_profile.u[l]),
         std::abs(r.profile.v_descent[l] - sd.truth_profile.v[l]),
         std::abs(r.profile.v_ascent[l] - sd.truth_profile.v[l])});
  CHECK(worst < 5e-5);
}

TEST_CASE("two-profile fit separates descent and ascent branches") {
  ScenarioSpec s;
  s.current_descent = {{0.0, 200.0}, {0.20, 0.05}, {0.00, 0.00}};
  s.current_ascent = {{0.0, 200.0}, {0.00, -0.05}, {0.10, 0.10}};
  const SyntheticDive sd = generate(s);

  InversionConfig cfg;
  cfg.two_profile = true;
  const InversionResult r = invert_currents(sd.dive, cfg);
  REQUIRE(r.profile.form == ProfileForm::TwoProfile);
  REQUIRE(r.profile.u_descent.size() == r.profile.z_hat.size());

  // An antisymmetric glider-velocity/branch trade-off is only weakly pinned
  // (displacement integral, curvature penalties, deep-node tie), so the
  // branches carry a tilt of several cm/s while their mean stays accurate.
  double worst_branch = 0.0, worst_mean = 0.0;
  for (std::size_t l = 0; l < r.profile.z_hat.size(); ++l) {
    if (r.profile.coverage_descent[l] < 3 || r.profile.coverage_ascent[l] < 3)
      continue;
    worst_branch = std::max(
        {worst_branch,
         std::abs(r.profile.u_descent[l] - sd.truth_profile.u_descent[l]),
         std::abs(r.profile.u_ascent[l] - sd.truth_profile.u_ascent[l]),
         std::abs(r.profile.v_descent[l] - sd.truth_profile.v_descent[l]),
         std::abs(r.profile.v_ascent[l] - sd.truth_profile.v_ascent[l])});
    worst_mean = std::max({worst_mean,
                           std::abs(r.profile.u[l] - sd.truth_profile.u[l]),
                           std::abs(r.profile.v[l] - sd.truth_profile.v[l])});
  }
  CHECK(worst_branch < 0.12);
  CHECK(worst_mean < 0.02);

  // Combined estimate is the branch mean; branches agree at the deepest node.
  for (std::size_t l = 0; l < r.profile.z_hat.size(); ++l)
    CHECK_NEAR(r.profile.u[l],
               0.5 * (r.profile.u_descent[l] + r.profile.u_ascent[l]), 1e-12);
  const std::size_t last = r.profile.z_hat.size() - 1;
  CHECK_NEAR(r.profile.u_descent[last], r.profile.u_ascent[last], 1e-4);
  CHECK_NEAR(r.profile.v_descent[last], r.profile.v_ascent[last], 1e-4);

  // Coverage splits agree with the generator's accounting on the same grid.
  REQUIRE(r.profile.coverage_descent.size() ==
          sd.truth_profile.coverage_descent.size());
  for (std::size_t l = 0; l < r.profile.coverage_descent.size(); ++l) {
    CHECK(r.profile.coverage_descent[l] == sd.truth_profile.coverage_descent[l]);
    CHECK(r.profile.coverage_ascent[l] == sd.truth_profile.coverage_ascent[l]);
  }
}

TEST_CASE("two-profile form switches on for dives over two hours") {
  ScenarioSpec s;
  s.dive_duration = 8000.0;
  const SyntheticDive sd = generate(s);
  CHECK(invert_currents(sd.dive).profile.form == ProfileForm::TwoProfile);

  InversionConfig single;
  single.two_profile = false;
  CHECK(invert_currents(sd.dive, single).profile.form == ProfileForm::Single);

  ScenarioSpec fast;
  fast.dive_duration = 3600.0;
  const SyntheticDive sf = generate(fast);
  CHECK(invert_currents(sf.dive).profile.form == ProfileForm::Single);
}

TEST_CASE("re-centred smoothing preserves commanded turns") {
  ScenarioSpec s;
  s.current_descent = {{0.0}, {0.06}, {-0.04}};
  s.heading_rate_deg_per_s = 0.5;  // five full turns across the dive
  s.sample_dt = 1.0;
  const SyntheticDive sd = generate(s);

  InversionConfig otg;
  otg.smoothing_target = SmoothingTarget::Otg;
  InversionConfig rel;
  rel.smoothing_target = SmoothingTarget::TtwResidual;

  const double err_otg =
      max_profile_error(invert_currents(sd.dive, otg).profile,
                        sd.truth_profile);
  const double err_rel =
      max_profile_error(invert_currents(sd.dive, rel).profile,
                        sd.truth_profile);
  CHECK(err_rel < err_otg);
  CHECK(err_rel < 1e-5);
}

TEST_CASE("invalid configuration and invalid dives are rejected") {
  ScenarioSpec s;
  const SyntheticDive sd = generate(s);

  InversionConfig bad;
  bad.dz = 0.0;
  CHECK_THROWS_AS(invert_currents(sd.dive, bad), std::invalid_argument);
  bad = {};
  bad.sigma_adcp = -1.0;
  CHECK_THROWS_AS(invert_currents(sd.dive, bad), std::invalid_argument);
  bad = {};
  bad.lambda_g = -0.5;
  CHECK_THROWS_AS(invert_currents(sd.dive, bad), std::invalid_argument);

  DiveRecord broken = sd.dive;
  broken.gps_end.time = broken.adcp.t.back() - 1.0;
  CHECK_THROWS_AS(invert_currents(broken), std::invalid_argument);
}

TEST_CASE("block residual report covers every design block") {
  ScenarioSpec s;
  const SyntheticDive sd = generate(s);
  InversionConfig cfg;
  cfg.two_profile = true;
  const InversionResult r = invert_currents(sd.dive, cfg);
  std::vector<std::string> want = {"adcp", "gps", "ttw", "smooth_glider",
                                   "smooth_profile", "bottom_match"};
  for (const std::string& label : want) {
    bool found = false;
    for (const BlockResidual& b : r.residuals)
      if (b.label == label) found = true;
    CHECK_MESSAGE(found, label);
  }
  CHECK(find_block(r, "adcp").rows == sd.dive.adcp.size());
  CHECK(r.condition_estimate > 1.0);
}
