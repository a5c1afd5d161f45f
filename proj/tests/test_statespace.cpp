#include "gliderdec/statespace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
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

// Truth positions are exact at the generator's cadence; linear interpolation
// onto the estimator's epochs.
double max_track_error(const TrajectoryEstimate& tr, const SyntheticDive& sd) {
  double worst = 0.0;
  for (std::size_t k = 0; k < tr.t.size(); ++k) {
    const double te = interp1_clamped(sd.truth_t, sd.truth_east, tr.t[k]);
    const double tn = interp1_clamped(sd.truth_t, sd.truth_north, tr.t[k]);
    worst = std::max({worst, std::abs(tr.east[k] - te),
                      std::abs(tr.north[k] - tn)});
  }
  return worst;
}

}  // namespace

TEST_CASE("noise-free uniform current: profile, track and rates are exact") {
  ScenarioSpec s;
  s.current_descent = {{0.0}, {0.08}, {-0.03}};
  s.start_east = 12.0;
  s.start_north = -7.0;
  const SyntheticDive sd = generate(s);
  const StateSpaceResult r = estimate_joint(sd.dive);

  CHECK(max_profile_error(r.profile, sd.truth_profile) < 1e-6);
  CHECK(max_track_error(r.trajectory, sd) < 1e-6);

  CHECK_NEAR(r.trajectory.east.front(), sd.dive.gps_start.east, 1e-6);
  CHECK_NEAR(r.trajectory.east.back(), sd.dive.gps_end.east, 1e-6);
  CHECK_NEAR(r.trajectory.north.back(), sd.dive.gps_end.north, 1e-6);

  const double h = s.heading_deg * M_PI / 180.0;
  const double ug = 0.08 + s.ttw_speed * std::sin(h);
  const double vg = -0.03 + s.ttw_speed * std::cos(h);
  for (std::size_t k = 0; k < r.trajectory.t.size(); ++k) {
    CHECK_NEAR(r.trajectory.u_g[k], ug, 1e-6);
    CHECK_NEAR(r.trajectory.v_g[k], vg, 1e-6);
  }
}

TEST_CASE("noise-free depth-linear shear is tracked through the process model") {
  ScenarioSpec s;
  s.current_descent = {{0.0, 250.0}, {0.05, 0.01}, {-0.02, 0.02}};
  const SyntheticDive sd = generate(s);
  const StateSpaceResult r = estimate_joint(sd.dive);
  // A depth-linear field makes the glider velocity drift at a steady rate,
  // which the white-acceleration prior resists. The residual bias at the
  // default acceleration scale stays near 1 cm/s in the profile and under
  // ten metres along the track.
  CHECK(max_profile_error(r.profile, sd.truth_profile) < 0.02);
  CHECK(max_track_error(r.trajectory, sd) < 10.0);

  // Loosening the prior lets the fit follow the drift: an order of magnitude
  // on sigma_accel buys roughly an order of magnitude in both figures.
  StateSpaceConfig loose;
  loose.sigma_accel = 1e-2;
  const StateSpaceResult r2 = estimate_joint(sd.dive, loose);
  CHECK(max_profile_error(r2.profile, sd.truth_profile) <
        0.25 * max_profile_error(r.profile, sd.truth_profile));
  CHECK(max_track_error(r2.trajectory, sd) <
        0.25 * max_track_error(r.trajectory, sd));
  CHECK(max_profile_error(r2.profile, sd.truth_profile) < 2e-3);
}

TEST_CASE("noisy joint fit stays near truth and reports sane residuals") {
  ScenarioSpec s;
  s.current_descent = {{0.0, 250.0}, {0.05, 0.01}, {-0.02, 0.02}};
  s.noise_adcp = 0.03;
  s.noise_ttw = 0.05;
  s.seed = 321;
  const SyntheticDive sd = generate(s);
  const StateSpaceResult r = estimate_joint(sd.dive);

  double worst = 0.0;
  for (std::size_t l = 0; l < r.profile.z_hat.size(); ++l) {
    if (r.profile.coverage[l] < 5) continue;
    worst = std::max({worst, std::abs(r.profile.u[l] - sd.truth_profile.u[l]),
                      std::abs(r.profile.v[l] - sd.truth_profile.v[l])});
  }
  CHECK(worst < 0.08);
  CHECK(worst > 0.0);
  CHECK(max_track_error(r.trajectory, sd) < 30.0);

  // Surfacing fixes hold the endpoints much tighter than the open water.
  CHECK_NEAR(r.trajectory.east.front(), sd.dive.gps_start.east, 3.0);
  CHECK_NEAR(r.trajectory.east.back(), sd.dive.gps_end.east, 3.0);

  bool saw_adcp = false;
  for (const BlockResidual& b : r.residuals) {
    if (b.label == "adcp") {
      saw_adcp = true;
      CHECK(b.rms_u > 0.5 * s.noise_adcp);
      CHECK(b.rms_u < 1.5 * s.noise_adcp);
    }
  }
  CHECK(saw_adcp);
  CHECK(r.condition_estimate > 1.0);
}

TEST_CASE("fitted track obeys the transition kinematics") {
  ScenarioSpec s;
  s.current_descent = {{0.0, 250.0}, {0.10, 0.00}, {0.00, 0.05}};
  s.noise_adcp = 0.03;
  s.noise_ttw = 0.05;
  s.seed = 77;
  const SyntheticDive sd = generate(s);
  const StateSpaceResult r = estimate_joint(sd.dive);
  double worst = 0.0;
  for (std::size_t k = 1; k < r.trajectory.t.size(); ++k) {
    const double dt = r.trajectory.t[k] - r.trajectory.t[k - 1];
    worst = std::max(worst,
                     std::abs(r.trajectory.east[k] - r.trajectory.east[k - 1] -
                              dt * r.trajectory.u_g[k - 1]));
  }
  CHECK(worst < 0.5);  // well inside the white-acceleration envelope
}

TEST_CASE("profile coverage matches the generator accounting") {
  ScenarioSpec s;
  const SyntheticDive sd = generate(s);
  const StateSpaceResult r = estimate_joint(sd.dive);
  REQUIRE(r.profile.coverage.size() == sd.truth_profile.coverage.size());
  for (std::size_t l = 0; l < r.profile.coverage.size(); ++l)
    CHECK(r.profile.coverage[l] == sd.truth_profile.coverage[l]);
}

TEST_CASE("invalid configuration and invalid dives are rejected") {
  ScenarioSpec s;
  const SyntheticDive sd = generate(s);

  StateSpaceConfig bad;
  bad.sigma_accel = 0.0;
  CHECK_THROWS_AS(estimate_joint(sd.dive, bad), std::invalid_argument);
  bad = {};
  bad.eta1 = -1.0;
  CHECK_THROWS_AS(estimate_joint(sd.dive, bad), std::invalid_argument);
  bad = {};
  bad.dz = -2.0;
  CHECK_THROWS_AS(estimate_joint(sd.dive, bad), std::invalid_argument);

  DiveRecord broken = sd.dive;
  broken.adcp.u_rel[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(estimate_joint(broken), std::invalid_argument);
}
