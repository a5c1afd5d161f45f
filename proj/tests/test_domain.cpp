#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "gliderdec/domain.hpp"

using namespace gliderdec;

namespace {

// Minimal valid dive: three pings of two samples, V-shaped depth.
DiveRecord small_dive() {
  DiveRecord d;
  d.adcp.t = {10, 10, 20, 20, 30, 30};
  d.adcp.z = {4, 2, 6, 4, 4, 2};
  d.adcp.u_rel = {0.1, 0.1, 0.1, 0.1, 0.1, 0.1};
  d.adcp.v_rel = {0, 0, 0, 0, 0, 0};
  d.adcp.ping_index = {0, 0, 1, 1, 2, 2};
  d.adcp.cast_label = {Cast::Descent, Cast::Descent, Cast::Descent,
                       Cast::Descent, Cast::Ascent, Cast::Ascent};
  d.ttw.t = {0, 10, 20, 30, 40};
  d.ttw.u_ttw = {0.2, 0.2, 0.2, 0.2, 0.2};
  d.ttw.v_ttw = {0, 0, 0, 0, 0};
  d.depth.t = {0, 10, 20, 30, 40};
  d.depth.z = {0, 5, 10, 5, 0};
  d.gps_start = {0, 0, 0};
  d.gps_end = {40, 8, 0};
  return d;
}

bool has_code(const std::vector<Violation>& v, const std::string& code) {
  for (const auto& w : v)
    if (w.code == code) return true;
  return false;
}

}  // namespace

TEST_CASE("well-formed dive validates cleanly") {
  auto d = small_dive();
  CHECK(validate_dive(d).empty());
  CHECK_NOTHROW(make_dive_record(d.adcp, d.ttw, d.depth, d.gps_start, d.gps_end));
}

TEST_CASE("gps end before last ping is reported") {
  auto d = small_dive();
  d.gps_end.time = 25.0;
  auto v = validate_dive(d);
  CHECK(has_code(v, "gps_end_before_last_ping"));
}

TEST_CASE("NaN sample names the array and index") {
  auto d = small_dive();
  d.adcp.u_rel[3] = std::numeric_limits<double>::quiet_NaN();
  auto v = validate_dive(d);
  REQUIRE(has_code(v, "nonfinite_u_rel"));
  for (const auto& w : v)
    if (w.code == "nonfinite_u_rel") {
      REQUIRE(w.index.has_value());
      CHECK(*w.index == 3);
    }
}

TEST_CASE("construction fails exactly when validation reports violations") {
  auto good = small_dive();
  CHECK(validate_dive(good).empty());
  CHECK_NOTHROW(make_dive_record(good.adcp, good.ttw, good.depth,
                                 good.gps_start, good.gps_end));

  // Each mutation below must both fail construction and appear in the report.
  auto check_rejected = [](DiveRecord d, const std::string& code) {
    CAPTURE(code);
    auto v = validate_dive(d);
    CHECK(has_code(v, code));
    CHECK_THROWS_AS(
        make_dive_record(d.adcp, d.ttw, d.depth, d.gps_start, d.gps_end),
        std::invalid_argument);
  };

  auto d = small_dive();
  d.adcp.t.pop_back();
  check_rejected(d, "adcp_length_mismatch");

  d = small_dive();
  d.ttw.t[2] = d.ttw.t[1];  // not strictly increasing
  check_rejected(d, "ttw_time_not_increasing");

  d = small_dive();
  d.depth.z = {0, 10, 3, 10, 0};  // two separate deepest regions
  check_rejected(d, "depth_max_not_unique_region");

  d = small_dive();
  d.gps_start.time = 10.0;  // coincides with first ping
  check_rejected(d, "gps_start_after_first_ping");

  d = small_dive();
  d.adcp.t[0] = -5.0;  // before the depth series starts
  check_rejected(d, "ping_outside_depth_span");

  d = small_dive();
  d.depth.z[1] = -1.0;
  check_rejected(d, "negative_depth");
}

TEST_CASE("multiple violations are all reported") {
  auto d = small_dive();
  d.gps_end.time = 25.0;
  d.adcp.v_rel[0] = std::numeric_limits<double>::infinity();
  auto v = validate_dive(d);
  CHECK(v.size() >= 2);
  CHECK(has_code(v, "gps_end_before_last_ping"));
  CHECK(has_code(v, "nonfinite_v_rel"));
}

TEST_CASE("equirectangular projection anchors at the start fix") {
  double e = 0.0, n = 0.0;
  latlon_to_local(48.0, -123.0, 48.0, -123.0, e, n);
  CHECK(e == doctest::Approx(0.0));
  CHECK(n == doctest::Approx(0.0));

  // One degree of latitude is about 111.2 km; longitude shrinks by cos(lat).
  latlon_to_local(48.01, -123.0, 48.0, -123.0, e, n);
  CHECK(n == doctest::Approx(1112.0).epsilon(0.01));
  CHECK(e == doctest::Approx(0.0));

  latlon_to_local(48.0, -122.99, 48.0, -123.0, e, n);
  CHECK(e == doctest::Approx(1112.0 * std::cos(48.0 * M_PI / 180.0)).epsilon(0.01));
}

TEST_CASE("descent end time splits the deepest plateau") {
  DepthSeries s;
  s.t = {0, 10, 20, 30, 40};
  s.z = {0, 10, 10, 10, 0};
  CHECK(descent_end_time(s) == doctest::Approx(20.0));

  DepthSeries v;
  v.t = {0, 10, 20};
  v.z = {0, 10, 0};
  CHECK(descent_end_time(v) == doctest::Approx(10.0));
}
