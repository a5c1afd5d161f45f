#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace gliderdec {

enum class Cast : char { Descent = 'D', Ascent = 'A' };

/// GPS position in the local tangent plane anchored at the dive-start fix.
/// The start fix is (0, 0) by construction; times are seconds on the dive clock.
struct GpsFix {
  double time = 0.0;
  double east = 0.0;   // m
  double north = 0.0;  // m
};

/// Flattened set of valid relative-velocity samples from all pings.
/// Sign convention: sample = ocean velocity at bin depth minus glider
/// over-the-ground velocity at ping time, plus instrument noise.
struct AdcpObservationSet {
  std::vector<double> u_rel;  // m/s, east
  std::vector<double> v_rel;  // m/s, north
  std::vector<double> t;      // s
  std::vector<double> z;      // m, positive down
  std::vector<int> ping_index;
  std::vector<Cast> cast_label;

  std::size_t size() const { return t.size(); }
};

/// Through-the-water velocity derived from heading, pitch and speed.
struct TtwVelocitySeries {
  std::vector<double> t;      // s, strictly increasing
  std::vector<double> u_ttw;  // m/s
  std::vector<double> v_ttw;  // m/s
};

struct DepthSeries {
  std::vector<double> t;  // s, strictly increasing
  std::vector<double> z;  // m, positive down, >= 0
};

/// One dive's complete solver input.
struct DiveRecord {
  AdcpObservationSet adcp;
  TtwVelocitySeries ttw;
  DepthSeries depth;
  GpsFix gps_start;
  GpsFix gps_end;

  double duration() const { return gps_end.time - gps_start.time; }
};

/// Discretization shared by both estimation methods. t_hat is strictly
/// increasing and contains every ping time; z_hat[l] = l * dz.
struct VelocityGrids {
  std::vector<double> t_hat;
  std::vector<double> z_hat;
  double dz = 0.0;
};

enum class ProfileForm { Single, TwoProfile };

/// Ocean current profile on z_hat. In two-profile form the descent and
/// ascent branches are populated and (u, v) hold their per-node mean.
struct CurrentProfileEstimate {
  std::vector<double> z_hat;
  std::vector<double> u, v;   // m/s
  std::vector<int> coverage;  // ADCP samples whose interpolation row touches the node
  ProfileForm form = ProfileForm::Single;
  std::vector<double> u_descent, v_descent;
  std::vector<double> u_ascent, v_ascent;
  std::vector<int> coverage_descent, coverage_ascent;
};

/// Glider over-the-ground velocity on the temporal grid.
struct GliderVelocitySeries {
  std::vector<double> t_hat;
  std::vector<double> u_g, v_g;  // m/s
};

/// One invariant violation found in a dive record.
struct Violation {
  std::string code;     // machine readable, e.g. "gps_end_before_last_ping"
  std::string message;  // human readable
  std::optional<std::size_t> index;  // offending sample where applicable
};

/// Checks every dive invariant and returns all violations found (empty when
/// the record is valid). Codes are stable identifiers meant for callers.
std::vector<Violation> validate_dive(const DiveRecord& dive);

/// Builds a dive record from raw parts; throws std::invalid_argument listing
/// every violation code when the parts break an invariant. A record returned
/// from here always passes validate_dive with zero violations.
DiveRecord make_dive_record(AdcpObservationSet adcp, TtwVelocitySeries ttw,
                            DepthSeries depth, GpsFix gps_start, GpsFix gps_end);

/// Equirectangular projection about an anchor fix. Adequate for dives well
/// under 10 km of horizontal extent.
void latlon_to_local(double lat_deg, double lon_deg,
                     double anchor_lat_deg, double anchor_lon_deg,
                     double& east_m, double& north_m);

/// Time the glider stops descending: midpoint of the deepest contiguous
/// region of the depth series. Samples exactly at the deepest point belong
/// to the descent phase.
double descent_end_time(const DepthSeries& depth);

}  // namespace gliderdec
