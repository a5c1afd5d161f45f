#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "gliderdec/domain.hpp"

namespace gliderdec {

/// Ocean current versus depth, piecewise linear between nodes and clamped
/// beyond them. Depths strictly increasing.
struct CurrentProfileNodes {
  std::vector<double> depth;
  std::vector<double> u;
  std::vector<double> v;

  bool empty() const { return depth.empty(); }
};

enum class AdcpFacing { Up, Down };

/// Synthetic dive description. The glider descends at descent_rate, dwells
/// bottom_gap seconds at max_depth with the ADCP off, ascends, then holds at
/// the surface until dive_duration. When current_ascent is non-empty the
/// field interpolates linearly in time between the descent-phase and
/// ascent-phase profiles across the dive.
struct ScenarioSpec {
  double dive_duration = 3600.0;  // s
  double max_depth = 200.0;       // m
  double descent_rate = 0.125;    // m/s
  double ascent_rate = 0.125;     // m/s
  double bottom_gap = 120.0;      // s of ADCP silence at max depth

  double ttw_speed = 0.25;              // m/s, constant over the dive
  double heading_deg = 60.0;            // clockwise from north
  double heading_rate_deg_per_s = 0.0;  // optional slow turn

  CurrentProfileNodes current_descent{{0.0, 250.0}, {0.12, 0.0}, {0.04, 0.0}};
  CurrentProfileNodes current_ascent;  // empty: time-constant field

  double ping_interval = 15.0;     // s
  double bin_size = 2.0;           // m
  int bins_per_ping = 6;
  double blanking_distance = 2.0;  // m
  AdcpFacing facing = AdcpFacing::Up;

  double noise_adcp = 0.0;  // m/s, Gaussian sigma per sample component
  double noise_ttw = 0.0;   // m/s
  std::uint64_t seed = 1;

  double start_east = 0.0;  // surfacing fix at t = 0
  double start_north = 0.0;
  double sample_dt = 5.0;  // depth/TTW/truth-state cadence
};

struct SyntheticDive {
  DiveRecord dive;
  CurrentProfileEstimate truth_profile;
  std::vector<double> truth_t;
  std::vector<double> truth_east, truth_north;    // exact integrated positions
  std::vector<double> truth_u_otg, truth_v_otg;   // over-the-ground velocity
};

/// Deterministic for a fixed spec: the RNG is seeded and all Gaussian draws
/// go through a fixed inverse-CDF transform, so streams are identical across
/// platforms. Throws std::invalid_argument on infeasible scenarios.
SyntheticDive generate(const ScenarioSpec& spec);

/// Distinct pings contributing at least one sample to each depth cell
/// [node - dz/2, node + dz/2), counted separately per cast.
struct CoverageHistogram {
  std::vector<double> z_cells;
  std::vector<int> descent;
  std::vector<int> ascent;
  std::vector<int> total;
};

CoverageHistogram coverage_histogram(const DiveRecord& dive, double dz);

/// Standard normal draws: mt19937_64 (bit-exact by standard) through the
/// inverse-CDF transform, so streams never depend on the C++ runtime's
/// normal_distribution. Exposed for tests that pin noise sequences.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}
  double next();

 private:
  std::mt19937_64 engine_;
};

}  // namespace gliderdec
