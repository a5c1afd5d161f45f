#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gliderdec/domain.hpp"
#include "gliderdec/sparse_lsq.hpp"

namespace gliderdec {

/// What the temporal curvature penalty acts on: the over-the-ground glider
/// velocity itself, or that velocity minus the measured through-water
/// velocity (so commanded maneuvers are not penalized).
enum class SmoothingTarget { Otg, TtwResidual };

struct InversionConfig {
  double dz = 2.0;          // m, vertical node spacing
  double sigma_adcp = 0.03; // m/s, per relative-velocity sample component
  double sigma_ttw = 0.05;  // m/s
  double sigma_gps = 10.0;  // m, on the dive displacement constraint
  double lambda_g = 1.0;    // temporal curvature penalty multiplier
  double lambda_o = 1.0;    // vertical curvature penalty multiplier

  /// Separate descent/ascent profiles. Unset: enabled for dives over 2 h.
  std::optional<bool> two_profile;

  SmoothingTarget smoothing_target = SmoothingTarget::Otg;

  /// Multiplies the largest data weight to pin the descent and ascent
  /// profiles together at the deepest node.
  double bottom_match_weight = 1e8;
};

struct BlockResidual {
  std::string label;
  std::size_t rows = 0;
  double rms_u = 0.0;  // un-weighted per-row root mean square
  double rms_v = 0.0;
};

struct InversionResult {
  VelocityGrids grids;
  CurrentProfileEstimate profile;
  GliderVelocitySeries glider;
  std::vector<BlockResidual> residuals;
  double condition_estimate = 0.0;
};

/// Assembled weighted system for one dive. The east and north solves share
/// every design matrix; only the right sides differ. Unknown layout: the
/// glider velocity at each temporal node, then one (or, for the two-profile
/// form, two) stacked profiles.
struct InversionSystem {
  VelocityGrids grids;
  bool two_profile = false;
  int n_unknowns = 0;
  std::vector<LsqBlock> blocks_u, blocks_v;
};

/// Builds the full block system without solving it, so alternate solvers can
/// be run against the exact same assembly.
InversionSystem assemble_inversion(const DiveRecord& dive,
                                   const InversionConfig& cfg = {});

/// Single global least-squares fit of the ocean profile and the glider
/// velocity history to the ADCP, displacement, and through-water data, one
/// shared set of design blocks solved per horizontal component.
InversionResult invert_currents(const DiveRecord& dive,
                                const InversionConfig& cfg = {});

}  // namespace gliderdec
