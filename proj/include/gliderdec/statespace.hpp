#pragma once

#include <string>
#include <vector>

#include "gliderdec/domain.hpp"
#include "gliderdec/inversion.hpp"
#include "gliderdec/sparse_lsq.hpp"

namespace gliderdec {

/// Joint trajectory-and-profile estimator. One epoch per temporal grid node
/// carries [east, north, east-rate, north-rate]; a white-acceleration process
/// links epochs, whitened by the per-interval Cholesky factor of the process
/// covariance. The ocean profile enters the same linear system, so currents,
/// velocities, and positions are fitted in a single pass.
struct StateSpaceConfig {
  double dz = 2.0;            // m, vertical node spacing
  double sigma_accel = 1e-3;  // m/s^2, white acceleration density
  double sigma_pos_gps = 5.0; // m, surfacing fixes
  double sigma_x0_pos = 5.0;  // m, first-epoch position prior
  double sigma_x0_vel = 0.5;   // m/s, first-epoch rate prior about the closure-corrected seed

  double eta1 = 1.0 / (0.03 * 0.03);  // relative-velocity row weight
  double eta2 = 400.0;                // through-water compare row weight
  double eta3 = 100.0;                // profile adjacent-difference weight
};

struct TrajectoryEstimate {
  std::vector<double> t;
  std::vector<double> east, north;  // m, local tangent frame
  std::vector<double> u_g, v_g;     // m/s, over-the-ground rates
};

struct StateSpaceResult {
  VelocityGrids grids;
  TrajectoryEstimate trajectory;
  CurrentProfileEstimate profile;
  std::vector<BlockResidual> residuals;
  double condition_estimate = 0.0;
};

/// Assembled joint system. Unknown layout: four state entries per temporal
/// node [east, north, east-rate, north-rate], then the east profile nodes,
/// then the north profile nodes.
struct JointSystem {
  VelocityGrids grids;
  int n_unknowns = 0;
  std::vector<LsqBlock> blocks;
};

/// Builds the full block system without solving it, so alternate solvers can
/// be run against the exact same assembly.
JointSystem assemble_joint(const DiveRecord& dive,
                           const StateSpaceConfig& cfg = {});

StateSpaceResult estimate_joint(const DiveRecord& dive,
                                const StateSpaceConfig& cfg = {});

}  // namespace gliderdec
