#pragma once

#include <vector>

#include "gliderdec/domain.hpp"
#include "gliderdec/statespace.hpp"

namespace gliderdec {

/// Horizontal track sampled on epochs. t strictly increasing, all finite.
struct Trajectory {
  std::vector<double> t;      // s
  std::vector<double> east;   // m
  std::vector<double> north;  // m
};

/// Position by trapezoidal integration of the through-water velocity from
/// the start fix, ignoring currents. Epochs must be strictly increasing and
/// lie inside the measured series' span; throws std::invalid_argument
/// otherwise.
Trajectory dead_reckon(const TtwVelocitySeries& ttw, const GpsFix& start,
                       const std::vector<double>& epochs);

/// Adds the constant drift velocity (gps_end - endpoint) / elapsed so the
/// corrected endpoint hits the fix exactly. Throws std::invalid_argument on
/// a trajectory shorter than two epochs.
Trajectory depth_averaged_correction(const Trajectory& dr, const GpsFix& gps_end);

/// Per-epoch positions held by the joint solution's state variables; no
/// re-integration happens here.
Trajectory adcp_informed_trajectory(const StateSpaceResult& solution);

/// Max Euclidean separation over the union of both epoch sets restricted to
/// the common time span, each trajectory linearly interpolated. Symmetric by
/// construction; throws std::invalid_argument when the spans do not overlap.
double max_horizontal_offset(const Trajectory& a, const Trajectory& b);

/// Horizontal arc length of the trajectory restricted to [t_begin, t_end]
/// (clamped to the sampled span, segment ends interpolated).
double path_length(const Trajectory& tr, double t_begin, double t_end);

}  // namespace gliderdec
