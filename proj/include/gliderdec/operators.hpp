#pragma once

#include <vector>

#include "gliderdec/domain.hpp"

namespace gliderdec {

struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// Triplet-form sparse matrix. Duplicate (row, col) pairs are forbidden;
/// stored values are finite and nonzero. Rows may be empty (masked out).
struct SparseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<Triplet> triplets;

  // Skips exact zeros so the no-zero-entries invariant holds by construction.
  void add(int r, int c, double v);

  std::vector<double> apply(const std::vector<double>& x) const;
  std::vector<double> apply_transpose(const std::vector<double>& y) const;
};

/// Throws std::invalid_argument on out-of-range indices, duplicate entries,
/// or non-finite/zero values.
void validate_sparse(const SparseMatrix& m);

/// Temporal grid: the sorted distinct ping times plus filler nodes in every
/// gap, including from the span edges to the first/last ping. Interior gaps
/// wider than twice the median ping interval are subdivided uniformly with
/// sub-intervals <= the median interval; edge gaps march at exactly that
/// spacing and the final sub-interval is clipped. fallback_spacing is used
/// when fewer than two pings exist to define a median.
std::vector<double> build_time_grid(const std::vector<double>& ping_times,
                                    double t_start, double t_end,
                                    double fallback_spacing = 15.0);

/// Row k selects the grid node equal to sample_times[k] (within 1e-9 s).
/// Errors if a sample time is absent from the grid.
SparseMatrix build_subsample_matrix(const std::vector<double>& t_hat,
                                    const std::vector<double>& sample_times);

/// Two-point linear interpolation rows onto the uniform grid z_hat.
/// A null mask keeps every row; masked-out rows are left all-zero.
/// Errors on sample depths outside [z_hat.front(), z_hat.back()].
SparseMatrix build_linear_interp_matrix(const std::vector<double>& z_hat,
                                        const std::vector<double>& sample_depths,
                                        const std::vector<bool>* mask = nullptr);

/// Trapezoid quadrature weights for a strictly increasing grid:
/// w_1 = (t_2 - t_1)/2, w_m = (t_{m+1} - t_{m-1})/2, w_M = (t_M - t_{M-1})/2.
std::vector<double> trapezoid_weights(const std::vector<double>& t_hat);

/// (n-2) x n matrix with rows (1, -2, 1). Requires n >= 3.
SparseMatrix second_difference(int n);

/// (n-1) x n matrix with rows (1, -1). Requires n >= 2.
SparseMatrix adjacent_difference(int n);

/// Shared discretization for a dive: temporal grid over the GPS span and a
/// uniform vertical grid covering [0, max observed depth + dz].
VelocityGrids build_velocity_grids(const DiveRecord& dive, double dz);

/// Piecewise-linear interpolation with endpoint clamping; xs strictly increasing.
double interp1_clamped(const std::vector<double>& xs,
                       const std::vector<double>& ys, double x);

/// Samples whose linear-interpolation row on the uniform grid z_hat touches
/// each node with weight above 1e-12. A non-null mask selects samples.
std::vector<int> count_node_touches(const std::vector<double>& z_hat,
                                    const std::vector<double>& z,
                                    const std::vector<bool>* mask = nullptr);

}  // namespace gliderdec
