#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "gliderdec/operators.hpp"

namespace gliderdec {

/// One row block of a stacked weighted least-squares problem. The weight is
/// the multiplier lambda_b on ||A_b x - d_b||^2, applied internally as a
/// sqrt(lambda_b) row scaling.
struct LsqBlock {
  SparseMatrix matrix;
  std::vector<double> rhs;
  double weight = 1.0;
  std::string label;
};

struct LsqSolution {
  std::vector<double> x;
  std::vector<double> residual_norms;  // per block, un-weighted ||A_b x - d_b||
  double normal_matrix_condition_estimate = 0.0;
};

struct SolverError : std::runtime_error {
  explicit SolverError(const std::string& what, double cond = 0.0)
      : std::runtime_error(what), condition_estimate(cond) {}
  double condition_estimate;
};

/// Sparse route: normal equations factored by a sparse Cholesky, with a CGLS
/// fallback (relative tolerance 1e-10, at most 10 * n_unknowns iterations)
/// when the factorization fails or returns non-finite values. A singular but
/// consistent system yields the CGLS minimizer; throws SolverError with the
/// estimated condition number when optimality is unreachable.
LsqSolution solve(const std::vector<LsqBlock>& blocks, int n_unknowns);

/// Dense oracle: materializes the sqrt(weight)-scaled stacked matrix and
/// solves by a rank-revealing column-pivoted Householder QR. Guarded to
/// n_unknowns <= 2000; errors outright on rank deficiency. Shares no solver
/// code with solve().
LsqSolution dense_oracle_solve(const std::vector<LsqBlock>& blocks, int n_unknowns);

}  // namespace gliderdec
