#include "gliderdec/sparse_lsq.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>

namespace gliderdec {

namespace {

void validate_problem(const std::vector<LsqBlock>& blocks, int n_unknowns) {
  if (n_unknowns < 1)
    throw std::invalid_argument("lsq: n_unknowns must be positive");
  if (blocks.empty())
    throw std::invalid_argument("lsq: no blocks");
  long total_rows = 0;
  for (const auto& b : blocks) {
    if (b.matrix.cols != n_unknowns)
      throw std::invalid_argument("lsq: block column count != n_unknowns");
    if (static_cast<int>(b.rhs.size()) != b.matrix.rows)
      throw std::invalid_argument("lsq: rhs length != block rows");
    if (!(b.weight > 0.0) || !std::isfinite(b.weight))
      throw std::invalid_argument("lsq: block weight must be positive and finite");
    for (double v : b.rhs)
      if (!std::isfinite(v))
        throw std::invalid_argument("lsq: non-finite rhs entry");
    validate_sparse(b.matrix);
    total_rows += b.matrix.rows;
  }
  if (total_rows < 1)
    throw std::invalid_argument("lsq: zero total rows");
}

std::vector<double> block_residual_norms(const std::vector<LsqBlock>& blocks,
                                         const std::vector<double>& x) {
  std::vector<double> norms;
  norms.reserve(blocks.size());
  for (const auto& b : blocks) {
    auto r = b.matrix.apply(x);
    double s = 0.0;
    for (int i = 0; i < b.matrix.rows; ++i) {
      const double d = r[i] - b.rhs[i];
      s += d * d;
    }
    norms.push_back(std::sqrt(s));
  }
  return norms;
}

using SpMat = Eigen::SparseMatrix<double>;

SpMat to_eigen(const SparseMatrix& m) {
  std::vector<Eigen::Triplet<double>> ts;
  ts.reserve(m.triplets.size());
  for (const auto& t : m.triplets) ts.emplace_back(t.row, t.col, t.value);
  SpMat e(m.rows, m.cols);
  e.setFromTriplets(ts.begin(), ts.end());
  return e;
}

// Deterministic unit start vector for the power iterations.
Eigen::VectorXd power_start(int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = 1.0 + static_cast<double>(i % 7) / 7.0;
  v.normalize();
  return v;
}

double estimate_lambda_max(const SpMat& normal) {
  Eigen::VectorXd v = power_start(static_cast<int>(normal.rows()));
  double lambda = 0.0;
  for (int it = 0; it < 20; ++it) {
    Eigen::VectorXd w = normal * v;
    lambda = w.norm();
    if (lambda == 0.0 || !std::isfinite(lambda)) return lambda;
    v = w / lambda;
  }
  return lambda;
}

template <typename SolveFn>
double estimate_lambda_min(const SolveFn& apply_inverse, int n) {
  Eigen::VectorXd v = power_start(n);
  double mu = 0.0;  // dominant eigenvalue of the inverse
  for (int it = 0; it < 20; ++it) {
    Eigen::VectorXd w = apply_inverse(v);
    mu = w.norm();
    if (mu == 0.0 || !std::isfinite(mu)) return 0.0;
    v = w / mu;
  }
  return mu > 0.0 ? 1.0 / mu : 0.0;
}

// CGLS on the sqrt(weight)-scaled stacked system, warm-started from x.
// Returns true when the normal-equation residual fell below tol relative
// to its starting magnitude at x = 0.
bool cgls(const std::vector<SpMat>& mats, const std::vector<LsqBlock>& blocks,
          Eigen::VectorXd& x, double tol, int max_iter) {
  const int n = static_cast<int>(x.size());
  std::vector<Eigen::VectorXd> rhs(blocks.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const double sw = std::sqrt(blocks[b].weight);
    rhs[b] = sw * Eigen::Map<const Eigen::VectorXd>(blocks[b].rhs.data(),
                                                    blocks[b].rhs.size());
  }
  auto apply = [&](const Eigen::VectorXd& v, std::vector<Eigen::VectorXd>& out) {
    for (std::size_t b = 0; b < blocks.size(); ++b)
      out[b] = std::sqrt(blocks[b].weight) * (mats[b] * v);
  };
  auto apply_t = [&](const std::vector<Eigen::VectorXd>& ys) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    for (std::size_t b = 0; b < blocks.size(); ++b)
      out += std::sqrt(blocks[b].weight) * (mats[b].transpose() * ys[b]);
    return out;
  };

  const Eigen::VectorXd atb = apply_t(rhs);
  const double target = tol * atb.norm();

  std::vector<Eigen::VectorXd> r(blocks.size()), q(blocks.size());
  apply(x, r);
  for (std::size_t b = 0; b < blocks.size(); ++b) r[b] = rhs[b] - r[b];
  Eigen::VectorXd s = apply_t(r);
  if (s.norm() <= target) return true;
  Eigen::VectorXd p = s;
  double gamma = s.squaredNorm();
  for (int it = 0; it < max_iter; ++it) {
    apply(p, q);
    double qq = 0.0;
    for (const auto& qb : q) qq += qb.squaredNorm();
    if (qq == 0.0 || !std::isfinite(qq)) return s.norm() <= target;
    const double alpha = gamma / qq;
    x += alpha * p;
    for (std::size_t b = 0; b < blocks.size(); ++b) r[b] -= alpha * q[b];
    s = apply_t(r);
    const double gamma_new = s.squaredNorm();
    if (!std::isfinite(gamma_new)) return false;
    if (std::sqrt(gamma_new) <= target) return true;
    p = s + (gamma_new / gamma) * p;
    gamma = gamma_new;
  }
  return s.norm() <= target;
}

}  // namespace

LsqSolution solve(const std::vector<LsqBlock>& blocks, int n_unknowns) {
  validate_problem(blocks, n_unknowns);
  const int n = n_unknowns;

  std::vector<SpMat> mats;
  mats.reserve(blocks.size());
  for (const auto& b : blocks) mats.push_back(to_eigen(b.matrix));

  SpMat normal(n, n);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const SpMat at = mats[b].transpose();
    normal += blocks[b].weight * SpMat(at * mats[b]);
    g += blocks[b].weight *
         (at * Eigen::Map<const Eigen::VectorXd>(blocks[b].rhs.data(),
                                                 blocks[b].rhs.size()));
  }
  normal.makeCompressed();

  double normal_inf = 0.0;
  {
    Eigen::VectorXd rowsum = Eigen::VectorXd::Zero(n);
    for (int k = 0; k < normal.outerSize(); ++k)
      for (SpMat::InnerIterator it(normal, k); it; ++it)
        rowsum[it.row()] += std::abs(it.value());
    normal_inf = rowsum.maxCoeff();
  }

  // Diagonal equilibration before factoring: the unknowns can mix scales
  // (positions in metres against rates in m/s), and the symmetric scaling
  // keeps the factorization accurate across that spread.
  Eigen::VectorXd dinv(n);
  for (int i = 0; i < n; ++i) dinv[i] = 1.0;
  for (int k = 0; k < normal.outerSize(); ++k)
    for (SpMat::InnerIterator it(normal, k); it; ++it)
      if (it.row() == it.col() && it.value() > 0.0)
        dinv[it.row()] = 1.0 / std::sqrt(it.value());
  SpMat scaled = normal;
  for (int k = 0; k < scaled.outerSize(); ++k)
    for (SpMat::InnerIterator it(scaled, k); it; ++it)
      it.valueRef() *= dinv[it.row()] * dinv[it.col()];

  Eigen::SimplicialLDLT<SpMat> ldlt;
  ldlt.compute(scaled);
  const bool factored = ldlt.info() == Eigen::Success;

  // Applies the factored, rescaled inverse: an approximate solve with the
  // original normal matrix.
  auto apply_inverse = [&](const Eigen::VectorXd& r) -> Eigen::VectorXd {
    return dinv.asDiagonal() *
           Eigen::VectorXd(ldlt.solve(dinv.asDiagonal() * r));
  };

  double cond = std::numeric_limits<double>::infinity();
  const double lmax = estimate_lambda_max(normal);
  if (factored) {
    const double lmin = estimate_lambda_min(apply_inverse, n);
    cond = (lmin > 0.0 && std::isfinite(lmin))
               ? lmax / lmin
               : std::numeric_limits<double>::infinity();
  }

  // Gradient of the weighted objective at x, accumulated block by block as
  // w Mᵀ(Mx − rhs) in extended precision. Forming the small per-block
  // residual first, and carrying it in long double, keeps the rounding floor
  // of the gradient well below what the squared conditioning of the normal
  // matrix would otherwise allow refinement to resolve.
  auto gradient = [&](const Eigen::VectorXd& x) {
    std::vector<long double> grad(n, 0.0L);
    std::vector<long double> res;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const LsqBlock& blk = blocks[b];
      res.assign(blk.rhs.size(), 0.0L);
      for (std::size_t i = 0; i < blk.rhs.size(); ++i)
        res[i] = -static_cast<long double>(blk.rhs[i]);
      for (const Triplet& t : blk.matrix.triplets)
        res[t.row] += static_cast<long double>(t.value) * x[t.col];
      const long double w = blk.weight;
      for (const Triplet& t : blk.matrix.triplets)
        grad[t.col] += w * static_cast<long double>(t.value) * res[t.row];
    }
    Eigen::VectorXd out(n);
    for (int i = 0; i < n; ++i) out[i] = static_cast<double>(grad[i]);
    return out;
  };

  auto grad_ok = [&](const Eigen::VectorXd& x, double rel) {
    const Eigen::VectorXd grad = gradient(x);
    const double scale =
        normal_inf * x.cwiseAbs().maxCoeff() + g.cwiseAbs().maxCoeff();
    return grad.allFinite() &&
           grad.cwiseAbs().maxCoeff() <= rel * std::max(scale, 1e-300);
  };

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  bool solved = false;
  if (factored) {
    x = apply_inverse(g);
    if (x.allFinite()) {
      // Iterative refinement, kept going until the gradient stops shrinking.
      // Ill-conditioned systems contract slowly, so a fixed two or three
      // passes can leave orders of magnitude on the table.
      Eigen::VectorXd grad = gradient(x);
      double best = grad.allFinite()
                        ? grad.cwiseAbs().maxCoeff()
                        : std::numeric_limits<double>::infinity();
      for (int refine = 0; refine < 40 && std::isfinite(best); ++refine) {
        Eigen::VectorXd dx = apply_inverse(-grad);
        if (!dx.allFinite()) break;
        const Eigen::VectorXd x_new = x + dx;
        const Eigen::VectorXd grad_new = gradient(x_new);
        if (!grad_new.allFinite()) break;
        const double mag = grad_new.cwiseAbs().maxCoeff();
        if (mag >= best) break;
        x = x_new;
        grad = grad_new;
        best = mag;
      }
      solved = grad_ok(x, 1e-9);
    } else {
      x.setZero();
    }
  }

  if (!solved) {
    const bool converged = cgls(mats, blocks, x, 1e-10, 10 * n);
    if ((!converged && !grad_ok(x, 1e-6)) || !x.allFinite())
      throw SolverError("lsq solve: singular or numerically unsolvable system",
                        cond);
  }

  LsqSolution sol;
  sol.x.assign(x.data(), x.data() + n);
  sol.residual_norms = block_residual_norms(blocks, sol.x);
  sol.normal_matrix_condition_estimate = cond;
  return sol;
}

// ---------------------------------------------------------------------------
// Dense oracle: independent of the sparse route and of Eigen. Column-pivoted
// Householder QR on column-major storage.
// ---------------------------------------------------------------------------

LsqSolution dense_oracle_solve(const std::vector<LsqBlock>& blocks, int n_unknowns) {
  validate_problem(blocks, n_unknowns);
  if (n_unknowns > 2000)
    throw std::invalid_argument("dense_oracle_solve: n_unknowns exceeds the 2000 guard");
  const int n = n_unknowns;
  long total = 0;
  for (const auto& b : blocks) total += b.matrix.rows;
  const int m = static_cast<int>(total);
  if (m < n)
    throw SolverError("dense_oracle_solve: fewer rows than unknowns (rank deficient)");

  std::vector<double> A(static_cast<std::size_t>(m) * n, 0.0);  // column-major
  std::vector<double> rhs(m, 0.0);
  int row0 = 0;
  for (const auto& b : blocks) {
    const double sw = std::sqrt(b.weight);
    for (const auto& t : b.matrix.triplets)
      A[static_cast<std::size_t>(t.col) * m + (row0 + t.row)] = sw * t.value;
    for (int i = 0; i < b.matrix.rows; ++i) rhs[row0 + i] = sw * b.rhs[i];
    row0 += b.matrix.rows;
  }

  std::vector<int> perm(n);
  for (int j = 0; j < n; ++j) perm[j] = j;
  std::vector<double> colnorm2(n, 0.0);
  for (int j = 0; j < n; ++j) {
    const double* col = &A[static_cast<std::size_t>(j) * m];
    for (int i = 0; i < m; ++i) colnorm2[j] += col[i] * col[i];
  }

  const double eps = std::numeric_limits<double>::epsilon();
  double r00 = 0.0;
  int rank = 0;
  for (int k = 0; k < n; ++k) {
    // Pivot: remaining column with the largest updated norm.
    int piv = k;
    for (int j = k + 1; j < n; ++j)
      if (colnorm2[j] > colnorm2[piv]) piv = j;
    if (piv != k) {
      for (int i = 0; i < m; ++i)
        std::swap(A[static_cast<std::size_t>(piv) * m + i],
                  A[static_cast<std::size_t>(k) * m + i]);
      std::swap(colnorm2[piv], colnorm2[k]);
      std::swap(perm[piv], perm[k]);
    }

    double* ck = &A[static_cast<std::size_t>(k) * m];
    double sigma = 0.0;
    for (int i = k; i < m; ++i) sigma += ck[i] * ck[i];
    const double norm = std::sqrt(sigma);
    if (k == 0) r00 = norm;
    if (!(norm > std::max(m, n) * eps * std::max(r00, 1e-300))) break;
    rank = k + 1;

    // Householder vector v with v[k] adjusted to avoid cancellation.
    const double alpha = ck[k] >= 0.0 ? -norm : norm;
    const double vk = ck[k] - alpha;
    std::vector<double> v(m - k);
    v[0] = vk;
    for (int i = k + 1; i < m; ++i) v[i - k] = ck[i];
    const double vtv = vk * vk + (sigma - ck[k] * ck[k]);
    ck[k] = alpha;
    for (int i = k + 1; i < m; ++i) ck[i] = 0.0;

    if (vtv > 0.0) {
      for (int j = k + 1; j < n; ++j) {
        double* cj = &A[static_cast<std::size_t>(j) * m];
        double dot = 0.0;
        for (int i = k; i < m; ++i) dot += v[i - k] * cj[i];
        const double f = 2.0 * dot / vtv;
        for (int i = k; i < m; ++i) cj[i] -= f * v[i - k];
      }
      double dot = 0.0;
      for (int i = k; i < m; ++i) dot += v[i - k] * rhs[i];
      const double f = 2.0 * dot / vtv;
      for (int i = k; i < m; ++i) rhs[i] -= f * v[i - k];
    }
    for (int j = k + 1; j < n; ++j) {
      const double akj = A[static_cast<std::size_t>(j) * m + k];
      colnorm2[j] = std::max(colnorm2[j] - akj * akj, 0.0);
    }
  }

  if (rank < n)
    throw SolverError("dense_oracle_solve: rank-deficient system",
                      rank > 0 ? std::abs(r00 / A[static_cast<std::size_t>(rank - 1) * m +
                                                  (rank - 1)])
                               : std::numeric_limits<double>::infinity());

  // Back substitution on the upper-triangular factor.
  std::vector<double> y(n, 0.0);
  for (int i = n - 1; i >= 0; --i) {
    double s = rhs[i];
    for (int j = i + 1; j < n; ++j)
      s -= A[static_cast<std::size_t>(j) * m + i] * y[j];
    y[i] = s / A[static_cast<std::size_t>(i) * m + i];
  }
  std::vector<double> x(n, 0.0);
  for (int j = 0; j < n; ++j) x[perm[j]] = y[j];

  LsqSolution sol;
  sol.x = std::move(x);
  sol.residual_norms = block_residual_norms(blocks, sol.x);
  const double rnn = std::abs(A[static_cast<std::size_t>(n - 1) * m + (n - 1)]);
  const double ratio = rnn > 0.0 ? r00 / rnn : std::numeric_limits<double>::infinity();
  sol.normal_matrix_condition_estimate = ratio * ratio;  // R diagonal ratio, squared
  return sol;
}

}  // namespace gliderdec
