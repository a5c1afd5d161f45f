#include "gliderdec/operators.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace gliderdec {

void SparseMatrix::add(int r, int c, double v) {
  if (v == 0.0) return;
  triplets.push_back({r, c, v});
}

std::vector<double> SparseMatrix::apply(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != cols)
    throw std::invalid_argument("SparseMatrix::apply: size mismatch");
  std::vector<double> y(rows, 0.0);
  for (const auto& t : triplets) y[t.row] += t.value * x[t.col];
  return y;
}

std::vector<double> SparseMatrix::apply_transpose(const std::vector<double>& y) const {
  if (static_cast<int>(y.size()) != rows)
    throw std::invalid_argument("SparseMatrix::apply_transpose: size mismatch");
  std::vector<double> x(cols, 0.0);
  for (const auto& t : triplets) x[t.col] += t.value * y[t.row];
  return x;
}

void validate_sparse(const SparseMatrix& m) {
  std::set<std::pair<int, int>> seen;
  for (const auto& t : m.triplets) {
    if (t.row < 0 || t.row >= m.rows || t.col < 0 || t.col >= m.cols)
      throw std::invalid_argument("sparse matrix: index out of range");
    if (!std::isfinite(t.value) || t.value == 0.0)
      throw std::invalid_argument("sparse matrix: entry not finite and nonzero");
    if (!seen.insert({t.row, t.col}).second)
      throw std::invalid_argument("sparse matrix: duplicate (row, col) entry");
  }
}

namespace {
constexpr double kTimeTol = 1e-9;  // s, matching tolerance for grid lookups
}

std::vector<double> build_time_grid(const std::vector<double>& ping_times,
                                    double t_start, double t_end,
                                    double fallback_spacing) {
  if (ping_times.empty())
    throw std::invalid_argument("build_time_grid: no ping times");
  if (!(t_start < t_end))
    throw std::invalid_argument("build_time_grid: empty span");
  if (!(fallback_spacing > 0.0))
    throw std::invalid_argument("build_time_grid: fallback spacing must be positive");

  std::vector<double> pings(ping_times);
  std::sort(pings.begin(), pings.end());
  pings.erase(std::unique(pings.begin(), pings.end()), pings.end());
  if (pings.front() < t_start - kTimeTol || pings.back() > t_end + kTimeTol)
    throw std::invalid_argument("build_time_grid: ping outside span");

  double spacing = fallback_spacing;
  std::vector<double> diffs;
  for (std::size_t i = 1; i < pings.size(); ++i)
    diffs.push_back(pings[i] - pings[i - 1]);
  if (!diffs.empty()) {
    std::sort(diffs.begin(), diffs.end());
    const std::size_t h = diffs.size() / 2;
    spacing = diffs.size() % 2 ? diffs[h] : 0.5 * (diffs[h - 1] + diffs[h]);
  }

  std::vector<double> grid;
  // Leading edge: march from the span start, clipping against the first ping.
  if (pings.front() - t_start > kTimeTol) {
    for (double t = t_start; t < pings.front() - kTimeTol; t += spacing)
      grid.push_back(t);
  }
  grid.push_back(pings.front());
  // Pings and interior gaps.
  for (std::size_t i = 1; i < pings.size(); ++i) {
    const double gap = pings[i] - pings[i - 1];
    if (gap > 2.0 * spacing) {
      const int nsub = static_cast<int>(std::ceil(gap / spacing - 1e-12));
      const double step = gap / nsub;
      for (int s = 1; s < nsub; ++s) grid.push_back(pings[i - 1] + s * step);
    }
    grid.push_back(pings[i]);
  }
  // Trailing edge: march from the last ping, clipping at the span end.
  if (t_end - pings.back() > kTimeTol) {
    for (double t = pings.back() + spacing; t < t_end - kTimeTol; t += spacing)
      grid.push_back(t);
    grid.push_back(t_end);
  }
  return grid;
}

SparseMatrix build_subsample_matrix(const std::vector<double>& t_hat,
                                    const std::vector<double>& sample_times) {
  SparseMatrix m;
  m.rows = static_cast<int>(sample_times.size());
  m.cols = static_cast<int>(t_hat.size());
  for (std::size_t k = 0; k < sample_times.size(); ++k) {
    const double t = sample_times[k];
    auto it = std::lower_bound(t_hat.begin(), t_hat.end(), t - kTimeTol);
    if (it == t_hat.end() || std::abs(*it - t) > kTimeTol) {
      std::ostringstream msg;
      msg << "build_subsample_matrix: sample time " << t << " not on the grid";
      throw std::invalid_argument(msg.str());
    }
    m.add(static_cast<int>(k), static_cast<int>(it - t_hat.begin()), 1.0);
  }
  return m;
}

SparseMatrix build_linear_interp_matrix(const std::vector<double>& z_hat,
                                        const std::vector<double>& sample_depths,
                                        const std::vector<bool>* mask) {
  if (z_hat.size() < 2)
    throw std::invalid_argument("build_linear_interp_matrix: grid too short");
  if (mask && mask->size() != sample_depths.size())
    throw std::invalid_argument("build_linear_interp_matrix: mask length mismatch");
  const double dz = z_hat[1] - z_hat[0];
  if (!(dz > 0.0))
    throw std::invalid_argument("build_linear_interp_matrix: grid not increasing");
  for (std::size_t l = 2; l < z_hat.size(); ++l)
    if (std::abs((z_hat[l] - z_hat[l - 1]) - dz) > 1e-9 * std::max(1.0, dz))
      throw std::invalid_argument("build_linear_interp_matrix: grid not uniform");

  SparseMatrix m;
  m.rows = static_cast<int>(sample_depths.size());
  m.cols = static_cast<int>(z_hat.size());
  const double z0 = z_hat.front();
  const double zN = z_hat.back();
  for (std::size_t k = 0; k < sample_depths.size(); ++k) {
    if (mask && !(*mask)[k]) continue;
    const double z = sample_depths[k];
    if (!(z >= z0 - 1e-12 * std::max(1.0, std::abs(z0))) || z > zN + 1e-9) {
      std::ostringstream msg;
      msg << "build_linear_interp_matrix: depth " << z << " outside grid";
      throw std::invalid_argument(msg.str());
    }
    int l = static_cast<int>(std::floor((z - z0) / dz));
    l = std::min(std::max(l, 0), m.cols - 2);
    // Weights split so they sum to exactly one.
    const double w_hi = (z - z_hat[l]) / dz;
    const double w_lo = 1.0 - w_hi;
    const int row = static_cast<int>(k);
    if (w_hi < 1e-12) {
      m.add(row, l, 1.0);
    } else if (w_lo < 1e-12) {
      m.add(row, l + 1, 1.0);
    } else {
      m.add(row, l, w_lo);
      m.add(row, l + 1, w_hi);
    }
  }
  return m;
}

std::vector<double> trapezoid_weights(const std::vector<double>& t_hat) {
  const std::size_t n = t_hat.size();
  if (n < 2) throw std::invalid_argument("trapezoid_weights: grid too short");
  for (std::size_t i = 1; i < n; ++i)
    if (!(t_hat[i] > t_hat[i - 1]))
      throw std::invalid_argument("trapezoid_weights: grid not increasing");
  std::vector<double> w(n);
  w.front() = 0.5 * (t_hat[1] - t_hat[0]);
  for (std::size_t m = 1; m + 1 < n; ++m) w[m] = 0.5 * (t_hat[m + 1] - t_hat[m - 1]);
  w.back() = 0.5 * (t_hat[n - 1] - t_hat[n - 2]);
  return w;
}

SparseMatrix second_difference(int n) {
  if (n < 3) throw std::invalid_argument("second_difference: need n >= 3");
  SparseMatrix m;
  m.rows = n - 2;
  m.cols = n;
  for (int r = 0; r < n - 2; ++r) {
    m.add(r, r, 1.0);
    m.add(r, r + 1, -2.0);
    m.add(r, r + 2, 1.0);
  }
  return m;
}

SparseMatrix adjacent_difference(int n) {
  if (n < 2) throw std::invalid_argument("adjacent_difference: need n >= 2");
  SparseMatrix m;
  m.rows = n - 1;
  m.cols = n;
  for (int r = 0; r < n - 1; ++r) {
    m.add(r, r, 1.0);
    m.add(r, r + 1, -1.0);
  }
  return m;
}

VelocityGrids build_velocity_grids(const DiveRecord& dive, double dz) {
  if (!(dz > 0.0)) throw std::invalid_argument("build_velocity_grids: dz must be positive");
  VelocityGrids g;
  g.dz = dz;

  std::vector<double> pings(dive.adcp.t);
  std::sort(pings.begin(), pings.end());
  pings.erase(std::unique(pings.begin(), pings.end()), pings.end());
  double fallback = 15.0;
  if (pings.size() >= 2) fallback = (pings.back() - pings.front()) / (pings.size() - 1);
  g.t_hat = build_time_grid(pings, dive.gps_start.time, dive.gps_end.time, fallback);

  double zmax = 0.0;
  for (double z : dive.adcp.z) zmax = std::max(zmax, z);
  for (double z : dive.depth.z) zmax = std::max(zmax, z);
  const int nodes = static_cast<int>(std::ceil(zmax / dz - 1e-9)) + 2;
  g.z_hat.resize(nodes);
  for (int l = 0; l < nodes; ++l) g.z_hat[l] = l * dz;
  return g;
}

double interp1_clamped(const std::vector<double>& xs,
                       const std::vector<double>& ys, double x) {
  if (xs.size() != ys.size() || xs.size() < 1)
    throw std::invalid_argument("interp1_clamped: malformed series");
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - xs.begin());
  const double f = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
  return ys[i - 1] + f * (ys[i] - ys[i - 1]);
}

std::vector<int> count_node_touches(const std::vector<double>& z_hat,
                                    const std::vector<double>& z,
                                    const std::vector<bool>* mask) {
  if (z_hat.size() < 2)
    throw std::invalid_argument("count_node_touches: grid too small");
  if (mask != nullptr && mask->size() != z.size())
    throw std::invalid_argument("count_node_touches: mask length mismatch");
  const double dz = z_hat[1] - z_hat[0];
  std::vector<int> counts(z_hat.size(), 0);
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (mask != nullptr && !(*mask)[i]) continue;
    const double s = (z[i] - z_hat.front()) / dz;
    int lo = static_cast<int>(std::floor(s));
    lo = std::clamp(lo, 0, static_cast<int>(z_hat.size()) - 2);
    const double w_hi = s - lo;
    if (w_hi < 1.0 - 1e-12) ++counts[static_cast<std::size_t>(lo)];
    if (w_hi > 1e-12) ++counts[static_cast<std::size_t>(lo) + 1];
  }
  return counts;
}

}  // namespace gliderdec
