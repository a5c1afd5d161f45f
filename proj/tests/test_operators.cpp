#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "gliderdec/operators.hpp"

using namespace gliderdec;

namespace {

std::vector<double> dense_row(const SparseMatrix& m, int row) {
  std::vector<double> out(m.cols, 0.0);
  for (const auto& t : m.triplets)
    if (t.row == row) out[t.col] += t.value;
  return out;
}

}  // namespace

TEST_CASE("time grid keeps dense ping runs untouched") {
  auto g = build_time_grid({0, 15, 30, 45}, 0, 45);
  REQUIRE(g.size() == 4);
  CHECK(g == std::vector<double>{0, 15, 30, 45});
}

TEST_CASE("time grid subdivides interior gaps uniformly") {
  // Median ping interval 15; the 60 s gap splits into four equal pieces.
  auto g = build_time_grid({0, 15, 30, 90}, 0, 90);
  std::vector<double> want{0, 15, 30, 45, 60, 75, 90};
  REQUIRE(g.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i)
    CHECK(g[i] == doctest::Approx(want[i]).epsilon(1e-12));
}

TEST_CASE("time grid marches from span edges and clips the last sub-interval") {
  auto g = build_time_grid({100}, 0, 200, 15.0);
  std::vector<double> want{0,  15,  30,  45,  60,  75,  90, 100,
                           115, 130, 145, 160, 175, 190, 200};
  REQUIRE(g.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i)
    CHECK(g[i] == doctest::Approx(want[i]).epsilon(1e-12));
}

TEST_CASE("time grid properties on random ping sets") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> pings;
    double t = 20.0 * u(rng) + 5.0;
    const int n = 3 + static_cast<int>(u(rng) * 40);
    for (int i = 0; i < n; ++i) {
      pings.push_back(t);
      t += 5.0 + 60.0 * u(rng);  // occasional wide gaps
    }
    const double t0 = 0.0, t1 = pings.back() + 30.0 * u(rng) + 1.0;
    auto g = build_time_grid(pings, t0, t1);

    for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
    CHECK(g.front() == doctest::Approx(t0));
    CHECK(g.back() == doctest::Approx(t1));
    for (double p : pings) {
      bool found = false;
      for (double x : g)
        if (std::abs(x - p) < 1e-9) { found = true; break; }
      CHECK(found);
    }
  }
}

TEST_CASE("time grid rejects bad input") {
  CHECK_THROWS_AS(build_time_grid({}, 0, 10), std::invalid_argument);
  CHECK_THROWS_AS(build_time_grid({5}, 10, 0), std::invalid_argument);
  CHECK_THROWS_AS(build_time_grid({50}, 0, 10), std::invalid_argument);
}

TEST_CASE("subsample matrix selects exact grid nodes") {
  std::vector<double> grid{0, 10, 20, 30};
  auto m = build_subsample_matrix(grid, {10, 30, 10});
  REQUIRE(m.rows == 3);
  REQUIRE(m.cols == 4);
  CHECK(dense_row(m, 0) == std::vector<double>{0, 1, 0, 0});
  CHECK(dense_row(m, 1) == std::vector<double>{0, 0, 0, 1});
  CHECK(dense_row(m, 2) == std::vector<double>{0, 1, 0, 0});

  CHECK_THROWS_AS(build_subsample_matrix(grid, {15}), std::invalid_argument);
}

TEST_CASE("subsampling the grid itself is the identity") {
  std::vector<double> grid{0, 3, 7.5, 9, 12};
  auto m = build_subsample_matrix(grid, grid);
  std::vector<double> f{1.0, -2.0, 0.5, 3.25, -7.0};
  auto y = m.apply(f);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(y[i] == f[i]);
}

TEST_CASE("linear interpolation rows") {
  std::vector<double> z{0, 2, 4, 6};

  SUBCASE("midpoint splits evenly") {
    auto m = build_linear_interp_matrix(z, {3.0});
    auto r = dense_row(m, 0);
    CHECK(r[1] == doctest::Approx(0.5));
    CHECK(r[2] == doctest::Approx(0.5));
    CHECK(r[0] == 0.0);
    CHECK(r[3] == 0.0);
  }

  SUBCASE("on-node sample gives a single unit weight") {
    auto m = build_linear_interp_matrix(z, {4.0});
    auto r = dense_row(m, 0);
    CHECK(r[2] == 1.0);
    CHECK(r[1] == 0.0);
    CHECK(r[3] == 0.0);
  }

  SUBCASE("outside the grid errors") {
    CHECK_THROWS_AS(build_linear_interp_matrix(z, {-0.5}), std::invalid_argument);
    CHECK_THROWS_AS(build_linear_interp_matrix(z, {6.5}), std::invalid_argument);
  }

  SUBCASE("masked-out rows stay empty") {
    std::vector<bool> mask{true, false, true};
    auto m = build_linear_interp_matrix(z, {1.0, 3.0, 5.0}, &mask);
    CHECK(dense_row(m, 1) == std::vector<double>{0, 0, 0, 0});
    auto r0 = dense_row(m, 0);
    CHECK(r0[0] + r0[1] == doctest::Approx(1.0));
  }
}

TEST_CASE("interpolation weights form a partition of unity and reproduce linears") {
  std::vector<double> z;
  for (int l = 0; l <= 50; ++l) z.push_back(2.0 * l);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  std::vector<double> depths;
  for (int k = 0; k < 200; ++k) depths.push_back(u(rng));
  auto m = build_linear_interp_matrix(z, depths);

  std::vector<double> ones(z.size(), 1.0);
  auto s = m.apply(ones);
  for (double v : s) CHECK(std::abs(v - 1.0) <= 1e-12);

  std::vector<double> lin(z.size());
  for (std::size_t l = 0; l < z.size(); ++l) lin[l] = 0.75 * z[l] - 4.0;
  auto y = m.apply(lin);
  for (std::size_t k = 0; k < depths.size(); ++k)
    CHECK(std::abs(y[k] - (0.75 * depths[k] - 4.0)) <= 1e-10);
}

TEST_CASE("interpolating at the nodes is the identity") {
  std::vector<double> z{0, 2, 4, 6, 8};
  auto m = build_linear_interp_matrix(z, z);
  std::vector<double> f{3, -1, 2, 0.5, 9};
  auto y = m.apply(f);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(y[i] == f[i]);
}

TEST_CASE("trapezoid weights match the closed form") {
  auto w = trapezoid_weights({0, 1, 3, 6});
  REQUIRE(w.size() == 4);
  CHECK(w[0] == doctest::Approx(0.5));
  CHECK(w[1] == doctest::Approx(1.5));
  CHECK(w[2] == doctest::Approx(2.5));
  CHECK(w[3] == doctest::Approx(1.5));
}

TEST_CASE("trapezoid rule is exact for affine integrands") {
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> u(0.05, 4.0);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> t{0.0};
    for (int i = 0; i < 40; ++i) t.push_back(t.back() + u(rng));
    auto w = trapezoid_weights(t);

    const double a = 2.0 * u(rng) - 4.0, b = u(rng);
    double quad = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) quad += w[i] * (a + b * t[i]);
    const double span = t.back() - t.front();
    const double exact = a * span + 0.5 * b * (t.back() * t.back());
    CHECK(std::abs(quad - exact) <= 1e-12 * std::max(1.0, std::abs(exact)));

    double total = 0.0;
    for (double wi : w) total += wi;
    CHECK(total == doctest::Approx(span).epsilon(1e-13));
  }
}

TEST_CASE("second difference matrix") {
  auto m = second_difference(4);
  REQUIRE(m.rows == 2);
  REQUIRE(m.cols == 4);
  CHECK(dense_row(m, 0) == std::vector<double>{1, -2, 1, 0});
  CHECK(dense_row(m, 1) == std::vector<double>{0, 1, -2, 1});

  auto one_row = second_difference(3);
  CHECK(one_row.rows == 1);

  CHECK_THROWS_AS(second_difference(2), std::invalid_argument);

  // Affine sequences are in the null space.
  const int n = 25;
  auto d2 = second_difference(n);
  std::vector<double> aff(n);
  for (int i = 0; i < n; ++i) aff[i] = -3.0 + 0.7 * i;
  for (double v : d2.apply(aff)) CHECK(std::abs(v) <= 1e-12);
}

TEST_CASE("adjacent difference matrix") {
  auto m = adjacent_difference(3);
  REQUIRE(m.rows == 2);
  REQUIRE(m.cols == 3);
  CHECK(dense_row(m, 0) == std::vector<double>{1, -1, 0});
  CHECK(dense_row(m, 1) == std::vector<double>{0, 1, -1});

  CHECK_THROWS_AS(adjacent_difference(1), std::invalid_argument);

  std::vector<double> c(3, 4.2);
  for (double v : m.apply(c)) CHECK(std::abs(v) <= 1e-12);
}

TEST_CASE("sparse matrix validation rejects duplicates and zeros") {
  SparseMatrix m;
  m.rows = 2;
  m.cols = 2;
  m.add(0, 0, 1.0);
  CHECK_NOTHROW(validate_sparse(m));

  m.triplets.push_back({0, 0, 2.0});
  CHECK_THROWS_AS(validate_sparse(m), std::invalid_argument);

  SparseMatrix z;
  z.rows = 1;
  z.cols = 1;
  z.triplets.push_back({0, 0, 0.0});
  CHECK_THROWS_AS(validate_sparse(z), std::invalid_argument);

  SparseMatrix oob;
  oob.rows = 1;
  oob.cols = 1;
  oob.triplets.push_back({0, 1, 1.0});
  CHECK_THROWS_AS(validate_sparse(oob), std::invalid_argument);

  // add() drops exact zeros silently.
  SparseMatrix d;
  d.rows = 1;
  d.cols = 1;
  d.add(0, 0, 0.0);
  CHECK(d.triplets.empty());
}

TEST_CASE("clamped interpolation") {
  std::vector<double> xs{0, 1, 2};
  std::vector<double> ys{0, 10, 0};
  CHECK(interp1_clamped(xs, ys, -5) == 0.0);
  CHECK(interp1_clamped(xs, ys, 5) == 0.0);
  CHECK(interp1_clamped(xs, ys, 0.25) == doctest::Approx(2.5));
  CHECK(interp1_clamped(xs, ys, 1.5) == doctest::Approx(5.0));
}
