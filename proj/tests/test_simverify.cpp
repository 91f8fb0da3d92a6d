#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "priorforge/simverify.hpp"
#include "priorforge/taylor.hpp"

using namespace priorforge;

namespace {

SimGrid small_grid() {
  SimGrid g;
  g.sample_sizes = {30, 60};
  g.n_predictors = {1, 3};
  g.collinearity = {0.0, 0.9};
  g.effects = {{"medium", 0.3}};
  g.replications = 4;
  g.seed = 5;
  return g;
}

}  // namespace

TEST_CASE("default grid enumerates the full cross") {
  const auto cells = enumerate_cells(SimGrid{});
  CHECK(cells.size() == 3u * 3u * 3u * 3u * 3u);
  std::set<std::tuple<int, int, int, double, double>> seen;
  for (const auto& c : cells)
    seen.insert({static_cast<int>(c.family), c.n, c.predictors, c.collinearity, c.effect.coefficient});
  CHECK(seen.size() == cells.size());
}

TEST_CASE("simulated predictors have the requested correlation") {
  SimCell cell{Family::gaussian, 20000, 2, 0.5, {"small", 0.1}};
  std::mt19937_64 rng(1);
  const auto d = simulate_dataset(cell, rng);
  const Vector<double> a = d.X.col(1).array() - d.X.col(1).mean();
  const Vector<double> b = d.X.col(2).array() - d.X.col(2).mean();
  CHECK(a.dot(b) / std::sqrt(a.squaredNorm() * b.squaredNorm()) == doctest::Approx(0.5).epsilon(0.05));
  CHECK(a.squaredNorm() / 20000 == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("roundtrip output does not depend on thread count and is seed-determined") {
  const auto g = small_grid();
  const auto one = format_roundtrip(run_roundtrip(g, 1));
  CHECK(format_roundtrip(run_roundtrip(g, 3)) == one);
  CHECK(format_roundtrip(run_roundtrip(g, 1)) == one);
  auto other = g;
  other.seed = 6;
  CHECK(format_roundtrip(run_roundtrip(other, 1)) != one);
}

TEST_CASE("roundtrip cells pass on a small grid") {
  for (const auto& r : run_roundtrip(small_grid(), 1)) {
    CHECK(r.replications == 4);
    CHECK(r.mean_rel_error < kRoundtripThreshold);
    CHECK(r.pass);
  }
}

TEST_CASE("Monte Carlo sd agrees with quadrature") {
  const auto q = representative_gaussian_profile(3);
  CHECK(q.a == 0.0);
  CHECK(q.b < 0.0);
  for (double s : {0.2, 0.5, 0.8}) {
    const double mc = monte_carlo_sd(q, s, 200000, 3);
    CHECK(mc == doctest::Approx(exact_sd(q, s)).epsilon(0.01));
  }
  // narrow prior: g is nearly linear, so the sd is close to g'(0) sigma
  const double g1 = derivatives_of_g(q, 0.0, 1)[0];
  CHECK(exact_sd(q, 0.05) == doctest::Approx(g1 * 0.05).epsilon(2e-3));
}

TEST_CASE("taylor-sd rows") {
  const auto rows = run_taylor_sd(4, 100000, {0.2, std::sqrt(1.0 / 3.0)});
  REQUIRE(rows.size() == 6);
  for (const auto& r : rows) {
    CHECK(r.checked == (r.order == 5));
    CHECK(r.rho_equiv_sd > 0.0);
    CHECK(r.rho_equiv_sd <= r.sigma_rho + 1e-3);
  }
  // higher orders track the true sd more closely
  CHECK(rows[3].ratio < rows[4].ratio);
  CHECK(rows[4].ratio < rows[5].ratio);
  CHECK(format_taylor_sd(rows) == format_taylor_sd(run_taylor_sd(4, 100000, {0.2, std::sqrt(1.0 / 3.0)})));
}
