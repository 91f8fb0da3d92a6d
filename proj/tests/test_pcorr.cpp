#include <doctest.h>

#include <cmath>
#include <random>

#include "priorforge/error.hpp"
#include "priorforge/pcorr.hpp"

using namespace priorforge;

namespace {

Matrix<double> design(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  Matrix<double> X(n, 4);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = z(rng);
    X(i, 2) = 0.6 * X(i, 1) + z(rng);
    X(i, 3) = z(rng) - 0.3 * X(i, 2);
  }
  return X;
}

Vector<double> residualize(const Vector<double>& v, const Matrix<double>& Z) {
  return v - Z * (Z.transpose() * Z).ldlt().solve(Z.transpose() * v);
}

Matrix<double> drop_column(const Matrix<double>& X, int j) {
  Matrix<double> r(X.rows(), X.cols() - 1);
  for (int c = 0, k = 0; c < X.cols(); ++c)
    if (c != j) r.col(k++) = X.col(c);
  return r;
}

}  // namespace

TEST_CASE("gaussian generalized partial correlation equals the residual-regression partial correlation") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> z;
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 50 + 10 * rep;
    const Matrix<double> X = design(n, rng);
    Vector<double> y(n);
    for (int i = 0; i < n; ++i) y[i] = 0.3 * X(i, 1) - 0.2 * X(i, 2) + 0.1 * X(i, 3) + z(rng);
    const auto full = fit_glm<double>(Family::gaussian, y, X);
    for (int j = 1; j < 4; ++j) {
      const Matrix<double> rest = drop_column(X, j);
      const Vector<double> ey = residualize(y, rest);
      const Vector<double> ex = residualize(X.col(j), rest);
      const double classical = ey.dot(ex) / std::sqrt(ey.squaredNorm() * ex.squaredNorm());
      const auto prof = profile_coefficient<double>(Family::gaussian, y, X, j, full);
      CHECK(prof.rho == doctest::Approx(classical).epsilon(1e-9));
    }
  }
}

TEST_CASE("fit_quartic recovers an exact quartic") {
  const double a = -0.7, b = -12.0, bh = 0.8, lmax = -40.0;
  const auto pts = profile_points(bh, 0.1);
  std::array<double, 4> ll{};
  for (int i = 0; i < 4; ++i) {
    const double t = pts[i] - bh;
    ll[i] = lmax + a * t * t * t * t + b * t * t;
  }
  const auto q = fit_quartic(pts, ll, bh, lmax, 100);
  CHECK(q.a == doctest::Approx(a).epsilon(1e-10));
  CHECK(q.b == doctest::Approx(b).epsilon(1e-12));
  CHECK(q.fit_residual < 1e-12);
  CHECK(loglambda_from_quartic(q) == doctest::Approx(-a * std::pow(bh, 4) - b * bh * bh));
}

TEST_CASE("profile points") {
  const auto p = profile_points(2.0, 0.5);
  CHECK(p == std::array<double, 4>{0.0, 0.5, 1.0, 1.5});
  const auto d = profile_points(1e-12, 0.5);
  CHECK(d == std::array<double, 4>{1e-12 - 1.0, 1e-12 - 0.5, 1e-12 + 0.5, 1e-12 + 1.0});
}

TEST_CASE("beta_from_rho inverts the quartic relation") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const Eigen::Index n = 20 + static_cast<Eigen::Index>(u(rng) * 400);
    const double b = -std::exp(-3.0 + 8.0 * u(rng));
    const double a = (u(rng) - 0.5) * 2.0 * b * b / 10.0;
    const double bh = (u(rng) - 0.5) * 4.0 * std::sqrt(-b / std::max(std::abs(a), 1e-3 * b * b)) / 3.0;
    QuarticProfile<double> q;
    try {
      q = make_quartic_profile(a, b, bh, -10.0, n);
    } catch (const QuarticError&) {
      continue;
    }
    const double ll = loglambda_from_quartic(q);
    if (!(ll > 0.0) || (a > 0 && 2 * a * bh * bh > -b)) continue;  // keep bh on the concave branch
    const double rho = generalized_partial_corr(ll, n, bh > 0 ? 1 : -1);
    if (!(std::abs(rho) < 1.0) || std::abs(rho) < 1e-6) continue;
    CHECK(beta_from_rho(rho, q) == doctest::Approx(bh).epsilon(1e-9));
  }
}

TEST_CASE("beta_from_rho is odd, monotone and bounded by rho_max") {
  const auto q = make_quartic_profile(0.4, -10.0, 1.0, 0.0, Eigen::Index{50});
  const double rmax = max_abs_rho(q);
  CHECK(rmax == doctest::Approx(std::sqrt(1.0 - std::exp(-100.0 / (2 * 0.4 * 50)))));
  double prev = 0.0;
  for (int i = 1; i < 100; ++i) {
    const double r = rmax * i / 100.0;
    const double v = beta_from_rho(r, q);
    CHECK(v > prev);
    CHECK(beta_from_rho(-r, q) == -v);
    prev = v;
  }
  CHECK_THROWS_AS(beta_from_rho(std::min(0.999999, rmax * 1.01), q), DomainError);
  CHECK_THROWS_AS(beta_from_rho(1.0, q), DomainError);
  CHECK(beta_from_rho(0.0, q) == 0.0);

  const auto neg = make_quartic_profile(-0.4, -10.0, 1.0, 0.0, Eigen::Index{50});
  CHECK(max_abs_rho(neg) == 1.0);
  CHECK(std::isfinite(beta_from_rho(0.999999, neg)));
}

TEST_CASE("quadratic limit is continuous in a") {
  const auto q0 = make_quartic_profile(0.0, -8.0, 1.0, 0.0, Eigen::Index{40});
  const auto q1 = make_quartic_profile(1e-9, -8.0, 1.0, 0.0, Eigen::Index{40});
  for (double r : {0.05, 0.3, 0.6})
    CHECK(beta_from_rho(r, q1) == doctest::Approx(beta_from_rho(r, q0)).epsilon(1e-8));
  CHECK(beta_from_rho(0.3, q0) == doctest::Approx(std::sqrt(40 * std::log1p(-0.09) / -16.0)).epsilon(1e-14));
}

TEST_CASE("rescaling a predictor rescales the profile and leaves rho unchanged") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z;
  const int n = 150;
  const Matrix<double> X = design(n, rng);
  for (Family f : {Family::gaussian, Family::binomial, Family::poisson}) {
    Vector<double> y(n);
    for (int i = 0; i < n; ++i) {
      const double eta = 0.3 * X(i, 1) - 0.2 * X(i, 2);
      y[i] = f == Family::gaussian   ? eta + z(rng)
             : f == Family::binomial ? double(std::bernoulli_distribution(1 / (1 + std::exp(-eta)))(rng))
                                     : double(std::poisson_distribution<int>(std::exp(eta))(rng));
    }
    Matrix<double> Xs = X;
    const double c = 7.5;
    Xs.col(2) *= c;
    const auto p1 = profile_coefficient<double>(f, y, X, 2, fit_glm<double>(f, y, X));
    const auto p2 = profile_coefficient<double>(f, y, Xs, 2, fit_glm<double>(f, y, Xs));
    CHECK(p2.rho == doctest::Approx(p1.rho).epsilon(1e-7));
    CHECK(p2.quartic.beta_hat * c == doctest::Approx(p1.quartic.beta_hat).epsilon(1e-7));
    CHECK(p2.quartic.b == doctest::Approx(p1.quartic.b * c * c).epsilon(1e-6));
    CHECK(p2.quartic.a == doctest::Approx(p1.quartic.a * c * c * c * c).epsilon(1e-4));
  }
}

TEST_CASE("generalized_partial_corr edge cases") {
  CHECK(generalized_partial_corr(0.0, 10, 1) == 0.0);
  CHECK(generalized_partial_corr(-5e-9, 10, 1) == 0.0);
  CHECK_THROWS_AS(generalized_partial_corr(-1e-3, 10, 1), DomainError);
  CHECK(generalized_partial_corr(2.0, 10, -1) == doctest::Approx(-std::sqrt(1 - std::exp(-0.4))));
  CHECK_THROWS_AS(make_quartic_profile(0.0, 1.0, 0.0, 0.0, Eigen::Index{10}), QuarticError);
}

TEST_CASE("classical slope sd") {
  CHECK(classical_slope_sd(0.5, 0.2, 0.3, 4.0, 9.0) == doctest::Approx(0.5 * std::sqrt(0.7 * 9 / (0.8 * 4))));
  CHECK_THROWS_AS(classical_slope_sd(0.5, 1.0, 0.3, 4.0, 9.0), DomainError);
}
