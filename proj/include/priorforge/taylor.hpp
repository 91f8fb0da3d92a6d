#ifndef PRIORFORGE_TAYLOR_HPP
#define PRIORFORGE_TAYLOR_HPP

// Variance of beta_from_rho(rho) when rho follows a symmetric Beta(p, p)
// distribution rescaled to (-1, 1), via a k-th order Taylor expansion:
//
//   var ~ sum_{i,j=1..k} g^(i) g^(j) / (i! j!) (mu_{i+j} - mu_i mu_j)
//
// with mu_m the central moments of the scaled Beta. Derivatives are
// evaluated slightly off zero (eval_point) and propagated with Taylor-mode
// arithmetic.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "priorforge/error.hpp"
#include "priorforge/glm.hpp"
#include "priorforge/jet.hpp"
#include "priorforge/pcorr.hpp"

namespace priorforge {

enum class ScaleLabel { narrow, medium, wide, superwide };

inline std::optional<ScaleLabel> parse_scale_label(std::string_view s) {
  if (s == "narrow") return ScaleLabel::narrow;
  if (s == "medium") return ScaleLabel::medium;
  if (s == "wide") return ScaleLabel::wide;
  if (s == "superwide") return ScaleLabel::superwide;
  return std::nullopt;
}

inline std::string_view scale_label_name(ScaleLabel l) {
  switch (l) {
    case ScaleLabel::narrow: return "narrow";
    case ScaleLabel::medium: return "medium";
    case ScaleLabel::wide: return "wide";
    case ScaleLabel::superwide: return "superwide";
  }
  return "wide";
}

inline double scale_label_sigma(ScaleLabel l) {
  switch (l) {
    case ScaleLabel::narrow: return 0.2;
    case ScaleLabel::medium: return 0.4;
    case ScaleLabel::wide: return std::sqrt(1.0 / 3.0);
    case ScaleLabel::superwide: return 0.8;
  }
  return std::sqrt(1.0 / 3.0);
}

/// Prior sd of the partial correlation together with the symmetric scaled
/// Beta shape that has exactly that sd.
struct RhoScale {
  double sigma_rho = std::sqrt(1.0 / 3.0);
  double shape_p = 1.0;
  std::optional<ScaleLabel> label = ScaleLabel::wide;

  static RhoScale from_sigma(double sigma) {
    if (!(sigma > 0.0 && sigma < 1.0))
      throw DomainError("sigma_rho must lie in (0, 1), got " + std::to_string(sigma));
    RhoScale s;
    s.sigma_rho = sigma;
    s.shape_p = (1.0 / (sigma * sigma) - 1.0) / 2.0;
    s.label.reset();
    return s;
  }
  static RhoScale from_label(ScaleLabel l) {
    RhoScale s = from_sigma(scale_label_sigma(l));
    s.label = l;
    return s;
  }
  static RhoScale wide() { return from_label(ScaleLabel::wide); }
};

struct TaylorConfig {
  int order = 5;
  double eval_point = 0.001;

  void validate() const {
    if (order != 1 && order != 3 && order != 5)
      throw DomainError("taylor order must be 1, 3 or 5, got " + std::to_string(order));
    if (!(eval_point > 0.0 && eval_point < 0.01))
      throw DomainError("taylor eval_point must lie in (0, 0.01)");
  }
};

/// Fifth order for gaussian responses, first order otherwise.
inline TaylorConfig default_taylor_config(Family family) {
  TaylorConfig c;
  c.order = family == Family::gaussian ? 5 : 1;
  return c;
}

/// m-th central moment of Beta(p, q) rescaled to (-1, 1):
///   2F1(p, -m; p+q; (p+q)/p) (-2p/(p+q))^m,
/// where the hypergeometric series terminates after m+1 terms.
template <typename Scalar>
Scalar beta_central_moment(Scalar p, Scalar q, int m) {
  if (!(p > Scalar(0)) || !(q > Scalar(0))) throw DomainError("beta_central_moment: shapes must be positive");
  if (m < 0) throw DomainError("beta_central_moment: order must be nonnegative");
  if (m == 0) return Scalar(1);
  if (p == q && m % 2 == 1) return Scalar(0);
  const Scalar z = (p + q) / p;
  Scalar term(1);
  Scalar sum(1);
  for (int i = 0; i < m; ++i) {
    // ratio of consecutive terms of (p)_i (-m)_i / ((p+q)_i i!) z^i
    term *= (p + Scalar(i)) * Scalar(i - m) / ((p + q + Scalar(i)) * Scalar(i + 1)) * z;
    sum += term;
  }
  Scalar scale(1);
  const Scalar base = Scalar(-2) * p / (p + q);
  for (int i = 0; i < m; ++i) scale *= base;
  return sum * scale;
}

/// mu_0..mu_max_order of the symmetric scaled Beta(p, p).
template <typename Scalar>
std::vector<Scalar> central_moments(Scalar p, int max_order) {
  std::vector<Scalar> mu(static_cast<std::size_t>(max_order) + 1);
  for (int m = 0; m <= max_order; ++m) mu[m] = beta_central_moment<Scalar>(p, p, m);
  return mu;
}

namespace detail {

// Taylor coefficients of phi(u) = -log(1-u)/u = sum_k u^k / (k+1) around u0,
// phi^(m)(u0)/m! = sum_{k>=m} C(k, m) u0^(k-m) / (k+1). Valid for 0 <= u0 < 1;
// used for small u0 where the closed form would cancel.
template <typename Scalar, std::size_t N>
std::array<Scalar, N> log_ratio_series(Scalar u0) {
  using std::abs;
  std::array<Scalar, N> out{};
  for (std::size_t m = 0; m < N; ++m) {
    Scalar binom(1);  // C(k, m) for k = m
    Scalar power(1);  // u0^(k-m)
    Scalar sum(0);
    for (std::size_t k = m; k < m + 2000; ++k) {
      const Scalar term = binom * power / Scalar(k + 1);
      sum += term;
      if (k > m + 4 && abs(term) <= std::numeric_limits<Scalar>::epsilon() * Scalar(1e-3) * abs(sum)) break;
      binom = binom * Scalar(k + 1) / Scalar(k + 1 - m);
      power *= u0;
    }
    out[m] = sum;
  }
  return out;
}

// -log(1-u)/u as a jet in the expansion variable.
template <typename Scalar, std::size_t N>
Jet<Scalar, N> log_ratio(const Jet<Scalar, N>& u) {
  if (u.value() < Scalar(0.5)) return compose(log_ratio_series<Scalar, N>(u.value()), u);
  return -log(Scalar(1) - u) / u;
}

}  // namespace detail

/// beta_from_rho around rho0 as a jet. Uses g(rho) = rho sqrt(F(rho^2)) with
///   F = n phi(rho^2) / (sqrt(b^2 - 2 a n rho^2 phi(rho^2)) - b),
/// phi(u) = -log(1-u)/u, which is analytic through rho = 0.
template <typename Scalar, std::size_t N>
Jet<Scalar, N> beta_from_rho_jet(const QuarticProfile<Scalar>& q, Scalar rho0) {
  using std::abs;
  if (!(q.b < Scalar(0))) throw QuarticError("derivatives_of_g: quartic profile has b >= 0");
  if (!(abs(rho0) < Scalar(1))) throw DomainError("derivatives_of_g: |point| must be < 1");
  const Scalar nn = static_cast<Scalar>(q.n);
  const auto rho = Jet<Scalar, N>::variable(rho0);
  const auto u = rho * rho;
  const auto phi = detail::log_ratio(u);
  const auto disc = Scalar(q.b * q.b) - (Scalar(2) * q.a * nn) * (u * phi);
  if (!(disc.value() > Scalar(0)))
    throw DomainError("derivatives_of_g: point lies outside the domain of beta_from_rho for this profile");
  const auto f = (nn * phi) / (sqrt(disc) - q.b);
  return rho * sqrt(f);
}

/// g^(1)..g^(order) of beta_from_rho at `point` (order <= 5).
template <typename Scalar>
std::vector<Scalar> derivatives_of_g(const QuarticProfile<Scalar>& q, Scalar point, int order) {
  if (order < 1 || order > 5) throw DomainError("derivatives_of_g: order must be in 1..5");
  const auto jet = beta_from_rho_jet<Scalar, 6>(q, point);
  std::vector<Scalar> d(static_cast<std::size_t>(order));
  for (int k = 1; k <= order; ++k) d[k - 1] = jet.derivative(static_cast<std::size_t>(k));
  return d;
}

/// Variance of the order-k Taylor polynomial of g about the prior mean 0,
/// k = derivs.size(), moments from the symmetric scaled Beta of `scale`.
template <typename Scalar>
Scalar taylor_variance(const std::vector<Scalar>& derivs, const RhoScale& scale) {
  const int k = static_cast<int>(derivs.size());
  if (k < 1) throw DomainError("taylor_variance: need at least one derivative");
  const auto mu = central_moments<Scalar>(Scalar(scale.shape_p), 2 * k);
  std::vector<Scalar> fact(static_cast<std::size_t>(k) + 1, Scalar(1));
  for (int i = 1; i <= k; ++i) fact[i] = fact[i - 1] * Scalar(i);
  Scalar var(0);
  for (int i = 1; i <= k; ++i)
    for (int j = 1; j <= k; ++j)
      var += derivs[i - 1] * derivs[j - 1] / (fact[i] * fact[j]) * (mu[i + j] - mu[i] * mu[j]);
  if (!(var > Scalar(0))) throw DomainError("taylor_variance: nonpositive variance");
  return var;
}

template <typename Scalar>
Scalar taylor_variance(const std::vector<Scalar>& derivs, const RhoScale& scale,
                       const TaylorConfig& config) {
  config.validate();
  if (static_cast<int>(derivs.size()) < config.order)
    throw DomainError("taylor_variance: fewer derivatives than the configured order");
  return taylor_variance(std::vector<Scalar>(derivs.begin(), derivs.begin() + config.order), scale);
}

/// Convenience: variance of the slope implied by `scale` for profile `q`.
template <typename Scalar>
Scalar implied_slope_variance(const QuarticProfile<Scalar>& q, const RhoScale& scale,
                              const TaylorConfig& config) {
  config.validate();
  const auto d = derivatives_of_g<Scalar>(q, Scalar(config.eval_point), config.order);
  return taylor_variance(d, scale);
}

}  // namespace priorforge

#endif  // PRIORFORGE_TAYLOR_HPP
