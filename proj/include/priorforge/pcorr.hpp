#ifndef PRIORFORGE_PCORR_HPP
#define PRIORFORGE_PCORR_HPP

// Generalized partial correlation, the quartic approximation of a profile
// log-likelihood, and the mapping from the correlation scale back to the
// coefficient scale.
//
// The profile of coefficient j is approximated by
//
//   L(beta) ~ a (beta - beta_hat)^4 + b (beta - beta_hat)^2 + L(beta_hat),
//
// so the log-likelihood ratio against beta = 0 is -a beta_hat^4 - b beta_hat^2
// and the Cox-Snell style correlation is rho^2 = 1 - exp(-2 loglambda / n).
// Solving the resulting quartic in beta_hat for the root pair nearest zero
// gives beta_from_rho.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <sstream>

#include "priorforge/error.hpp"
#include "priorforge/glm.hpp"

namespace priorforge {

template <typename Scalar>
struct QuarticProfile {
  Scalar a{};           // quartic coefficient
  Scalar b{};           // quadratic coefficient, < 0
  Scalar beta_hat{};    // ML estimate of the coefficient
  Scalar loglik_max{};  // L(beta_hat)
  Eigen::Index n = 0;   // sample size
  Scalar fit_residual{};  // RMS residual of the 4-point least-squares fit
};

/// Validating constructor; throws QuarticError unless b < 0 and n >= 1.
template <typename Scalar>
QuarticProfile<Scalar> make_quartic_profile(Scalar a, Scalar b, Scalar beta_hat,
                                            Scalar loglik_max, Eigen::Index n,
                                            Scalar fit_residual = Scalar(0)) {
  using std::isfinite;
  if (!isfinite(a) || !isfinite(b))
    throw QuarticError("quartic profile: non-finite coefficients");
  if (!(b < Scalar(0))) {
    std::ostringstream os;
    os << "quartic profile is not locally concave (b = " << static_cast<double>(b) << " >= 0)";
    throw QuarticError(os.str());
  }
  if (n < 1) throw QuarticError("quartic profile: sample size must be positive");
  return {a, b, beta_hat, loglik_max, n, fit_residual};
}

/// rho_j = sign * sqrt(1 - exp(-2 loglambda / n)); 0 when sign is 0.
template <typename Scalar>
Scalar generalized_partial_corr(Scalar loglambda, Eigen::Index n, int sign_beta) {
  using std::expm1;
  using std::sqrt;
  if (n < 1) throw DomainError("generalized_partial_corr: n must be positive");
  if (loglambda < Scalar(-1e-8))
    throw DomainError("generalized_partial_corr: negative log-likelihood ratio (full model fits worse than the reduced model)");
  if (sign_beta == 0 || loglambda <= Scalar(0)) return Scalar(0);
  const Scalar r2 = -expm1(Scalar(-2) * loglambda / static_cast<Scalar>(n));
  const Scalar r = sqrt(r2);
  return sign_beta > 0 ? r : -r;
}

/// Slope prior sd implied by a prior sd on the classical partial correlation
/// (normal response):
///   sigma_rho * sqrt((1 - R2_y|rest) var_y / ((1 - R2_xj|rest) var_xj)).
template <typename Scalar>
Scalar classical_slope_sd(Scalar sigma_rho, Scalar r2_xj_on_rest, Scalar r2_y_on_rest,
                          Scalar var_xj, Scalar var_y) {
  using std::sqrt;
  if (!(r2_xj_on_rest < Scalar(1)))
    throw DomainError("classical_slope_sd: predictor is perfectly collinear with the others");
  if (r2_xj_on_rest < Scalar(0) || r2_y_on_rest < Scalar(0) || !(r2_y_on_rest < Scalar(1)))
    throw DomainError("classical_slope_sd: R^2 outside [0, 1)");
  if (!(var_xj > Scalar(0)) || !(var_y > Scalar(0)))
    throw DomainError("classical_slope_sd: variances must be positive");
  return sigma_rho * sqrt((Scalar(1) - r2_y_on_rest) * var_y /
                          ((Scalar(1) - r2_xj_on_rest) * var_xj));
}

/// Least-squares fit of L(beta) - L(beta_hat) on {(beta - beta_hat)^4,
/// (beta - beta_hat)^2}, no intercept.
template <typename Scalar>
QuarticProfile<Scalar> fit_quartic(const std::array<Scalar, 4>& points,
                                   const std::array<Scalar, 4>& logliks, Scalar beta_hat,
                                   Scalar loglik_max, Eigen::Index n) {
  using std::sqrt;
  Eigen::Matrix<Scalar, 4, 2> basis;
  Eigen::Matrix<Scalar, 4, 1> rhs;
  for (int i = 0; i < 4; ++i) {
    for (int k = 0; k < i; ++k)
      if (points[i] == points[k]) throw QuarticError("fit_quartic: evaluation points must be distinct");
    const Scalar t2 = (points[i] - beta_hat) * (points[i] - beta_hat);
    basis(i, 0) = t2 * t2;
    basis(i, 1) = t2;
    rhs[i] = logliks[i] - loglik_max;
  }
  Eigen::ColPivHouseholderQR<Eigen::Matrix<Scalar, 4, 2>> qr(basis);
  if (qr.rank() < 2) throw QuarticError("fit_quartic: singular basis (evaluation points too close to beta_hat)");
  const Eigen::Matrix<Scalar, 2, 1> ab = qr.solve(rhs);
  const Scalar rms = sqrt((basis * ab - rhs).squaredNorm() / Scalar(4));
  return make_quartic_profile<Scalar>(ab[0], ab[1], beta_hat, loglik_max, n, rms);
}

/// Evaluation points for the quartic fit: {0, .25, .5, .75} * beta_hat, or
/// beta_hat + {-2, -1, 1, 2} * se when beta_hat is negligible relative to se.
template <typename Scalar>
std::array<Scalar, 4> profile_points(Scalar beta_hat, Scalar se) {
  using std::abs;
  if (abs(beta_hat) < Scalar(1e-8) * se)
    return {beta_hat - Scalar(2) * se, beta_hat - se, beta_hat + se, beta_hat + Scalar(2) * se};
  return {Scalar(0), Scalar(0.25) * beta_hat, Scalar(0.5) * beta_hat, Scalar(0.75) * beta_hat};
}

/// -a beta_hat^4 - b beta_hat^2
template <typename Scalar>
Scalar loglambda_from_quartic(const QuarticProfile<Scalar>& q) {
  const Scalar b2 = q.beta_hat * q.beta_hat;
  return -q.a * b2 * b2 - q.b * b2;
}

/// Largest |rho| for which beta_from_rho is real: 1 when a <= 0, otherwise
/// sqrt(1 - exp(-b^2 / (2 a n))).
template <typename Scalar>
Scalar max_abs_rho(const QuarticProfile<Scalar>& q) {
  using std::expm1;
  using std::sqrt;
  if (!(q.a > Scalar(0))) return Scalar(1);
  return sqrt(-expm1(-q.b * q.b / (Scalar(2) * q.a * static_cast<Scalar>(q.n))));
}

/// Coefficient implied by a generalized partial correlation under the quartic
/// profile `q`, taking the root pair closest to zero:
///   sign(rho) sqrt((b + sqrt(b^2 + 2 a n log(1 - rho^2))) / (-2a)).
/// Evaluated in the rationalized form -n log(1-rho^2) / (sqrt(D) - b), which
/// is exact algebraically and has no cancellation as a -> 0.
template <typename Scalar>
Scalar beta_from_rho(Scalar rho, const QuarticProfile<Scalar>& q) {
  using std::abs;
  using std::log1p;
  using std::sqrt;
  if (!(q.b < Scalar(0))) throw QuarticError("beta_from_rho: quartic profile has b >= 0");
  if (!(abs(rho) < Scalar(1))) throw DomainError("beta_from_rho: |rho| must be < 1");
  if (rho == Scalar(0)) return Scalar(0);
  const Scalar nn = static_cast<Scalar>(q.n);
  const Scalar log1m = log1p(-rho * rho);
  Scalar value;
  if (abs(q.a) < Scalar(1e-12) * abs(q.b)) {
    value = sqrt(nn * log1m / (Scalar(2) * q.b));
  } else {
    const Scalar disc = q.b * q.b + Scalar(2) * q.a * nn * log1m;
    if (disc < Scalar(0)) {
      std::ostringstream os;
      os << "beta_from_rho: |rho| = " << static_cast<double>(abs(rho))
         << " exceeds the largest value representable by this profile ("
         << static_cast<double>(max_abs_rho(q)) << ")";
      throw DomainError(os.str());
    }
    value = sqrt(-nn * log1m / (sqrt(disc) - q.b));
  }
  return rho > Scalar(0) ? value : -value;
}

/// Profile evaluation of one coefficient of a fitted GLM together with its
/// quartic approximation.
template <typename Scalar>
struct CoefficientProfile {
  QuarticProfile<Scalar> quartic;
  std::array<Scalar, 4> points{};
  std::array<Scalar, 4> logliks{};
  Scalar loglik_zero{};  // L(0), the model without column j
  Scalar loglambda{};    // L(beta_hat) - L(0), from the actual fits
  Scalar rho{};          // generalized partial correlation from loglambda
  bool degenerate = false;
};

template <typename Scalar>
CoefficientProfile<Scalar> profile_coefficient(Family family, const Vector<Scalar>& y,
                                               const Matrix<Scalar>& X, Eigen::Index j,
                                               const FitResult<Scalar>& full,
                                               const GlmOptions& opts = {}) {
  CoefficientProfile<Scalar> out;
  const Scalar beta_hat = full.coefficients[j];
  const Scalar se = full.se[j];
  out.points = profile_points(beta_hat, se);
  out.degenerate = out.points[0] != Scalar(0);
  for (int i = 0; i < 4; ++i)
    out.logliks[i] = profile_loglik<Scalar>(family, y, X, j, out.points[i], Vector<Scalar>(), opts);
  out.quartic = fit_quartic(out.points, out.logliks, beta_hat, full.max_loglik, y.size());
  out.loglik_zero = out.degenerate
                        ? profile_loglik<Scalar>(family, y, X, j, Scalar(0), Vector<Scalar>(), opts)
                        : out.logliks[0];
  out.loglambda = full.max_loglik - out.loglik_zero;
  const int sign = beta_hat > Scalar(0) ? 1 : (beta_hat < Scalar(0) ? -1 : 0);
  out.rho = generalized_partial_corr<Scalar>(out.loglambda, y.size(), sign);
  return out;
}

}  // namespace priorforge

#endif  // PRIORFORGE_PCORR_HPP
