#ifndef PRIORFORGE_GLM_HPP
#define PRIORFORGE_GLM_HPP

// Maximum-likelihood fitting for canonical-link GLMs (gaussian/identity,
// binomial/logit, poisson/log) by iteratively reweighted least squares, plus
// profile log-likelihood evaluation through an offset.
//
// Log-likelihoods are exact (all normalizing constants included) so that
// differences between nested models are exact likelihood ratios. The gaussian
// dispersion is always profiled at its ML value RSS/n.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

#include "priorforge/error.hpp"

namespace priorforge {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

enum class Family { gaussian, binomial, poisson };

inline std::string_view family_name(Family f) {
  switch (f) {
    case Family::gaussian: return "gaussian";
    case Family::binomial: return "binomial";
    case Family::poisson: return "poisson";
  }
  return "unknown";
}

inline std::optional<Family> parse_family(std::string_view s) {
  if (s == "gaussian") return Family::gaussian;
  if (s == "binomial") return Family::binomial;
  if (s == "poisson") return Family::poisson;
  return std::nullopt;
}

inline bool has_dispersion(Family f) { return f == Family::gaussian; }

struct GlmOptions {
  double tolerance = 1e-10;  // relative log-likelihood change
  int max_iterations = 100;
  // |eta| beyond which binomial fits are declared separated and poisson fits
  // are declared degenerate (fitted mean underflow).
  double eta_limit = 30.0;
};

template <typename Scalar>
struct FitResult {
  Vector<Scalar> coefficients;
  Scalar max_loglik{};
  Vector<Scalar> se;
  Scalar dispersion{1};  // ML sigma^2 for gaussian, 1 otherwise
  bool converged = false;
  int iterations = 0;
  Scalar gradient_norm{};
};

namespace detail {

template <typename Scalar>
Scalar softplus(Scalar x) {
  using std::exp;
  using std::log1p;
  return x > Scalar(0) ? x + log1p(exp(-x)) : log1p(exp(x));
}

template <typename Scalar>
Scalar inv_logit(Scalar x) {
  using std::exp;
  return x >= Scalar(0) ? Scalar(1) / (Scalar(1) + exp(-x))
                        : exp(x) / (Scalar(1) + exp(x));
}

template <typename Scalar>
Scalar gaussian_profiled_loglik(Scalar rss, Eigen::Index n) {
  using std::log;
  if (!(rss > Scalar(0)))
    throw DomainError("gaussian log-likelihood: residual sum of squares is zero");
  const Scalar nn = static_cast<Scalar>(n);
  const Scalar two_pi = Scalar(2) * std::numbers::pi_v<double>;
  return -nn / Scalar(2) * (log(two_pi * rss / nn) + Scalar(1));
}

template <typename Scalar>
Vector<Scalar> mean_from_eta(Family family, const Vector<Scalar>& eta) {
  using std::exp;
  switch (family) {
    case Family::gaussian: return eta;
    case Family::binomial: return eta.unaryExpr([](Scalar e) { return inv_logit(e); });
    case Family::poisson: return eta.unaryExpr([](Scalar e) { return exp(e); });
  }
  return eta;
}

// IRLS working weights (variance function at mu for canonical links).
template <typename Scalar>
Vector<Scalar> working_weights(Family family, const Vector<Scalar>& mu) {
  switch (family) {
    case Family::gaussian: return Vector<Scalar>::Ones(mu.size());
    case Family::binomial: return mu.array() * (Scalar(1) - mu.array());
    case Family::poisson: return mu;
  }
  return mu;
}

}  // namespace detail

/// Exact log-likelihood of `y` under linear predictor `eta`. Gaussian needs
/// the dispersion (sigma^2) explicitly.
template <typename Scalar>
Scalar log_likelihood(Family family, const Vector<Scalar>& y,
                      const Vector<Scalar>& eta,
                      std::optional<Scalar> dispersion = std::nullopt) {
  using std::exp;
  using std::isfinite;
  using std::lgamma;
  using std::log;
  if (y.size() != eta.size())
    throw DomainError("log_likelihood: y and eta differ in length");
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    if (!isfinite(eta[i])) throw DomainError("log_likelihood: non-finite linear predictor");

  Scalar ll(0);
  switch (family) {
    case Family::gaussian: {
      if (!dispersion || !(*dispersion > Scalar(0)))
        throw DomainError("log_likelihood: gaussian requires dispersion > 0");
      const Scalar s2 = *dispersion;
      const Scalar two_pi = Scalar(2) * std::numbers::pi_v<double>;
      const Scalar rss = (y - eta).squaredNorm();
      ll = -static_cast<Scalar>(y.size()) / Scalar(2) * log(two_pi * s2) - rss / (Scalar(2) * s2);
      break;
    }
    case Family::binomial:
      for (Eigen::Index i = 0; i < y.size(); ++i) ll += y[i] * eta[i] - detail::softplus(eta[i]);
      break;
    case Family::poisson:
      for (Eigen::Index i = 0; i < y.size(); ++i)
        ll += y[i] * eta[i] - exp(eta[i]) - lgamma(y[i] + Scalar(1));
      break;
  }
  if (!isfinite(ll)) throw DomainError("log_likelihood: non-finite result");
  return ll;
}

/// ML fit of a canonical-link GLM. `offset` may be empty.
template <typename Scalar>
FitResult<Scalar> fit_glm(Family family, const Vector<Scalar>& y, const Matrix<Scalar>& X,
                          const Vector<Scalar>& offset = Vector<Scalar>(),
                          const GlmOptions& opts = {}) {
  using std::abs;
  using std::exp;
  using std::log;
  using std::sqrt;

  const Eigen::Index n = y.size();
  const Eigen::Index k = X.cols();
  if (X.rows() != n) throw FitError("fit_glm: X and y differ in row count");
  if (n <= k) throw FitError("fit_glm: need more observations than columns");
  const Vector<Scalar> off = offset.size() == 0 ? Vector<Scalar>::Zero(n) : offset;
  if (off.size() != n) throw FitError("fit_glm: offset has wrong length");

  FitResult<Scalar> fit;
  fit.coefficients = Vector<Scalar>::Zero(k);
  fit.se = Vector<Scalar>::Zero(k);

  if (family == Family::gaussian) {
    Vector<Scalar> resid = y - off;
    if (k > 0) {
      Eigen::ColPivHouseholderQR<Matrix<Scalar>> qr(X);
      if (qr.rank() < k) throw FitError("fit_glm: design matrix is rank deficient");
      fit.coefficients = qr.solve(resid);
      resid -= X * fit.coefficients;
    }
    const Scalar rss = resid.squaredNorm();
    fit.dispersion = rss / static_cast<Scalar>(n);
    fit.max_loglik = detail::gaussian_profiled_loglik(rss, n);
    if (k > 0) {
      const Matrix<Scalar> cov =
          (X.transpose() * X).ldlt().solve(Matrix<Scalar>::Identity(k, k)) * fit.dispersion;
      fit.se = cov.diagonal().cwiseSqrt();
      fit.gradient_norm = (X.transpose() * resid).norm() / fit.dispersion;
    }
    fit.converged = true;
    fit.iterations = 1;
    return fit;
  }

  if (k == 0) {
    fit.max_loglik = log_likelihood<Scalar>(family, y, off);
    fit.converged = true;
    return fit;
  }

  Vector<Scalar> mu(n);
  if (family == Family::binomial)
    mu = (y.array() + Scalar(0.5)) / Scalar(2);
  else
    mu = y.array() + Scalar(0.1);
  Vector<Scalar> eta(n);
  for (Eigen::Index i = 0; i < n; ++i)
    eta[i] = family == Family::binomial ? log(mu[i] / (Scalar(1) - mu[i])) : log(mu[i]);

  Vector<Scalar> beta = Vector<Scalar>::Zero(k);
  Scalar ll_old = -std::numeric_limits<Scalar>::infinity();
  bool have_beta = false;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    const Vector<Scalar> w = detail::working_weights(family, mu);
    const Vector<Scalar> z = (eta - off).array() + (y - mu).array() / w.array();
    const Vector<Scalar> sw = w.cwiseSqrt();
    Eigen::ColPivHouseholderQR<Matrix<Scalar>> qr(sw.asDiagonal() * X);
    if (qr.rank() < k) throw FitError("fit_glm: weighted design matrix is rank deficient");
    Vector<Scalar> beta_new = qr.solve(Vector<Scalar>(sw.cwiseProduct(z)));

    Vector<Scalar> eta_new = X * beta_new + off;
    Scalar ll_new = log_likelihood<Scalar>(family, y, eta_new);
    // Step halving keeps the iteration monotone.
    for (int h = 0; have_beta && h < 30 && ll_new < ll_old; ++h) {
      beta_new = (beta + beta_new) / Scalar(2);
      eta_new = X * beta_new + off;
      ll_new = log_likelihood<Scalar>(family, y, eta_new);
    }
    beta = beta_new;
    eta = eta_new;
    mu = detail::mean_from_eta(family, eta);
    have_beta = true;
    fit.iterations = it;

    const Scalar eta_max = eta.cwiseAbs().maxCoeff();
    if (family == Family::binomial && eta_max > Scalar(opts.eta_limit))
      throw FitError("fit_glm: fitted probabilities saturate (complete or quasi-complete separation)");
    if (family == Family::poisson && (-eta.array()).maxCoeff() > Scalar(opts.eta_limit))
      throw FitError("fit_glm: fitted means underflow (coefficients diverging)");

    const bool done = abs(ll_new - ll_old) <= Scalar(opts.tolerance) * (abs(ll_new) + Scalar(1));
    ll_old = ll_new;
    if (done) {
      fit.converged = true;
      break;
    }
  }
  if (!fit.converged) throw FitError("fit_glm: IRLS did not converge");

  fit.coefficients = beta;
  fit.max_loglik = ll_old;
  const Vector<Scalar> w = detail::working_weights(family, mu);
  const Matrix<Scalar> info = X.transpose() * w.asDiagonal() * X;
  const Matrix<Scalar> cov = info.ldlt().solve(Matrix<Scalar>::Identity(k, k));
  fit.se = cov.diagonal().cwiseSqrt();
  fit.gradient_norm = (X.transpose() * (y - mu)).norm();
  return fit;
}

/// Maximized log-likelihood with coefficient `j` held fixed at `beta_j`
/// (column j dropped, beta_j * X_j moved into the offset).
template <typename Scalar>
Scalar profile_loglik(Family family, const Vector<Scalar>& y, const Matrix<Scalar>& X,
                      Eigen::Index j, Scalar beta_j,
                      const Vector<Scalar>& offset = Vector<Scalar>(),
                      const GlmOptions& opts = {}) {
  if (j < 0 || j >= X.cols()) throw FitError("profile_loglik: column index out of range");
  const Eigen::Index k = X.cols();
  Matrix<Scalar> rest(X.rows(), k - 1);
  rest.leftCols(j) = X.leftCols(j);
  rest.rightCols(k - 1 - j) = X.rightCols(k - 1 - j);
  Vector<Scalar> off = beta_j * X.col(j);
  if (offset.size() != 0) off += offset;
  return fit_glm<Scalar>(family, y, rest, off, opts).max_loglik;
}

}  // namespace priorforge

#endif  // PRIORFORGE_GLM_HPP
