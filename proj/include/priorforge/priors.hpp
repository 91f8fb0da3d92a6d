#ifndef PRIORFORGE_PRIORS_HPP
#define PRIORFORGE_PRIORS_HPP

// Default prior construction. Slopes get Normal(0, sd) priors whose variance
// is the Taylor-approximate variance of the coefficient implied by a scaled
// Beta prior on its generalized partial correlation. Intercepts (and cell
// means) combine the link-scale response moments with the slope variances;
// the residual sd is Uniform(0, sd(Y)); random-effect sds are Half-Normal with
// the prior sd of the corresponding fixed effect.

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "priorforge/csv.hpp"
#include "priorforge/formula.hpp"
#include "priorforge/glm.hpp"
#include "priorforge/pcorr.hpp"
#include "priorforge/taylor.hpp"

namespace priorforge {

struct Normal {
  double mu = 0.0;
  double sigma = 1.0;
};
struct HalfNormal {
  double sigma = 1.0;
};
struct Uniform {
  double lower = 0.0;
  double upper = 1.0;
};
using Distribution = std::variant<Normal, HalfNormal, Uniform>;

/// Standard deviation of the prior (Normal/HalfNormal sigma, Uniform width).
double prior_scale(const Distribution& d);

/// How a slope prior was obtained.
struct SlopeProvenance {
  double sigma_rho = 0.0;
  std::optional<ScaleLabel> label;
  int taylor_order = 1;
  double eval_point = 0.001;
  double a = 0.0;
  double b = 0.0;
  double beta_hat = 0.0;
  double loglik_max = 0.0;
  double quartic_fit_residual = 0.0;
  double loglambda = 0.0;  // from the actual nested fits
  double rho_hat = 0.0;    // generalized partial correlation of the data
  bool degenerate = false;  // beta_hat ~ 0, points placed at +-se
};

enum class PriorRule {
  slope,
  intercept,
  cell_mean,
  residual_sd,
  random_intercept,
  random_slope,
};

std::string_view rule_name(PriorRule r);

struct PriorSpec {
  std::string term;
  Distribution distribution;
  PriorRule rule = PriorRule::slope;
  std::optional<SlopeProvenance> slope;  // set for slope priors
  bool augmented = false;  // random-effect scale taken from an augmented model
  std::string source;      // human-readable origin of the parameters
};

struct PriorSet {
  std::vector<PriorSpec> slopes;
  std::vector<PriorSpec> intercept_or_cellmeans;
  std::optional<PriorSpec> residual_sd;
  std::vector<PriorSpec> random_effects;
  ModelSpec model;
  Eigen::Index n_used = 0;
  std::size_t rows_dropped = 0;
};

/// Per-term prior widths and Taylor settings. Scales are looked up by design
/// column name ("g[b]") first, then by term name ("g").
struct PriorOptions {
  RhoScale default_scale = RhoScale::wide();
  std::map<std::string, RhoScale> term_scales;
  std::optional<int> taylor_order;  // default: 5 gaussian, 1 otherwise
  double eval_point = 0.001;

  RhoScale scale_for(const std::string& column, const std::string& term) const;
  TaylorConfig taylor_config(Family family) const;
};

/// ML fit of the full fixed-effects model.
FitResult<double> fit_full_model(const DesignData& design, Family family);

PriorSpec slope_prior(const DesignData& design, Family family, Eigen::Index column,
                      const RhoScale& scale, const TaylorConfig& config,
                      const FitResult<double>& full);
PriorSpec slope_prior(const DesignData& design, Family family, Eigen::Index column,
                      const RhoScale& scale, const TaylorConfig& config);

/// Link-scale mean and variance of Y: (ybar, var(Y)) for gaussian, otherwise
/// (b0_hat, n var(b0_hat)) from an intercept-only GLM.
struct ResponseMoments {
  double mean = 0.0;
  double variance = 0.0;
};
ResponseMoments response_moments(const DesignData& design, Family family);

PriorSpec intercept_prior(const DesignData& design, Family family,
                          const std::vector<PriorSpec>& slope_priors);

/// One prior per cell indicator, all sharing the intercept scheme. Slope
/// priors of numeric terms in the same model contribute as for intercepts.
std::vector<PriorSpec> cellmeans_priors(const DesignData& design, Family family,
                                        const std::vector<PriorSpec>& slope_priors = {});

PriorSpec residual_sd_prior(const DesignData& design);

/// HalfNormal prior for the sd of random term `term`; when the matching fixed
/// effect is absent the model is augmented with it (all other terms kept).
PriorSpec random_effect_prior(const RandomTerm& term, const DesignData& design, const Table& table,
                              Family family, const PriorOptions& options, const PriorSet& fixed_priors);

PriorSet build_all_priors(const ModelSpec& spec, const Table& table, const PriorOptions& options = {});

}  // namespace priorforge

#endif  // PRIORFORGE_PRIORS_HPP
