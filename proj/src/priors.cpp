#include "priorforge/priors.hpp"

#include <algorithm>
#include <cmath>

#include "priorforge/error.hpp"

namespace priorforge {

double prior_scale(const Distribution& d) {
  if (const auto* n = std::get_if<Normal>(&d)) return n->sigma;
  if (const auto* h = std::get_if<HalfNormal>(&d)) return h->sigma;
  const auto& u = std::get<Uniform>(d);
  return u.upper - u.lower;
}

std::string_view rule_name(PriorRule r) {
  switch (r) {
    case PriorRule::slope: return "slope";
    case PriorRule::intercept: return "intercept";
    case PriorRule::cell_mean: return "cell_mean";
    case PriorRule::residual_sd: return "residual_sd";
    case PriorRule::random_intercept: return "random_intercept";
    case PriorRule::random_slope: return "random_slope";
  }
  return "unknown";
}

RhoScale PriorOptions::scale_for(const std::string& column, const std::string& term) const {
  if (auto it = term_scales.find(column); it != term_scales.end()) return it->second;
  if (auto it = term_scales.find(term); it != term_scales.end()) return it->second;
  return default_scale;
}

TaylorConfig PriorOptions::taylor_config(Family family) const {
  TaylorConfig c = default_taylor_config(family);
  if (taylor_order) c.order = *taylor_order;
  c.eval_point = eval_point;
  c.validate();
  return c;
}

FitResult<double> fit_full_model(const DesignData& design, Family family) {
  return fit_glm<double>(family, design.y, design.X);
}

PriorSpec slope_prior(const DesignData& design, Family family, Eigen::Index column,
                      const RhoScale& scale, const TaylorConfig& config,
                      const FitResult<double>& full) {
  const std::string& name = design.column_names.at(static_cast<std::size_t>(column));
  try {
    if (column == design.intercept_column())
      throw DomainError("the intercept has no slope prior");
    config.validate();
    const auto prof = profile_coefficient<double>(family, design.y, design.X, column, full);
    const auto derivs = derivatives_of_g<double>(prof.quartic, config.eval_point, config.order);
    const double var = taylor_variance(derivs, scale);

    SlopeProvenance p;
    p.sigma_rho = scale.sigma_rho;
    p.label = scale.label;
    p.taylor_order = config.order;
    p.eval_point = config.eval_point;
    p.a = prof.quartic.a;
    p.b = prof.quartic.b;
    p.beta_hat = prof.quartic.beta_hat;
    p.loglik_max = prof.quartic.loglik_max;
    p.quartic_fit_residual = prof.quartic.fit_residual;
    p.loglambda = prof.loglambda;
    p.rho_hat = prof.rho;
    p.degenerate = prof.degenerate;

    PriorSpec spec;
    spec.term = name;
    spec.distribution = Normal{0.0, std::sqrt(var)};
    spec.rule = PriorRule::slope;
    spec.slope = p;
    spec.source = "partial-correlation scale";
    return spec;
  } catch (const TermError&) {
    throw;
  } catch (const Error& e) {
    throw TermError(name, e.what());
  }
}

PriorSpec slope_prior(const DesignData& design, Family family, Eigen::Index column,
                      const RhoScale& scale, const TaylorConfig& config) {
  FitResult<double> full;
  try {
    full = fit_full_model(design, family);
  } catch (const Error& e) {
    throw TermError(design.column_names.at(static_cast<std::size_t>(column)),
                    std::string("full model: ") + e.what());
  }
  return slope_prior(design, family, column, scale, config, full);
}

ResponseMoments response_moments(const DesignData& design, Family family) {
  if (family == Family::gaussian) return {design.mean_y, design.var_y};
  const Matrix<double> ones = Matrix<double>::Ones(design.n, 1);
  const auto fit = fit_glm<double>(family, design.y, ones);
  const double se = fit.se[0];
  return {fit.coefficients[0], static_cast<double>(design.n) * se * se};
}

namespace {

// Sum of Xbar_j^2 var(beta_j) over slope priors (slope prior means are 0, so
// the mean shift term vanishes).
double slope_contribution(const DesignData& design, const std::vector<PriorSpec>& slope_priors) {
  double v = 0.0;
  for (const auto& s : slope_priors) {
    const auto it = std::find(design.column_names.begin(), design.column_names.end(), s.term);
    if (it == design.column_names.end())
      throw DataError("slope prior for unknown column '" + s.term + "'");
    const double xbar = design.means_x[it - design.column_names.begin()];
    const double sd = prior_scale(s.distribution);
    v += xbar * xbar * sd * sd;
  }
  return v;
}

}  // namespace

PriorSpec intercept_prior(const DesignData& design, Family family,
                          const std::vector<PriorSpec>& slope_priors) {
  const std::string name(kInterceptName);
  try {
    if (design.intercept_column() < 0) throw DomainError("model has no intercept");
    const auto m = response_moments(design, family);
    const double var = m.variance + slope_contribution(design, slope_priors);
    if (!(var > 0.0)) throw DomainError("intercept prior variance is not positive");
    PriorSpec spec;
    spec.term = name;
    spec.distribution = Normal{m.mean, std::sqrt(var)};
    spec.rule = PriorRule::intercept;
    spec.source = family == Family::gaussian ? "response moments" : "intercept-only fit";
    return spec;
  } catch (const Error& e) {
    throw TermError(name, e.what());
  }
}

std::vector<PriorSpec> cellmeans_priors(const DesignData& design, Family family,
                                        const std::vector<PriorSpec>& slope_priors) {
  const TermColumns* cells = nullptr;
  for (const auto& t : design.term_columns)
    if (t.kind == TermKind::categorical) cells = &t;
  if (!design.spec.cell_means || !cells) throw DataError("cellmeans_priors: not a cell-means model");
  try {
    for (Eigen::Index c : cells->columns)
      if (design.X.col(c).sum() == 0.0)
        throw DataError("cell '" + design.column_names[c] + "' has no observations");
    const auto m = response_moments(design, family);
    const double var = m.variance + slope_contribution(design, slope_priors);
    if (!(var > 0.0)) throw DomainError("cell-mean prior variance is not positive");
    std::vector<PriorSpec> out;
    for (Eigen::Index c : cells->columns) {
      PriorSpec spec;
      spec.term = design.column_names[c];
      spec.distribution = Normal{m.mean, std::sqrt(var)};
      spec.rule = PriorRule::cell_mean;
      spec.source = family == Family::gaussian ? "response moments" : "intercept-only fit";
      out.push_back(std::move(spec));
    }
    return out;
  } catch (const Error& e) {
    throw TermError(cells->term, e.what());
  }
}

PriorSpec residual_sd_prior(const DesignData& design) {
  const double sd = std::sqrt(design.var_y);
  if (!(sd > 0.0)) throw TermError("sigma", "response is constant; residual sd prior would be Uniform(0, 0)");
  PriorSpec spec;
  spec.term = "sigma";
  spec.distribution = Uniform{0.0, sd};
  spec.rule = PriorRule::residual_sd;
  spec.source = "response sd";
  return spec;
}

namespace {

struct FixedPriors {
  std::vector<PriorSpec> slopes;
  std::vector<PriorSpec> intercept_or_cellmeans;
};

FixedPriors fixed_effect_priors(const DesignData& design, Family family, const PriorOptions& options) {
  FixedPriors out;
  const TaylorConfig config = options.taylor_config(family);
  std::vector<Eigen::Index> slope_cols;
  for (const auto& t : design.term_columns) {
    if (t.kind == TermKind::intercept) continue;
    if (design.spec.cell_means && t.kind == TermKind::categorical) continue;
    slope_cols.insert(slope_cols.end(), t.columns.begin(), t.columns.end());
  }

  if (!slope_cols.empty()) {
    FitResult<double> full;
    try {
      full = fit_full_model(design, family);
    } catch (const Error& e) {
      throw FitError(std::string("full model: ") + e.what());
    }
    std::string failures;
    std::string first_failed;
    for (Eigen::Index c : slope_cols) {
      const auto& name = design.column_names[c];
      try {
        out.slopes.push_back(slope_prior(design, family, c,
                                         options.scale_for(name, design.term_of_column(c).term),
                                         config, full));
      } catch (const TermError& e) {
        if (first_failed.empty()) first_failed = e.term();
        if (!failures.empty()) failures += "; ";
        failures += e.what();
      }
    }
    if (!failures.empty()) {
      // TermError prefixes the first term again; strip the duplicate.
      const std::string prefix = "term '" + first_failed + "': ";
      if (failures.rfind(prefix, 0) == 0) failures.erase(0, prefix.size());
      throw TermError(first_failed, failures);
    }
  }

  if (design.spec.has_intercept)
    out.intercept_or_cellmeans.push_back(intercept_prior(design, family, out.slopes));
  else if (design.spec.cell_means)
    out.intercept_or_cellmeans = cellmeans_priors(design, family, out.slopes);
  return out;
}

}  // namespace

PriorSpec random_effect_prior(const RandomTerm& term, const DesignData& design, const Table& table,
                              Family family, const PriorOptions& options, const PriorSet& fixed_priors) {
  const std::string label = term.label();
  try {
    const auto lv = design.group_levels.find(term.group);
    if (lv == design.group_levels.end())
      throw DataError("grouping column '" + term.group + "' is not part of the design");
    if (lv->second.size() < 2)
      throw DataError("grouping column '" + term.group + "' needs at least 2 levels");

    PriorSpec spec;
    spec.term = label;
    double sd = 0.0;
    if (term.is_intercept()) {
      spec.rule = PriorRule::random_intercept;
      if (design.spec.has_intercept) {
        sd = prior_scale(fixed_priors.intercept_or_cellmeans.at(0).distribution);
      } else {
        ModelSpec aug = design.spec;
        aug.has_intercept = true;
        aug.fixed_terms.insert(aug.fixed_terms.begin(), {std::string(kInterceptName), TermKind::intercept});
        const DesignData aug_design = build_design(aug, table);
        const auto pri = fixed_effect_priors(aug_design, family, options);
        sd = prior_scale(pri.intercept_or_cellmeans.at(0).distribution);
        spec.augmented = true;
      }
    } else {
      spec.rule = PriorRule::random_slope;
      const TermColumns* t = design.find_term(term.expr);
      if (t && t->kind == TermKind::numeric) {
        const std::string& col = design.column_names[t->columns.front()];
        const auto it = std::find_if(fixed_priors.slopes.begin(), fixed_priors.slopes.end(),
                                     [&](const PriorSpec& s) { return s.term == col; });
        if (it == fixed_priors.slopes.end()) throw DataError("no slope prior for '" + col + "'");
        sd = prior_scale(it->distribution);
      } else {
        ModelSpec aug = design.spec;
        aug.fixed_terms.push_back({term.expr, TermKind::unresolved});
        const DesignData aug_design = build_design(aug, table);
        const TermColumns* at = aug_design.find_term(term.expr);
        const Eigen::Index col = at->columns.front();
        const auto full = fit_full_model(aug_design, family);
        const auto s = slope_prior(aug_design, family, col,
                                   options.scale_for(aug_design.column_names[col], term.expr),
                                   options.taylor_config(family), full);
        sd = prior_scale(s.distribution);
        spec.augmented = true;
      }
    }
    spec.distribution = HalfNormal{sd};
    spec.source = spec.augmented ? "augmented model fixed-effect prior sd" : "fixed-effect prior sd";
    return spec;
  } catch (const TermError& e) {
    throw TermError(label, e.what());
  } catch (const Error& e) {
    throw TermError(label, e.what());
  }
}

PriorSet build_all_priors(const ModelSpec& spec, const Table& table, const PriorOptions& options) {
  const Family family = spec.family;
  const DesignData design = build_design(spec, table);

  PriorSet set;
  set.model = design.spec;
  set.n_used = design.n;
  set.rows_dropped = design.rows_dropped;

  auto fixed = fixed_effect_priors(design, family, options);
  set.slopes = std::move(fixed.slopes);
  set.intercept_or_cellmeans = std::move(fixed.intercept_or_cellmeans);
  if (family == Family::gaussian) set.residual_sd = residual_sd_prior(design);
  for (const auto& r : design.spec.random_terms)
    set.random_effects.push_back(random_effect_prior(r, design, table, family, options, set));
  return set;
}

}  // namespace priorforge
