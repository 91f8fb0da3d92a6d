#include "priorforge/report.hpp"

#include <iomanip>
#include <sstream>

#include "priorforge/error.hpp"

namespace priorforge {

using nlohmann::ordered_json;

namespace {

std::string_view kind_name(TermKind k) {
  switch (k) {
    case TermKind::intercept: return "intercept";
    case TermKind::unresolved: return "unresolved";
    case TermKind::numeric: return "numeric";
    case TermKind::categorical: return "categorical";
  }
  return "unresolved";
}

TermKind kind_from(const std::string& s) {
  if (s == "intercept") return TermKind::intercept;
  if (s == "numeric") return TermKind::numeric;
  if (s == "categorical") return TermKind::categorical;
  if (s == "unresolved") return TermKind::unresolved;
  throw DataError("report: unknown term kind '" + s + "'");
}

PriorRule rule_from(const std::string& s) {
  for (PriorRule r : {PriorRule::slope, PriorRule::intercept, PriorRule::cell_mean, PriorRule::residual_sd,
                      PriorRule::random_intercept, PriorRule::random_slope})
    if (rule_name(r) == s) return r;
  throw DataError("report: unknown prior rule '" + s + "'");
}

ordered_json entry_json(const PriorSpec& p) {
  ordered_json e;
  e["term"] = p.term;
  ordered_json params;
  if (const auto* n = std::get_if<Normal>(&p.distribution)) {
    e["dist"] = "Normal";
    params["mu"] = n->mu;
    params["sigma"] = n->sigma;
  } else if (const auto* h = std::get_if<HalfNormal>(&p.distribution)) {
    e["dist"] = "HalfNormal";
    params["sigma"] = h->sigma;
  } else {
    const auto& u = std::get<Uniform>(p.distribution);
    e["dist"] = "Uniform";
    params["lower"] = u.lower;
    params["upper"] = u.upper;
  }
  e["params"] = params;

  ordered_json prov;
  prov["rule"] = rule_name(p.rule);
  prov["source"] = p.source;
  prov["augmented"] = p.augmented;
  if (p.slope) {
    const auto& s = *p.slope;
    prov["sigma_rho"] = s.sigma_rho;
    prov["scale_label"] = s.label ? ordered_json(scale_label_name(*s.label)) : ordered_json(nullptr);
    prov["taylor_order"] = s.taylor_order;
    prov["eval_point"] = s.eval_point;
    prov["quartic"] = {{"a", s.a}, {"b", s.b}, {"beta_hat", s.beta_hat}, {"loglik_max", s.loglik_max},
                       {"fit_residual", s.quartic_fit_residual}};
    prov["loglambda"] = s.loglambda;
    prov["rho_hat"] = s.rho_hat;
    prov["degenerate"] = s.degenerate;
  }
  e["provenance"] = prov;
  return e;
}

PriorSpec entry_from(const ordered_json& e) {
  PriorSpec p;
  p.term = e.at("term").get<std::string>();
  const auto dist = e.at("dist").get<std::string>();
  const auto& params = e.at("params");
  if (dist == "Normal")
    p.distribution = Normal{params.at("mu").get<double>(), params.at("sigma").get<double>()};
  else if (dist == "HalfNormal")
    p.distribution = HalfNormal{params.at("sigma").get<double>()};
  else if (dist == "Uniform")
    p.distribution = Uniform{params.at("lower").get<double>(), params.at("upper").get<double>()};
  else
    throw DataError("report: unknown distribution '" + dist + "'");

  const auto& prov = e.at("provenance");
  p.rule = rule_from(prov.at("rule").get<std::string>());
  p.source = prov.at("source").get<std::string>();
  p.augmented = prov.at("augmented").get<bool>();
  if (prov.contains("quartic")) {
    SlopeProvenance s;
    s.sigma_rho = prov.at("sigma_rho").get<double>();
    if (!prov.at("scale_label").is_null()) {
      auto l = parse_scale_label(prov.at("scale_label").get<std::string>());
      if (!l) throw DataError("report: unknown scale label");
      s.label = *l;
    }
    s.taylor_order = prov.at("taylor_order").get<int>();
    s.eval_point = prov.at("eval_point").get<double>();
    const auto& q = prov.at("quartic");
    s.a = q.at("a").get<double>();
    s.b = q.at("b").get<double>();
    s.beta_hat = q.at("beta_hat").get<double>();
    s.loglik_max = q.at("loglik_max").get<double>();
    s.quartic_fit_residual = q.at("fit_residual").get<double>();
    s.loglambda = prov.at("loglambda").get<double>();
    s.rho_hat = prov.at("rho_hat").get<double>();
    s.degenerate = prov.at("degenerate").get<bool>();
    p.slope = s;
  }
  return p;
}

}  // namespace

PriorReport make_report(const PriorSet& set) {
  return {print_formula(set.model), set.model.family, set};
}

ordered_json to_json(const PriorReport& report) {
  const auto& set = report.priors;
  ordered_json j;
  j["schema"] = kReportSchemaId;

  ordered_json model;
  model["formula"] = report.formula;
  model["family"] = family_name(report.family);
  model["n_used"] = set.n_used;
  model["rows_dropped"] = set.rows_dropped;
  model["has_intercept"] = set.model.has_intercept;
  model["cell_means"] = set.model.cell_means;
  ordered_json terms = ordered_json::array();
  for (const auto& t : set.model.fixed_terms) terms.push_back({{"name", t.name}, {"kind", kind_name(t.kind)}});
  model["fixed_terms"] = terms;
  j["model"] = model;

  ordered_json priors;
  priors["slopes"] = ordered_json::array();
  for (const auto& p : set.slopes) priors["slopes"].push_back(entry_json(p));
  priors["intercept"] = ordered_json::array();
  for (const auto& p : set.intercept_or_cellmeans) priors["intercept"].push_back(entry_json(p));
  priors["sigma"] = set.residual_sd ? entry_json(*set.residual_sd) : ordered_json(nullptr);
  priors["random_effects"] = ordered_json::array();
  for (const auto& p : set.random_effects) priors["random_effects"].push_back(entry_json(p));
  j["priors"] = priors;

  ordered_json diags = ordered_json::array();
  for (const auto& p : set.slopes) {
    const auto& s = *p.slope;
    diags.push_back({{"term", p.term},
                     {"a", s.a},
                     {"b", s.b},
                     {"beta_hat", s.beta_hat},
                     {"quartic_fit_residual", s.quartic_fit_residual},
                     {"taylor_order", s.taylor_order}});
  }
  j["diagnostics"] = diags;
  return j;
}

PriorReport report_from_json(const ordered_json& j) {
  try {
    if (j.at("schema").get<std::string>() != kReportSchemaId) throw DataError("report: unsupported schema");
    PriorReport r;
    const auto& model = j.at("model");
    r.formula = model.at("formula").get<std::string>();
    const auto fam = parse_family(model.at("family").get<std::string>());
    if (!fam) throw DataError("report: unknown family");
    r.family = *fam;

    auto& set = r.priors;
    set.model = parse_formula(r.formula, r.family);
    set.model.cell_means = model.at("cell_means").get<bool>();
    const auto& terms = model.at("fixed_terms");
    if (terms.size() != set.model.fixed_terms.size()) throw DataError("report: term list does not match formula");
    for (std::size_t i = 0; i < terms.size(); ++i) {
      if (terms[i].at("name").get<std::string>() != set.model.fixed_terms[i].name)
        throw DataError("report: term list does not match formula");
      set.model.fixed_terms[i].kind = kind_from(terms[i].at("kind").get<std::string>());
    }
    set.n_used = model.at("n_used").get<Eigen::Index>();
    set.rows_dropped = model.at("rows_dropped").get<std::size_t>();

    const auto& priors = j.at("priors");
    for (const auto& e : priors.at("slopes")) set.slopes.push_back(entry_from(e));
    for (const auto& e : priors.at("intercept")) set.intercept_or_cellmeans.push_back(entry_from(e));
    if (!priors.at("sigma").is_null()) set.residual_sd = entry_from(priors.at("sigma"));
    for (const auto& e : priors.at("random_effects")) set.random_effects.push_back(entry_from(e));
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("report: ") + e.what());
  }
}

std::string render_json(const PriorReport& report) { return to_json(report).dump(2) + "\n"; }

std::string render_table(const PriorReport& report) {
  std::ostringstream os;
  os << "# " << report.formula << "  [" << family_name(report.family) << ", n = " << report.priors.n_used
     << ", dropped = " << report.priors.rows_dropped << "]\n";
  os << std::left << std::setw(24) << "term" << std::setw(18) << "rule" << std::setw(12) << "dist"
     << "params\n";
  auto line = [&](const PriorSpec& p) {
    std::ostringstream params;
    params << std::setprecision(6);
    std::string dist;
    if (const auto* n = std::get_if<Normal>(&p.distribution)) {
      dist = "Normal";
      params << "mu=" << n->mu << " sigma=" << n->sigma;
    } else if (const auto* h = std::get_if<HalfNormal>(&p.distribution)) {
      dist = "HalfNormal";
      params << "sigma=" << h->sigma;
    } else {
      const auto& u = std::get<Uniform>(p.distribution);
      dist = "Uniform";
      params << "lower=" << u.lower << " upper=" << u.upper;
    }
    os << std::left << std::setw(24) << p.term << std::setw(18) << rule_name(p.rule) << std::setw(12) << dist
       << params.str() << "\n";
  };
  for (const auto& p : report.priors.intercept_or_cellmeans) line(p);
  for (const auto& p : report.priors.slopes) line(p);
  if (report.priors.residual_sd) line(*report.priors.residual_sd);
  for (const auto& p : report.priors.random_effects) line(p);
  return os.str();
}

}  // namespace priorforge
