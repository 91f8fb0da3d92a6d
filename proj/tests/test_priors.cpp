#include <doctest.h>

#include <cmath>

#include "priorforge/error.hpp"
#include "priorforge/priors.hpp"
#include "sim_data.hpp"

using namespace priorforge;
using priorforge::testing::sim_table;
using priorforge::testing::SimTableOptions;

namespace {

const PriorSpec& find(const std::vector<PriorSpec>& v, const std::string& term) {
  for (const auto& p : v)
    if (p.term == term) return p;
  FAIL("no prior for " << term);
  throw;
}

double sd_of(const PriorSpec& p) { return prior_scale(p.distribution); }

}  // namespace

TEST_CASE("gaussian model produces slope, intercept and sigma priors") {
  const Table t = sim_table(Family::gaussian, 1);
  const auto set = build_all_priors(parse_formula("y ~ x1 + x2 + g"), t);
  CHECK(set.slopes.size() == 4);
  REQUIRE(set.intercept_or_cellmeans.size() == 1);
  REQUIRE(set.residual_sd.has_value());
  for (const auto& s : set.slopes) {
    REQUIRE(s.slope.has_value());
    CHECK(std::get<Normal>(s.distribution).mu == 0.0);
    CHECK(s.slope->taylor_order == 5);
    CHECK(s.slope->sigma_rho == doctest::Approx(std::sqrt(1.0 / 3.0)));
  }
  CHECK(find(set.slopes, "g[lo]").term == "g[lo]");
}

TEST_CASE("non-gaussian families default to first order and have no sigma prior") {
  for (Family f : {Family::binomial, Family::poisson}) {
    const auto set = build_all_priors(parse_formula("y ~ x1 + x2", f), sim_table(f, 2));
    CHECK_FALSE(set.residual_sd.has_value());
    for (const auto& s : set.slopes) CHECK(s.slope->taylor_order == 1);
  }
}

TEST_CASE("first-order slope sd is sigma_rho times the first derivative") {
  const Table t = sim_table(Family::poisson, 3);
  PriorOptions o;
  o.default_scale = RhoScale::from_label(ScaleLabel::medium);
  const auto set = build_all_priors(parse_formula("y ~ x1 + x2", Family::poisson), t, o);
  for (const auto& s : set.slopes) {
    const auto& p = *s.slope;
    const auto q = make_quartic_profile(p.a, p.b, p.beta_hat, p.loglik_max, set.n_used);
    const double g1 = derivatives_of_g(q, 0.001, 1)[0];
    CHECK(sd_of(s) == doctest::Approx(0.4 * g1).epsilon(1e-12));
  }
}

TEST_CASE("wider scales give wider priors, per-term overrides apply") {
  const Table t = sim_table(Family::gaussian, 4);
  const auto spec = parse_formula("y ~ x1 + x2");
  double prev = 0.0;
  for (auto l : {ScaleLabel::narrow, ScaleLabel::medium, ScaleLabel::wide, ScaleLabel::superwide}) {
    PriorOptions o;
    o.default_scale = RhoScale::from_label(l);
    const double sd = sd_of(find(build_all_priors(spec, t, o).slopes, "x1"));
    CHECK(sd > prev);
    prev = sd;
  }
  PriorOptions o;
  o.term_scales["x2"] = RhoScale::from_label(ScaleLabel::narrow);
  const auto set = build_all_priors(spec, t, o);
  CHECK(find(set.slopes, "x2").slope->label == ScaleLabel::narrow);
  CHECK(find(set.slopes, "x1").slope->label == ScaleLabel::wide);
}

TEST_CASE("slope priors are invariant to predictor shifts and scale inversely with predictor scale") {
  for (Family f : {Family::gaussian, Family::binomial, Family::poisson}) {
    const auto spec = parse_formula("y ~ x1 + x2", f);
    const auto base = build_all_priors(spec, sim_table(f, 5));
    SimTableOptions shifted;
    shifted.x1_shift = 12.5;
    const auto s = build_all_priors(spec, sim_table(f, 5, shifted));
    SimTableOptions scaled;
    scaled.x1_scale = 4.0;
    const auto c = build_all_priors(spec, sim_table(f, 5, scaled));
    CHECK(sd_of(find(s.slopes, "x1")) == doctest::Approx(sd_of(find(base.slopes, "x1"))).epsilon(1e-3));
    CHECK(sd_of(find(s.slopes, "x2")) == doctest::Approx(sd_of(find(base.slopes, "x2"))).epsilon(1e-3));
    CHECK(4.0 * sd_of(find(c.slopes, "x1")) == doctest::Approx(sd_of(find(base.slopes, "x1"))).epsilon(1e-3));
  }
}

TEST_CASE("centered gaussian model: intercept and residual priors are exact") {
  SimTableOptions o;
  o.center = true;
  const Table t = sim_table(Family::gaussian, 6, o);
  const auto set = build_all_priors(parse_formula("y ~ x1 + x2"), t);
  const auto d = build_design(parse_formula("y ~ x1 + x2"), t);
  const auto& ic = std::get<Normal>(set.intercept_or_cellmeans[0].distribution);
  CHECK(ic.mu == d.mean_y);
  CHECK(ic.sigma == std::sqrt(d.var_y));
  const auto& sig = std::get<Uniform>(set.residual_sd->distribution);
  CHECK(sig.lower == 0.0);
  CHECK(sig.upper == std::sqrt(d.var_y));
}

TEST_CASE("uncentered predictors widen the intercept prior") {
  SimTableOptions o;
  o.x1_shift = 3.0;
  const Table t = sim_table(Family::gaussian, 7, o);
  const auto spec = parse_formula("y ~ x1");
  const auto set = build_all_priors(spec, t);
  const auto d = build_design(spec, t);
  const double slope_sd = sd_of(set.slopes[0]);
  const double want = std::sqrt(d.var_y + d.means_x[1] * d.means_x[1] * slope_sd * slope_sd);
  CHECK(sd_of(set.intercept_or_cellmeans[0]) == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("random-effect priors reuse the fixed-effect sd") {
  const Table t = sim_table(Family::gaussian, 8);
  const auto set = build_all_priors(parse_formula("y ~ x1 + x2 + (1|site) + (x1|site) + (x2|g)"), t);
  REQUIRE(set.random_effects.size() == 3);
  CHECK(sd_of(find(set.random_effects, "1|site")) == sd_of(set.intercept_or_cellmeans[0]));
  CHECK(sd_of(find(set.random_effects, "x1|site")) == sd_of(find(set.slopes, "x1")));
  CHECK(sd_of(find(set.random_effects, "x2|g")) == sd_of(find(set.slopes, "x2")));
  for (const auto& r : set.random_effects) CHECK_FALSE(r.augmented);
}

TEST_CASE("random slope without a fixed slope uses the augmented model") {
  for (Family f : {Family::gaussian, Family::binomial, Family::poisson}) {
    const Table t = sim_table(f, 9);
    const auto set = build_all_priors(parse_formula("y ~ x1 + (x2|site)", f), t);
    const auto full = build_all_priors(parse_formula("y ~ x1 + x2", f), t);
    const auto& r = find(set.random_effects, "x2|site");
    CHECK(r.augmented);
    CHECK(sd_of(r) == sd_of(find(full.slopes, "x2")));
    CHECK(std::holds_alternative<HalfNormal>(r.distribution));
  }
}

TEST_CASE("random intercept in a model without intercept uses the augmented model") {
  const Table t = sim_table(Family::gaussian, 10);
  const auto set = build_all_priors(parse_formula("y ~ 0 + x1 + (1|site)"), t);
  const auto with = build_all_priors(parse_formula("y ~ 1 + x1"), t);
  const auto& r = find(set.random_effects, "1|site");
  CHECK(r.augmented);
  CHECK(sd_of(r) == sd_of(with.intercept_or_cellmeans[0]));
}

TEST_CASE("cell-means models share one prior across cells") {
  for (Family f : {Family::gaussian, Family::binomial, Family::poisson}) {
    const Table t = sim_table(f, 11);
    const auto set = build_all_priors(parse_formula("y ~ 0 + g", f), t);
    REQUIRE(set.intercept_or_cellmeans.size() == 3);
    CHECK(set.slopes.empty());
    const auto first = std::get<Normal>(set.intercept_or_cellmeans[0].distribution);
    const auto inter = build_all_priors(parse_formula("y ~ 1", f), t).intercept_or_cellmeans[0];
    for (const auto& c : set.intercept_or_cellmeans) {
      CHECK(c.rule == PriorRule::cell_mean);
      CHECK(std::get<Normal>(c.distribution).mu == first.mu);
      CHECK(std::get<Normal>(c.distribution).sigma == first.sigma);
    }
    CHECK(first.mu == std::get<Normal>(inter.distribution).mu);
    CHECK(first.sigma == std::get<Normal>(inter.distribution).sigma);
  }
}

TEST_CASE("failures name the offending term") {
  Table t = sim_table(Family::gaussian, 12);
  std::vector<std::string> constant(t.rows(), "4.0");
  t.add_column("k", constant);
  try {
    build_all_priors(parse_formula("k ~ x1"), t);
    FAIL("expected an error");
  } catch (const TermError& e) {
    CHECK(e.term() == "x1");
  } catch (const Error& e) {
    CHECK_MESSAGE(std::string(e.what()).find("full model") != std::string::npos, e.what());
  }
  std::vector<std::string> one(t.rows(), "only");
  t.add_column("one", one);
  try {
    build_all_priors(parse_formula("y ~ x1 + (1|one)"), t);
    FAIL("expected an error");
  } catch (const TermError& e) {
    CHECK(e.term() == "1|one");
  }
}
