// prior_forge: default priors for GLM(M) coefficients, plus the simulation checks.
//
//   prior_forge priors --data d.csv --formula "y ~ x1 + x2" --family gaussian
//   prior_forge simverify --seed 1 --check all

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "priorforge/csv.hpp"
#include "priorforge/error.hpp"
#include "priorforge/formula.hpp"
#include "priorforge/priors.hpp"
#include "priorforge/report.hpp"
#include "priorforge/simverify.hpp"

namespace pf = priorforge;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A sigma equal to a named width carries that label, so --sigma-rho 0.2 and
// --scale narrow give identical reports.
pf::RhoScale scale_from_sigma(double v) {
  for (auto l : {pf::ScaleLabel::narrow, pf::ScaleLabel::medium, pf::ScaleLabel::wide, pf::ScaleLabel::superwide})
    if (v == pf::scale_label_sigma(l)) return pf::RhoScale::from_label(l);
  try {
    return pf::RhoScale::from_sigma(v);
  } catch (const pf::DomainError& e) {
    throw UsageError(e.what());
  }
}

pf::RhoScale parse_scale(const std::string& text) {
  if (auto l = pf::parse_scale_label(text)) return pf::RhoScale::from_label(*l);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size())
    throw UsageError("scale '" + text + "' is neither narrow|medium|wide|superwide nor a number");
  return scale_from_sigma(v);
}

struct PriorsArgs {
  std::string data;
  std::string formula;
  std::string family = "gaussian";
  std::optional<std::string> scale;
  std::optional<double> sigma_rho;
  std::vector<std::string> scale_terms;
  std::optional<int> taylor_order;
  std::string output = "json";
};

int run_priors(const PriorsArgs& a) {
  const auto family = pf::parse_family(a.family);
  if (!family) throw UsageError("unknown family '" + a.family + "'");

  pf::PriorOptions opts;
  if (a.scale) opts.default_scale = parse_scale(*a.scale);
  if (a.sigma_rho) opts.default_scale = scale_from_sigma(*a.sigma_rho);
  for (const auto& st : a.scale_terms) {
    const auto eq = st.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--scale-term expects NAME=LABEL, got '" + st + "'");
    opts.term_scales[st.substr(0, eq)] = parse_scale(st.substr(eq + 1));
  }
  opts.taylor_order = a.taylor_order;

  const pf::ModelSpec spec = pf::parse_formula(a.formula, *family);
  pf::Table table;
  try {
    table = pf::read_csv_file(a.data);
  } catch (const pf::DataError& e) {
    throw UsageError(e.what());
  }
  const pf::PriorSet set = pf::build_all_priors(spec, table, opts);
  const auto report = pf::make_report(set);
  std::cout << (a.output == "table" ? pf::render_table(report) : pf::render_json(report));
  return 0;
}

struct SimArgs {
  std::uint64_t seed = 20170115;
  int reps = 200;
  std::string check = "all";
};

int run_simverify(const SimArgs& a) {
  bool ok = true;
  if (a.check == "roundtrip" || a.check == "all") {
    pf::SimGrid grid;
    grid.seed = a.seed;
    grid.replications = a.reps;
    const auto rows = pf::run_roundtrip(grid, pf::simverify_threads());
    std::cout << pf::format_roundtrip(rows);
    for (const auto& r : rows) ok = ok && r.pass;
  }
  if (a.check == "taylor-sd" || a.check == "all") {
    if (a.check == "all") std::cout << "\n";
    const auto rows = pf::run_taylor_sd(a.seed);
    std::cout << pf::format_taylor_sd(rows);
    for (const auto& r : rows) ok = ok && r.pass;
  }
  if (!ok) std::cerr << "prior_forge: simverify: one or more cells failed their threshold\n";
  return ok ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weakly-informative default priors for GLM and GLMM coefficients"};
  app.require_subcommand(1);

  PriorsArgs pa;
  auto* priors = app.add_subcommand("priors", "Derive default priors for a model");
  priors->add_option("--data", pa.data, "CSV file")->required();
  priors->add_option("--formula", pa.formula, "Model formula, e.g. \"y ~ x + (1|g)\"")->required();
  priors->add_option("--family", pa.family, "gaussian|binomial|poisson")
      ->check(CLI::IsMember({"gaussian", "binomial", "poisson"}));
  auto* scale = priors->add_option("--scale", pa.scale, "Global width: narrow|medium|wide|superwide or sigma_rho");
  auto* sigma = priors->add_option("--sigma-rho", pa.sigma_rho, "Global prior sd on the partial-correlation scale");
  scale->excludes(sigma);
  priors->add_option("--scale-term", pa.scale_terms, "Per-term width NAME=LABEL or NAME=FLOAT (repeatable)");
  priors->add_option("--taylor-order", pa.taylor_order, "Taylor order 1, 3 or 5")
      ->check(CLI::IsMember({1, 3, 5}));
  priors->add_option("--output", pa.output, "json|table")->check(CLI::IsMember({"json", "table"}));

  SimArgs sa;
  auto* sim = app.add_subcommand("simverify", "Run the simulation checks");
  sim->add_option("--seed", sa.seed, "Master seed");
  sim->add_option("--reps", sa.reps, "Replications per cell")->check(CLI::PositiveNumber);
  sim->add_option("--check", sa.check, "roundtrip|taylor-sd|all")
      ->check(CLI::IsMember({"roundtrip", "taylor-sd", "all"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*priors) return run_priors(pa);
    return run_simverify(sa);
  } catch (const UsageError& e) {
    std::cerr << "prior_forge: " << e.what() << "\n";
    return kExitUsage;
  } catch (const pf::FormulaError& e) {
    std::cerr << "prior_forge: formula error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const pf::UnknownColumnError& e) {
    std::cerr << "prior_forge: " << e.what() << "\n";
    return kExitUsage;
  } catch (const pf::Error& e) {
    std::cerr << "prior_forge: " << e.what() << "\n";
    return kExitFailure;
  }
}
