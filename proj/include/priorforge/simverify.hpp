#ifndef PRIORFORGE_SIMVERIFY_HPP
#define PRIORFORGE_SIMVERIFY_HPP

// Simulation checks of the prior machinery.
//
// roundtrip: for simulated GLM datasets, map the observed generalized partial
//   correlation of each coefficient back through beta_from_rho and compare
//   with the fitted coefficient.
// taylor-sd: compare the Taylor-approximate sd of beta_from_rho(rho) with a
//   Monte Carlo estimate for rho drawn from the scaled Beta prior.
//
// Every cell derives its own seed from (seed, cell index), so results do not
// depend on the number of worker threads.

#include <cstdint>
#include <string>
#include <vector>

#include "priorforge/glm.hpp"
#include "priorforge/pcorr.hpp"

namespace priorforge {

struct EffectLevel {
  std::string name;
  double coefficient = 0.0;  // true coefficient of every standardized predictor
};

struct SimGrid {
  std::vector<int> sample_sizes{20, 100, 400};
  std::vector<int> n_predictors{1, 2, 3};
  std::vector<double> collinearity{0.0, 0.5, 0.9};  // pairwise predictor correlation
  std::vector<EffectLevel> effects{{"small", 0.1}, {"medium", 0.3}, {"large", 0.5}};
  std::vector<Family> families{Family::gaussian, Family::binomial, Family::poisson};
  int replications = 200;
  std::uint64_t seed = 20170115;
};

struct SimCell {
  Family family = Family::gaussian;
  int n = 0;
  int predictors = 0;
  double collinearity = 0.0;
  EffectLevel effect;
};

/// Full cross of the grid, families outermost.
std::vector<SimCell> enumerate_cells(const SimGrid& grid);

inline constexpr double kRoundtripThreshold = 0.005;

struct RoundtripResult {
  SimCell cell;
  int replications = 0;
  int redraws = 0;            // datasets discarded because the ML fit failed
  std::size_t coefficients = 0;
  // rho_hat beyond what the quartic can invert; scored at the quartic's vertex
  std::size_t domain_failures = 0;
  double mean_rel_error = 0.0;
  double max_rel_error = 0.0;
  bool pass = false;
};

/// One simulated dataset: response and design with intercept column first.
struct SimDataset {
  Vector<double> y;
  Matrix<double> X;
};

template <typename Rng>
SimDataset simulate_dataset(const SimCell& cell, Rng& rng);

RoundtripResult run_roundtrip_cell(const SimCell& cell, int replications, std::uint64_t seed,
                                   std::uint64_t cell_index);
std::vector<RoundtripResult> run_roundtrip(const SimGrid& grid, unsigned threads);

struct TaylorSdRow {
  double sigma_rho = 0.0;
  int order = 1;
  double taylor_sd = 0.0;
  double mc_sd = 0.0;
  double exact_sd = 0.0;       // quadrature value of the same quantity as mc_sd
  double ratio = 0.0;          // taylor_sd / mc_sd
  double rho_equiv_sd = 0.0;   // sigma_rho whose exact sd equals taylor_sd
  bool checked = false;        // threshold applies (order 5, sigma_rho <= sqrt(1/3))
  bool pass = true;
};

inline constexpr double kTaylorRatioLow = 0.85;
inline constexpr double kTaylorRatioHigh = 1.02;

/// Profile used by the taylor-sd check: the curvature b of a gaussian fit on a
/// seeded standardized single-predictor dataset (n = 400), in the a -> 0
/// limit so that beta_from_rho is defined on all of (-1, 1).
QuarticProfile<double> representative_gaussian_profile(std::uint64_t seed);

/// Monte Carlo sd of beta_from_rho(rho, q) for rho ~ scaled Beta(p, p).
double monte_carlo_sd(const QuarticProfile<double>& q, double sigma_rho, std::size_t draws,
                      std::uint64_t seed);
/// Same quantity by numerical integration (requires q.a <= 0).
double exact_sd(const QuarticProfile<double>& q, double sigma_rho);

std::vector<TaylorSdRow> run_taylor_sd(std::uint64_t seed, std::size_t draws = 1'000'000,
                                       const std::vector<double>& sigmas = {});

std::string format_roundtrip(const std::vector<RoundtripResult>& rows);
std::string format_taylor_sd(const std::vector<TaylorSdRow>& rows);

/// PRIOR_FORGE_THREADS if set and positive, else the hardware concurrency.
unsigned simverify_threads();

}  // namespace priorforge

#endif  // PRIORFORGE_SIMVERIFY_HPP
