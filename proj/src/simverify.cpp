#include "priorforge/simverify.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <thread>

#include "priorforge/error.hpp"
#include "priorforge/taylor.hpp"

namespace priorforge {

std::vector<SimCell> enumerate_cells(const SimGrid& grid) {
  std::vector<SimCell> cells;
  for (Family f : grid.families)
    for (int n : grid.sample_sizes)
      for (int p : grid.n_predictors)
        for (double c : grid.collinearity)
          for (const auto& e : grid.effects) cells.push_back({f, n, p, c, e});
  return cells;
}

template <typename Rng>
SimDataset simulate_dataset(const SimCell& cell, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const int n = cell.n;
  const int p = cell.predictors;
  SimDataset d;
  d.X.resize(n, p + 1);
  d.y.resize(n);
  const double shared = std::sqrt(cell.collinearity);
  const double own = std::sqrt(1.0 - cell.collinearity);
  for (int i = 0; i < n; ++i) {
    d.X(i, 0) = 1.0;
    const double z0 = normal(rng);
    for (int k = 1; k <= p; ++k) d.X(i, k) = shared * z0 + own * normal(rng);
  }
  const double intercept = cell.family == Family::poisson ? 0.5 : 0.0;
  for (int i = 0; i < n; ++i) {
    double eta = intercept;
    for (int k = 1; k <= p; ++k) eta += cell.effect.coefficient * d.X(i, k);
    switch (cell.family) {
      case Family::gaussian: d.y[i] = eta + normal(rng); break;
      case Family::binomial: {
        std::bernoulli_distribution bern(1.0 / (1.0 + std::exp(-eta)));
        d.y[i] = bern(rng) ? 1.0 : 0.0;
        break;
      }
      case Family::poisson: {
        std::poisson_distribution<int> pois(std::exp(eta));
        d.y[i] = pois(rng);
        break;
      }
    }
  }
  return d;
}

template SimDataset simulate_dataset<std::mt19937_64>(const SimCell&, std::mt19937_64&);

namespace {

std::mt19937_64 cell_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

RoundtripResult run_roundtrip_cell(const SimCell& cell, int replications, std::uint64_t seed,
                                   std::uint64_t cell_index) {
  RoundtripResult r;
  r.cell = cell;
  auto rng = cell_rng(seed, cell_index);
  double sum = 0.0;
  const int max_redraws = 50 * replications + 100;
  while (r.replications < replications) {
    const SimDataset d = simulate_dataset(cell, rng);
    std::vector<double> errors;
    std::size_t failures = 0;
    try {
      const auto full = fit_glm<double>(cell.family, d.y, d.X);
      for (Eigen::Index j = 1; j < d.X.cols(); ++j) {
        const auto prof = profile_coefficient<double>(cell.family, d.y, d.X, j, full);
        if (prof.degenerate) continue;
        const auto& q = prof.quartic;
        double back = 0.0;
        if (std::abs(prof.rho) < max_abs_rho(q)) {
          back = beta_from_rho(prof.rho, q);
        } else {
          // beyond rho_max: score at the limit of beta_from_rho, the quartic's vertex
          back = std::copysign(std::sqrt(-q.b / (2.0 * q.a)), prof.rho);
          ++failures;
        }
        errors.push_back(std::abs(back - q.beta_hat) / std::abs(q.beta_hat));
      }
    } catch (const FitError&) {
      if (++r.redraws > max_redraws) break;
      continue;
    } catch (const QuarticError&) {
      if (++r.redraws > max_redraws) break;
      continue;
    }
    ++r.replications;
    r.domain_failures += failures;
    for (double e : errors) {
      sum += e;
      r.max_rel_error = std::max(r.max_rel_error, e);
      ++r.coefficients;
    }
  }
  r.mean_rel_error = r.coefficients ? sum / static_cast<double>(r.coefficients) : 0.0;
  r.pass = r.replications == replications && r.coefficients > 0 && r.mean_rel_error <= kRoundtripThreshold;
  return r;
}

unsigned simverify_threads() {
  if (const char* env = std::getenv("PRIOR_FORGE_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<RoundtripResult> run_roundtrip(const SimGrid& grid, unsigned threads) {
  const auto cells = enumerate_cells(grid);
  std::vector<RoundtripResult> out(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++)
      out[i] = run_roundtrip_cell(cells[i], grid.replications, grid.seed, i);
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(cells.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return out;
}

QuarticProfile<double> representative_gaussian_profile(std::uint64_t seed) {
  auto rng = cell_rng(seed, 0xfeedULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int n = 400;
  Vector<double> x(n), y(n);
  for (int i = 0; i < n; ++i) x[i] = normal(rng);
  for (int i = 0; i < n; ++i) y[i] = 0.3 * x[i] + std::sqrt(1.0 - 0.09) * normal(rng);
  auto standardize = [](Vector<double>& v) {
    v.array() -= v.mean();
    v /= std::sqrt(v.squaredNorm() / static_cast<double>(v.size()));
  };
  standardize(x);
  standardize(y);
  Matrix<double> X(n, 2);
  X.col(0).setOnes();
  X.col(1) = x;
  const auto full = fit_glm<double>(Family::gaussian, y, X);
  const auto prof = profile_coefficient<double>(Family::gaussian, y, X, 1, full);
  auto q = prof.quartic;
  q.a = 0.0;
  return q;
}

double monte_carlo_sd(const QuarticProfile<double>& q, double sigma_rho, std::size_t draws,
                      std::uint64_t seed) {
  const RhoScale scale = RhoScale::from_sigma(sigma_rho);
  auto rng = cell_rng(seed, static_cast<std::uint64_t>(std::llround(sigma_rho * 1e6)));
  std::gamma_distribution<double> gamma(scale.shape_p, 1.0);
  // Welford accumulation
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t k = 0;
  for (std::size_t i = 0; i < draws; ++i) {
    const double g1 = gamma(rng);
    const double g2 = gamma(rng);
    const double rho = (g1 - g2) / (g1 + g2);
    if (!(std::abs(rho) < 1.0)) continue;
    const double v = beta_from_rho(rho, q);
    ++k;
    const double delta = v - mean;
    mean += delta / static_cast<double>(k);
    m2 += delta * (v - mean);
  }
  if (k < 2) throw DomainError("monte_carlo_sd: too few valid draws");
  return std::sqrt(m2 / static_cast<double>(k));
}

double exact_sd(const QuarticProfile<double>& q, double sigma_rho) {
  if (q.a > 0.0) throw DomainError("exact_sd: profile must have a <= 0");
  const double p = RhoScale::from_sigma(sigma_rho).shape_p;
  // density of the scaled Beta(p, p) on (-1, 1)
  const double log_norm = std::lgamma(2.0 * p) - 2.0 * std::lgamma(p) - (2.0 * p - 1.0) * std::log(2.0);
  auto integrand = [&](double r, double rc) {
    // tanh_sinh passes the distance to the nearer endpoint, negative near 0
    const double one_minus_r = rc > 0.0 ? rc : 1.0 - r;
    if (r <= 0.0 || one_minus_r <= 0.0) return 0.0;
    const double log1m = std::log1p(r) + std::log(one_minus_r);  // log(1 - r^2)
    const double n = static_cast<double>(q.n);
    const double g2 = -n * log1m / (std::sqrt(q.b * q.b + 2.0 * q.a * n * log1m) - q.b);
    return g2 * std::exp(log_norm + (p - 1.0) * log1m);
  };
  boost::math::quadrature::tanh_sinh<double> integrator;
  const double half = integrator.integrate(integrand, 0.0, 1.0);
  return std::sqrt(2.0 * half);
}

std::vector<TaylorSdRow> run_taylor_sd(std::uint64_t seed, std::size_t draws,
                                       const std::vector<double>& sigmas_in) {
  const std::vector<double> sigmas =
      sigmas_in.empty() ? std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5, std::sqrt(1.0 / 3.0), 0.7, 0.8}
                        : sigmas_in;
  const auto q = representative_gaussian_profile(seed);
  std::vector<TaylorSdRow> rows;
  for (double s : sigmas) {
    const double mc = monte_carlo_sd(q, s, draws, seed);
    const double ex = exact_sd(q, s);
    for (int order : {1, 3, 5}) {
      TaylorSdRow row;
      row.sigma_rho = s;
      row.order = order;
      TaylorConfig cfg;
      cfg.order = order;
      row.taylor_sd = std::sqrt(implied_slope_variance(q, RhoScale::from_sigma(s), cfg));
      row.mc_sd = mc;
      row.exact_sd = ex;
      row.ratio = row.taylor_sd / mc;
      // sigma whose exact sd matches the Taylor sd; exact_sd increases with sigma
      double lo = 1e-3, hi = 0.999;
      if (exact_sd(q, lo) >= row.taylor_sd) {
        hi = lo;
      } else if (exact_sd(q, hi) <= row.taylor_sd) {
        lo = hi;
      } else {
        for (int it = 0; it < 60; ++it) {
          const double mid = 0.5 * (lo + hi);
          (exact_sd(q, mid) < row.taylor_sd ? lo : hi) = mid;
        }
      }
      row.rho_equiv_sd = 0.5 * (lo + hi);
      row.checked = order == 5 && s <= std::sqrt(1.0 / 3.0) + 1e-12;
      row.pass = !row.checked || (row.ratio >= kTaylorRatioLow && row.ratio <= kTaylorRatioHigh);
      rows.push_back(row);
    }
  }
  return rows;
}

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

std::string format_roundtrip(const std::vector<RoundtripResult>& rows) {
  std::string out =
      "check\tfamily\tn\tpredictors\tcollinearity\teffect\treps\tredraws\tcoefficients\tout_of_domain\t"
      "mean_rel_error\tmax_rel_error\tstatus\n";
  for (const auto& r : rows) {
    out += "roundtrip\t";
    out += family_name(r.cell.family);
    out += "\t" + std::to_string(r.cell.n) + "\t" + std::to_string(r.cell.predictors) + "\t" +
           fmt("%.2f", r.cell.collinearity) + "\t" + r.cell.effect.name + "\t" + std::to_string(r.replications) +
           "\t" + std::to_string(r.redraws) + "\t" + std::to_string(r.coefficients) + "\t" +
           std::to_string(r.domain_failures) + "\t" + fmt("%.6e", r.mean_rel_error) + "\t" +
           fmt("%.6e", r.max_rel_error) + "\t" + (r.pass ? "pass" : "FAIL") + "\n";
  }
  return out;
}

std::string format_taylor_sd(const std::vector<TaylorSdRow>& rows) {
  std::string out = "check\tsigma_rho\torder\ttaylor_sd\tmc_sd\texact_sd\tratio\trho_equiv_sd\tstatus\n";
  for (const auto& r : rows) {
    out += "taylor-sd\t" + fmt("%.6f", r.sigma_rho) + "\t" + std::to_string(r.order) + "\t" +
           fmt("%.6e", r.taylor_sd) + "\t" + fmt("%.6e", r.mc_sd) + "\t" + fmt("%.6e", r.exact_sd) + "\t" +
           fmt("%.6f", r.ratio) + "\t" + fmt("%.6f", r.rho_equiv_sd) + "\t" +
           (r.checked ? (r.pass ? "pass" : "FAIL") : "info") + "\n";
  }
  return out;
}

}  // namespace priorforge
