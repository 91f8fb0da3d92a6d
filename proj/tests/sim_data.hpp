#ifndef PRIORFORGE_TESTS_SIM_DATA_HPP
#define PRIORFORGE_TESTS_SIM_DATA_HPP

// Seeded tables for prior tests: numeric x1, x2, categorical g (3 levels),
// grouping column site (6 levels) and a response of the requested family.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "priorforge/csv.hpp"
#include "priorforge/glm.hpp"

namespace priorforge::testing {

struct SimTableOptions {
  int n = 150;
  double x1_shift = 0.0;
  double x1_scale = 1.0;
  double y_shift = 0.0;  // gaussian only
  double y_scale = 1.0;  // gaussian only
  bool center = false;   // center x1 and x2 exactly
};

inline Table sim_table(Family family, std::uint64_t seed, const SimTableOptions& o = {}) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  const int n = o.n;
  std::vector<double> x1(n), x2(n), y(n);
  std::vector<std::string> g(n), site(n);
  const char* levels[] = {"lo", "mid", "hi"};
  for (int i = 0; i < n; ++i) {
    x1[i] = z(rng);
    x2[i] = 0.4 * x1[i] + z(rng);
    g[i] = levels[i % 3];
    site[i] = "s" + std::to_string(i % 6);
  }
  if (o.center) {
    for (auto* v : {&x1, &x2}) {
      double m = 0;
      for (double e : *v) m += e;
      m /= n;
      for (double& e : *v) e -= m;
    }
  }
  for (int i = 0; i < n; ++i) {
    const double eta = 0.2 + 0.35 * x1[i] - 0.25 * x2[i] + (i % 3 == 2 ? 0.3 : 0.0);
    switch (family) {
      case Family::gaussian: y[i] = o.y_shift + o.y_scale * (eta + z(rng)); break;
      case Family::binomial: y[i] = std::bernoulli_distribution(1.0 / (1.0 + std::exp(-eta)))(rng); break;
      case Family::poisson: y[i] = std::poisson_distribution<int>(std::exp(eta))(rng); break;
    }
    x1[i] = o.x1_shift + o.x1_scale * x1[i];
  }
  Table t = Table::from_numeric({{"y", y}, {"x1", x1}, {"x2", x2}});
  t.add_column("g", g);
  t.add_column("site", site);
  return t;
}

}  // namespace priorforge::testing

#endif  // PRIORFORGE_TESTS_SIM_DATA_HPP
