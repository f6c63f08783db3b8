// Shared test helpers: an independent quadrature oracle and a small problem builder.
#ifndef CCBE_TESTS_SUPPORT_HPP_
#define CCBE_TESTS_SUPPORT_HPP_

#include "ccbe/operators.hpp"
#include "ccbe/scenario.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace ccbe::testing {

/// Tanh-sinh quadrature on (a, b); copes with integrable endpoint singularities
/// down to about v^-0.95 (weaker decay leaves mass below the smallest double).
template <class F> double quad(F f, double a, double b) {
  static boost::math::quadrature::tanh_sinh<double> integrator(15);
  return integrator.integrate(f, a, b, 1e-14);
}

inline double rel_err(double got, double want) {
  const double scale = std::max(std::abs(want), 1e-300);
  return std::abs(got - want) / scale;
}

struct Problem {
  Scenario scenario;
  Grid grid;
  KernelTables tables;
  State state;
};

/// Scenario text in which a repeated key overrides the earlier line.
inline Scenario layered_scenario(const std::string &text) {
  std::istringstream in(text);
  std::string line, base;
  std::vector<std::string> overrides;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    std::string key = eq == std::string::npos ? line : line.substr(0, eq);
    key.erase(0, key.find_first_not_of(" \t"));
    key.erase(key.find_last_not_of(" \t") + 1);
    if (eq != std::string::npos && !seen.insert(key).second)
      overrides.push_back(line);
    else
      base += line + "\n";
  }
  return parse_scenario_text(base, overrides);
}

/// Builds grid, tables and initial state from scenario text (no file I/O).
inline Problem make_problem(const std::string &text, Gate gate = Gate::Enforce) {
  Problem p;
  p.scenario = layered_scenario(text);
  const auto &s = p.scenario;
  p.grid = build_grid(s.n, s.cells, s.resolved_v_min());
  p.tables = build_tables(p.grid, s.truncation(), s.kernel, s.efficiency, s.daughter, gate);
  p.state = make_initial_state(s, p.grid);
  return p;
}

} // namespace ccbe::testing

#endif // CCBE_TESTS_SUPPORT_HPP_
