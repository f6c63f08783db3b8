#include "ccbe/scenario.hpp"

#include "ccbe/diagnostics.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace ccbe {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(std::string_view key, std::string_view text) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ConfigurationError("key '" + std::string(key) + "': expected a number, got '" +
                             std::string(text) + "'");
  return v;
}

std::size_t to_size(std::string_view key, std::string_view text) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ConfigurationError("key '" + std::string(key) + "': expected a nonnegative integer, got '" +
                             std::string(text) + "'");
  return v;
}

bool to_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "yes")
    return true;
  if (text == "false" || text == "0" || text == "no")
    return false;
  throw ConfigurationError("key '" + std::string(key) + "': expected true/false");
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto pos = text.find(sep, start);
    const auto piece = trim(text.substr(start, pos == std::string_view::npos ? std::string_view::npos
                                                                              : pos - start));
    if (!piece.empty())
      out.emplace_back(piece);
    if (pos == std::string_view::npos)
      break;
    start = pos + 1;
  }
  return out;
}

std::string join(const std::vector<std::string> &items, const char *sep) {
  std::string out;
  for (const auto &s : items) {
    if (!out.empty())
      out += sep;
    out += s;
  }
  return out;
}

void apply(Scenario &s, std::string_view key, std::string_view value) {
  if (key == "kernel")
    s.kernel.family = parse_kernel_family(value);
  else if (key == "k")
    s.kernel.k = to_double(key, value);
  else if (key == "alpha")
    s.kernel.alpha = to_double(key, value);
  else if (key == "efficiency")
    s.efficiency = parse_efficiency(value);
  else if (key == "theta")
    s.daughter.theta = to_double(key, value);
  else if (key == "initial")
    s.initial = parse_initial_condition(value);
  else if (key == "n")
    s.n = to_double(key, value);
  else if (key == "cells")
    s.cells = to_size(key, value);
  else if (key == "v_min")
    s.v_min = to_double(key, value);
  else if (key == "tau") {
    const auto t = to_size(key, value);
    if (t > 1)
      throw ConfigurationError("tau must be 0 or 1");
    s.tau = static_cast<int>(t);
  } else if (key == "method")
    s.integrator.method = parse_method(value);
  else if (key == "dt_init")
    s.integrator.dt_init = to_double(key, value);
  else if (key == "rel_tol")
    s.integrator.rel_tol = to_double(key, value);
  else if (key == "abs_tol")
    s.integrator.abs_tol = to_double(key, value);
  else if (key == "t_end")
    s.integrator.t_end = to_double(key, value);
  else if (key == "save_every")
    s.integrator.save_every = to_double(key, value);
  else if (key == "max_steps")
    s.integrator.max_steps = to_size(key, value);
  else if (key == "execution") {
    if (value == "serial")
      s.integrator.execution = Execution::Serial;
    else if (value == "parallel")
      s.integrator.execution = Execution::Parallel;
    else
      throw ConfigurationError("execution must be serial or parallel");
  } else if (key == "output_dir")
    s.output_dir = std::string(value);
  else if (key == "write_density")
    s.write_density = to_bool(key, value);
  else if (key == "check_bounds")
    s.check_bounds = to_bool(key, value);
  else if (key == "weak_tests") {
    s.weak_tests = split(value, ';');
    for (const auto &t : s.weak_tests)
      (void)TestFunction::parse(t);
  } else if (key == "balance_tolerance")
    s.balance_tolerance = to_double(key, value);
  else
    throw ConfigurationError("unknown key '" + std::string(key) + "'");
}

std::pair<std::string, std::string> split_assignment(std::string_view line, std::string_view where) {
  const auto eq = line.find('=');
  if (eq == std::string_view::npos)
    throw ConfigurationError(std::string(where) + ": expected 'key = value', got '" + std::string(line) + "'");
  const auto key = trim(line.substr(0, eq));
  const auto value = trim(line.substr(eq + 1));
  if (key.empty() || value.empty())
    throw ConfigurationError(std::string(where) + ": empty key or value in '" + std::string(line) + "'");
  return {std::string(key), std::string(value)};
}

} // namespace

std::string to_string(const InitialCondition &ic) {
  switch (ic.kind) {
  case InitialCondition::Kind::Exponential:
    return "exponential:" + format_double(ic.c) + "," + format_double(ic.mu);
  case InitialCondition::Kind::Pulse:
    return "pulse:" + std::to_string(ic.cell) + "," + format_double(ic.value);
  case InitialCondition::Kind::Table:
    return "table:" + ic.table;
  }
  return {};
}

InitialCondition parse_initial_condition(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos)
    throw ConfigurationError("initial must be exponential:<c>,<mu>, pulse:<cell>,<density> or table:<path>");
  const auto kind = text.substr(0, colon);
  const auto args = text.substr(colon + 1);
  InitialCondition ic;
  if (kind == "table") {
    ic.kind = InitialCondition::Kind::Table;
    ic.table = std::string(trim(args));
    if (ic.table.empty())
      throw ConfigurationError("table initial condition needs a path");
    return ic;
  }
  const auto parts = split(args, ',');
  if (parts.size() != 2)
    throw ConfigurationError("initial '" + std::string(text) + "' needs two comma-separated values");
  if (kind == "exponential") {
    ic.kind = InitialCondition::Kind::Exponential;
    ic.c = to_double("initial", parts[0]);
    ic.mu = to_double("initial", parts[1]);
    if (!(ic.c >= 0.0) || !(ic.mu > 0.0))
      throw ConfigurationError("exponential initial data needs c >= 0 and mu > 0");
  } else if (kind == "pulse") {
    ic.kind = InitialCondition::Kind::Pulse;
    ic.cell = to_size("initial", parts[0]);
    ic.value = to_double("initial", parts[1]);
    if (!(ic.value >= 0.0))
      throw ConfigurationError("pulse density must be nonnegative");
  } else {
    throw ConfigurationError("unknown initial condition '" + std::string(kind) + "'");
  }
  return ic;
}

Scenario parse_scenario_text(std::string_view text, const std::vector<std::string> &overrides) {
  Scenario s;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty())
      continue;
    auto [key, value] = split_assignment(line, "line " + std::to_string(lineno));
    if (!seen.insert(key).second)
      throw ConfigurationError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    apply(s, key, value);
  }
  for (const char *required : {"kernel", "n"})
    if (!seen.contains(required))
      throw ConfigurationError(std::string("missing required key '") + required + "'");
  for (const auto &o : overrides) {
    auto [key, value] = split_assignment(o, "override");
    apply(s, key, value);
  }
  return s;
}

Scenario parse_scenario(const std::filesystem::path &path, const std::vector<std::string> &overrides) {
  std::ifstream in(path);
  if (!in)
    throw ConfigurationError("cannot open scenario file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  auto s = parse_scenario_text(buf.str(), overrides);
  // table paths are relative to the scenario file
  if (s.initial.kind == InitialCondition::Kind::Table) {
    std::filesystem::path p(s.initial.table);
    if (p.is_relative())
      s.initial.table = (path.parent_path() / p).string();
  }
  validate(s);
  return s;
}

std::string emit_scenario(const Scenario &s) {
  std::ostringstream os;
  os << "kernel = " << to_string(s.kernel.family) << '\n';
  os << "k = " << format_double(s.kernel.k) << '\n';
  os << "alpha = " << format_double(s.kernel.alpha) << '\n';
  os << "efficiency = " << to_string(s.efficiency) << '\n';
  os << "theta = " << format_double(s.daughter.theta) << '\n';
  os << "initial = " << to_string(s.initial) << '\n';
  os << "n = " << format_double(s.n) << '\n';
  os << "cells = " << s.cells << '\n';
  if (s.v_min)
    os << "v_min = " << format_double(*s.v_min) << '\n';
  os << "tau = " << s.tau << '\n';
  os << "method = " << to_string(s.integrator.method) << '\n';
  os << "dt_init = " << format_double(s.integrator.dt_init) << '\n';
  os << "rel_tol = " << format_double(s.integrator.rel_tol) << '\n';
  os << "abs_tol = " << format_double(s.integrator.abs_tol) << '\n';
  os << "t_end = " << format_double(s.integrator.t_end) << '\n';
  os << "save_every = " << format_double(s.integrator.save_every) << '\n';
  os << "max_steps = " << s.integrator.max_steps << '\n';
  os << "execution = " << (s.integrator.execution == Execution::Parallel ? "parallel" : "serial") << '\n';
  os << "output_dir = " << s.output_dir << '\n';
  os << "write_density = " << (s.write_density ? "true" : "false") << '\n';
  os << "check_bounds = " << (s.check_bounds ? "true" : "false") << '\n';
  os << "weak_tests = " << join(s.weak_tests, ";") << '\n';
  os << "balance_tolerance = " << format_double(s.balance_tolerance) << '\n';
  return os.str();
}

State make_initial_state(const Scenario &s, const Grid &grid, InitialTruncation *note) {
  State st;
  st.g.assign(grid.size(), 0.0);
  InitialTruncation trunc;
  switch (s.initial.kind) {
  case InitialCondition::Kind::Exponential: {
    const double c = s.initial.c, mu = s.initial.mu;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      // exact cell average of c exp(-v/mu)
      const double num = c * mu * (std::exp(-grid.lower(i) / mu) - std::exp(-grid.upper(i) / mu));
      st.g[i] = num / grid.width(i);
    }
    const double x = grid.v_min() / mu;
    trunc.number_below_vmin = c * mu * -std::expm1(-x);
    trunc.mass_below_vmin = c * mu * mu * (-std::expm1(-x) - x * std::exp(-x));
    break;
  }
  case InitialCondition::Kind::Pulse:
    if (s.initial.cell >= grid.size())
      throw ConfigurationError("pulse cell " + std::to_string(s.initial.cell) + " outside the grid");
    st.g[s.initial.cell] = s.initial.value;
    break;
  case InitialCondition::Kind::Table: {
    std::ifstream in(s.initial.table);
    if (!in)
      throw ConfigurationError("cannot open initial table '" + s.initial.table + "'");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto t = trim(line);
      if (t.empty() || t.starts_with('#') || t.starts_with("index"))
        continue;
      const auto parts = split(t, ',');
      if (parts.size() != 2)
        throw ConfigurationError("initial table line " + std::to_string(lineno) + ": expected index,g");
      const auto idx = to_size("initial table", parts[0]);
      const double g = to_double("initial table", parts[1]);
      if (idx >= grid.size())
        throw ConfigurationError("initial table index " + std::to_string(idx) + " outside the grid");
      if (!(g >= 0.0))
        throw ConfigurationError("initial table density must be nonnegative");
      st.g[idx] = g;
    }
    break;
  }
  }
  if (note)
    *note = trunc;
  return st;
}

AdmissibilityReport admissibility(const Scenario &s) {
  auto report = check_admissibility(s.kernel, s.efficiency, s.daughter);
  if (s.cells >= 8 && s.resolved_v_min() > 0.0 && s.resolved_v_min() < s.n) {
    const auto grid = build_grid(s.n, s.cells, s.resolved_v_min());
    const auto init = make_initial_state(s, grid);
    const auto row = moments(init, grid, s.kernel.alpha);
    check_initial_data(report, row.m1, row.m_neg2alpha);
  }
  return report;
}

void validate(const Scenario &s) {
  validate(s.truncation());
  validate(s.integrator);
  (void)build_grid(s.n, s.cells, s.resolved_v_min());
  for (const auto &t : s.weak_tests)
    (void)TestFunction::parse(t);
  const auto report = admissibility(s);
  if (!report.admissible())
    throw InadmissibleScenario("inadmissible parameters: " + join(report.failures, "; "), report);
}

} // namespace ccbe
