#include "ccbe/run.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>

namespace ccbe {

namespace {

using nlohmann::json;

// JSON has no infinities; the convex-moment bound overflows for realistic T.
json number(double x) {
  if (std::isfinite(x))
    return x;
  return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
}

std::ofstream open_out(const std::filesystem::path &file) {
  std::ofstream out(file);
  if (!out)
    throw ConfigurationError("cannot write '" + file.string() + "'");
  return out;
}

std::string time_tag(double t) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", t);
  return buf;
}

json to_json(const AdmissibilityReport &r) {
  return json{{"eta_2alpha", number(r.eta_2alpha)},
              {"t_n", number(r.t_n)},
              {"e_threshold", number(r.e_threshold)},
              {"k_envelope", number(r.k_envelope)},
              {"passes_A1", r.passes_A1},
              {"passes_A2", r.passes_A2},
              {"passes_A3", r.passes_A3},
              {"passes_A4", r.passes_A4},
              {"a4_evaluated", r.a4_evaluated},
              {"a1_worst_ratio", number(r.a1_worst_ratio)},
              {"a2_worst_margin", number(r.a2_worst_margin)},
              {"failures", r.failures},
              {"admissible", r.admissible()}};
}

} // namespace

RunResult simulate(const Scenario &s) {
  validate(s);
  RunResult r;
  r.admissibility = admissibility(s);
  r.grid = build_grid(s.n, s.cells, s.resolved_v_min());
  const auto trunc = s.truncation();
  const auto tables = build_tables(r.grid, trunc, s.kernel, s.efficiency, s.daughter);
  const auto initial = make_initial_state(s, r.grid, &r.initial_truncation);

  try {
    r.trajectory = integrate(initial, s.integrator, tables, r.grid);
  } catch (const IntegrationFailure &e) {
    r.trajectory = e.partial();
    r.failure = e.what();
    r.exit_code = kIntegrationFailure;
  }

  const double alpha = s.kernel.alpha;
  r.moments = moment_series(r.trajectory, r.grid, alpha);
  const auto &m0 = r.moments.front();
  r.bounds = gronwall_bounds(s.kernel, s.daughter, m0.m1, m0.m_neg2alpha + m0.m1, s.integrator.t_end);
  check_bounds(r.bounds, r.trajectory, r.grid, alpha);

  for (const auto &st : r.trajectory.states)
    if (std::any_of(st.g.begin(), st.g.end(), [](double v) { return !(v >= 0.0); })) {
      r.violations.push_back("negative density at t = " + format_double(st.t));
      break;
    }
  double worst_balance = 0.0;
  for (const auto &row : r.moments)
    worst_balance = std::max(worst_balance, row.balance_residual);
  if (worst_balance > s.balance_tolerance)
    r.violations.push_back("mass balance residual " + format_double(worst_balance) + " exceeds " +
                           format_double(s.balance_tolerance));
  if (s.tau == 1 && std::any_of(r.moments.begin(), r.moments.end(),
                                [](const MomentRow &row) { return row.lost_mass != 0.0; }))
    r.violations.push_back("conservative truncation lost mass");
  if (s.check_bounds && !r.bounds.satisfied)
    r.violations.push_back("weighted moment " + format_double(r.bounds.observed_sup) +
                           " exceeds the bound B(T) = " + format_double(r.bounds.B_T));

  std::vector<TestFunction> family;
  for (const auto &name : s.weak_tests)
    family.push_back(TestFunction::parse(name));
  if (r.trajectory.states.size() >= 3) {
    for (const auto &h : family) {
      WeakCheck w;
      w.test = h.name();
      w.discrete = weak_residual(r.trajectory, tables, r.grid, h, WeakForm::Discrete);
      w.continuous = weak_residual(r.trajectory, tables, r.grid, h, WeakForm::Continuous);
      r.weak.push_back(w);
    }
  }
  if (r.trajectory.states.size() >= 2 && r.bounds.Theta > 0.0)
    r.equicontinuity = equicontinuity_ratio(r.trajectory, r.grid, alpha, 1.0, r.bounds.Theta, family);

  if (r.exit_code == kSuccess && !r.violations.empty())
    r.exit_code = kInvariantViolation;
  return r;
}

std::filesystem::path output_directory(const Scenario &s) {
  if (const char *root = std::getenv("CCBE_OUTPUT_ROOT"); root && *root)
    return std::filesystem::path(root) / s.output_dir;
  return s.output_dir;
}

void write_outputs(const Scenario &s, const RunResult &r, const std::filesystem::path &dir) {
  std::filesystem::create_directories(dir);

  {
    auto out = open_out(dir / "scenario.txt");
    out << emit_scenario(s);
  }
  {
    auto out = open_out(dir / "grid.csv");
    out << "index,lower,upper,rep,width\n";
    for (std::size_t i = 0; i < r.grid.size(); ++i)
      out << i << ',' << format_double(r.grid.lower(i)) << ',' << format_double(r.grid.upper(i)) << ','
          << format_double(r.grid.rep(i)) << ',' << format_double(r.grid.width(i)) << '\n';
  }
  {
    auto out = open_out(dir / "moments.csv");
    out << "t,M_neg2alpha,M_negalpha,M0,M1,M2,lost_mass,subgrid_mass,balance_residual,convex_moment\n";
    for (const auto &m : r.moments)
      out << format_double(m.t) << ',' << format_double(m.m_neg2alpha) << ',' << format_double(m.m_negalpha)
          << ',' << format_double(m.m0) << ',' << format_double(m.m1) << ',' << format_double(m.m2) << ','
          << format_double(m.lost_mass) << ',' << format_double(m.subgrid_mass) << ','
          << format_double(m.balance_residual) << ',' << format_double(m.convex_moment) << '\n';
  }
  if (s.write_density) {
    for (const auto &st : r.trajectory.states) {
      auto out = open_out(dir / ("density_" + time_tag(st.t) + ".csv"));
      out << "index,rep,g\n";
      for (std::size_t i = 0; i < st.g.size(); ++i)
        out << i << ',' << format_double(r.grid.rep(i)) << ',' << format_double(st.g[i]) << '\n';
    }
  }
  {
    const auto &b = r.bounds;
    json weak = json::array();
    for (const auto &w : r.weak)
      weak.push_back({{"test", w.test},
                      {"discrete", {{"lhs", number(w.discrete.lhs)}, {"rhs", number(w.discrete.rhs)},
                                    {"residual", number(w.discrete.residual)}}},
                      {"continuous", {{"lhs", number(w.continuous.lhs)}, {"rhs", number(w.continuous.rhs)},
                                      {"residual", number(w.continuous.residual)}}}});
    json j{{"k_envelope", number(b.k)},
           {"eta_2alpha", number(b.eta)},
           {"N1_in", number(b.n1_in)},
           {"norm_in", number(b.norm_in)},
           {"T", number(b.horizon)},
           {"a", number(b.a)},
           {"b", number(b.b)},
           {"B1_T", number(b.B1_T)},
           {"B_T", number(b.B_T)},
           {"G_T", number(b.G_T)},
           {"Theta", number(b.Theta)},
           {"lambda", number(b.lambda)},
           {"observed_sup", number(b.observed_sup)},
           {"observed_convex_sup", number(b.observed_convex_sup)},
           {"satisfied", b.satisfied},
           {"equicontinuity_ratio", number(r.equicontinuity)},
           {"initial_number_below_vmin", number(r.initial_truncation.number_below_vmin)},
           {"initial_mass_below_vmin", number(r.initial_truncation.mass_below_vmin)},
           {"steps_accepted", r.trajectory.stats.accepted},
           {"steps_rejected", r.trajectory.stats.rejected},
           {"dt_init", number(r.trajectory.stats.dt_init)},
           {"weak_residuals", weak},
           {"violations", r.violations},
           {"failure", r.failure},
           {"exit_code", r.exit_code}};
    auto out = open_out(dir / "bounds.json");
    out << j.dump(2) << '\n';
  }
  {
    auto out = open_out(dir / "admissibility.json");
    out << to_json(r.admissibility).dump(2) << '\n';
  }
}

RunResult run(const Scenario &s) {
  auto r = simulate(s);
  write_outputs(s, r, output_directory(s));
  return r;
}

ConvergenceStudy convergence_study(const Scenario &base, const std::vector<double> &n_list) {
  if (n_list.size() < 3)
    throw ConfigurationError("convergence study needs at least three truncation sizes");
  if (!std::is_sorted(n_list.begin(), n_list.end()))
    throw ConfigurationError("truncation sizes must be increasing");

  struct Job {
    double n;
    int tau;
    Scenario scenario;
    Grid grid;
    Trajectory traj;
    std::exception_ptr error;
  };
  std::vector<Job> jobs;
  for (double n : n_list)
    for (int tau : {0, 1}) {
      Scenario s = base;
      s.n = n;
      s.tau = tau;
      s.write_density = false;
      jobs.push_back({n, tau, s, {}, {}, nullptr});
    }

  // independent runs; nothing is shared
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < static_cast<int>(jobs.size()); ++k) {
    auto &job = jobs[static_cast<std::size_t>(k)];
    try {
      validate(job.scenario);
      job.grid = build_grid(job.scenario.n, job.scenario.cells, job.scenario.resolved_v_min());
      const auto tables = build_tables(job.grid, job.scenario.truncation(), job.scenario.kernel,
                                       job.scenario.efficiency, job.scenario.daughter);
      job.traj = integrate(make_initial_state(job.scenario, job.grid), job.scenario.integrator, tables,
                           job.grid);
    } catch (...) {
      job.error = std::current_exception();
    }
  }
  for (const auto &job : jobs)
    if (job.error)
      std::rethrow_exception(job.error);

  auto find = [&](std::size_t idx, int tau) -> const Job & { return jobs[2 * idx + (tau == 1 ? 1 : 0)]; };
  std::vector<TestFunction> family;
  for (const auto &name : base.weak_tests)
    family.push_back(TestFunction::parse(name));
  const double alpha = base.kernel.alpha;

  ConvergenceStudy study;
  for (int tau : {0, 1})
    for (std::size_t k = 0; k + 1 < n_list.size(); ++k) {
      const auto &a = find(k, tau);
      const auto &b = find(k + 1, tau);
      ConvergenceRow row;
      row.kind = ConvergenceRow::Kind::Pair;
      row.tau = tau;
      row.n_a = a.n;
      row.n_b = b.n;
      row.sup_metric = convergence_metric(a.traj, a.grid, b.traj, b.grid, alpha, family);
      row.final_distance =
          state_distance(a.traj.states.back(), a.grid, b.traj.states.back(), b.grid, alpha, family);
      study.rows.push_back(row);
    }
  for (std::size_t k = 0; k < n_list.size(); ++k) {
    const auto &a = find(k, 0);
    const auto &b = find(k, 1);
    ConvergenceRow row;
    row.kind = ConvergenceRow::Kind::Cross;
    row.tau = -1;
    row.n_a = row.n_b = a.n;
    row.sup_metric = convergence_metric(a.traj, a.grid, b.traj, b.grid, alpha, family);
    row.final_distance =
        state_distance(a.traj.states.back(), a.grid, b.traj.states.back(), b.grid, alpha, family);
    study.rows.push_back(row);
  }
  return study;
}

void write_convergence_csv(const ConvergenceStudy &study, const std::filesystem::path &file) {
  if (file.has_parent_path())
    std::filesystem::create_directories(file.parent_path());
  auto out = open_out(file);
  out << "kind,tau,n_a,n_b,sup_metric,final_distance\n";
  for (const auto &r : study.rows) {
    out << (r.kind == ConvergenceRow::Kind::Pair ? "pair" : "cross") << ',';
    if (r.kind == ConvergenceRow::Kind::Pair)
      out << r.tau;
    else
      out << "both";
    out << ',' << format_double(r.n_a) << ',' << format_double(r.n_b) << ',' << format_double(r.sup_metric)
        << ',' << format_double(r.final_distance) << '\n';
  }
}

} // namespace ccbe
