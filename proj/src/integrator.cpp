#include "ccbe/integrator.hpp"

#include "ccbe/errors.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <optional>

namespace ccbe {

std::string_view to_string(Method m) {
  return m == Method::RK4Fixed ? "rk4" : "rk23";
}

Method parse_method(std::string_view name) {
  if (name == "rk4")
    return Method::RK4Fixed;
  if (name == "rk23")
    return Method::RK23Adaptive;
  throw ConfigurationError("unknown integration method '" + std::string(name) + "' (rk4 or rk23)");
}

void validate(const IntegratorConfig &cfg) {
  if (!(cfg.t_end >= 0.0))
    throw ConfigurationError("t_end must be nonnegative");
  if (!(cfg.save_every > 0.0))
    throw ConfigurationError("save_every must be positive");
  if (cfg.t_end > 0.0 && cfg.save_every > cfg.t_end)
    throw ConfigurationError("save_every must not exceed t_end");
  if (!(cfg.rel_tol > 0.0) || !(cfg.abs_tol > 0.0))
    throw ConfigurationError("tolerances must be positive");
  if (cfg.max_steps == 0)
    throw ConfigurationError("max_steps must be positive");
}

namespace {

using Term = std::pair<double, const Derivative *>;

// y + h * sum_k c_k d_k; nullopt if a density turns negative.
std::optional<State> combine(const State &y, double h, std::initializer_list<Term> terms) {
  State out;
  out.g = y.g;
  out.t = y.t;
  out.lost_mass = y.lost_mass;
  out.subgrid_mass = y.subgrid_mass;
  for (const auto &[c, d] : terms) {
    const double hc = h * c;
    for (std::size_t i = 0; i < out.g.size(); ++i)
      out.g[i] += hc * d->dg[i];
    out.lost_mass += hc * d->dlost;
    out.subgrid_mass += hc * d->dsubgrid;
  }
  for (double v : out.g)
    if (!(v >= 0.0))
      return std::nullopt;
  return out;
}

std::optional<State> rk4_attempt(const State &y, double h, const KernelTables &tables,
                                 const Grid &grid, Execution exec) {
  const auto k1 = rhs(y, tables, grid, exec);
  const auto y2 = combine(y, h, {{0.5, &k1}});
  if (!y2)
    return std::nullopt;
  const auto k2 = rhs(*y2, tables, grid, exec);
  const auto y3 = combine(y, h, {{0.5, &k2}});
  if (!y3)
    return std::nullopt;
  const auto k3 = rhs(*y3, tables, grid, exec);
  const auto y4 = combine(y, h, {{1.0, &k3}});
  if (!y4)
    return std::nullopt;
  const auto k4 = rhs(*y4, tables, grid, exec);
  auto out = combine(y, h, {{1.0 / 6.0, &k1}, {1.0 / 3.0, &k2}, {1.0 / 3.0, &k3}, {1.0 / 6.0, &k4}});
  if (out)
    out->t = y.t + h;
  return out;
}

struct Rk23Result {
  std::optional<State> state;
  double error_norm = 0.0;
};

Rk23Result rk23_attempt(const State &y, double h, const IntegratorConfig &cfg,
                        const KernelTables &tables, const Grid &grid) {
  const auto exec = cfg.execution;
  const auto k1 = rhs(y, tables, grid, exec);
  const auto y2 = combine(y, h, {{0.5, &k1}});
  if (!y2)
    return {};
  const auto k2 = rhs(*y2, tables, grid, exec);
  const auto y3 = combine(y, h, {{0.75, &k2}});
  if (!y3)
    return {};
  const auto k3 = rhs(*y3, tables, grid, exec);
  auto out = combine(y, h, {{2.0 / 9.0, &k1}, {1.0 / 3.0, &k2}, {4.0 / 9.0, &k3}});
  if (!out)
    return {};
  out->t = y.t + h;
  const auto k4 = rhs(*out, tables, grid, exec);

  auto err_of = [&](double a, double b, double c, double d, double y0, double y1) {
    const double e = h * (-5.0 / 72.0 * a + 1.0 / 12.0 * b + 1.0 / 9.0 * c - 1.0 / 8.0 * d);
    return std::abs(e) / (cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y0), std::abs(y1)));
  };
  double norm = 0.0;
  for (std::size_t i = 0; i < y.g.size(); ++i)
    norm = std::max(norm, err_of(k1.dg[i], k2.dg[i], k3.dg[i], k4.dg[i], y.g[i], out->g[i]));
  norm = std::max(norm, err_of(k1.dlost, k2.dlost, k3.dlost, k4.dlost, y.lost_mass, out->lost_mass));
  norm = std::max(norm, err_of(k1.dsubgrid, k2.dsubgrid, k3.dsubgrid, k4.dsubgrid, y.subgrid_mass,
                               out->subgrid_mass));
  return {std::move(out), norm};
}

void note_step(StepStats *stats, double h) {
  if (!stats)
    return;
  ++stats->accepted;
  stats->min_dt = stats->min_dt == 0.0 ? h : std::min(stats->min_dt, h);
}

} // namespace

double default_dt(const State &state, const KernelTables &tables, const Grid &grid) {
  const std::size_t I = grid.size();
  double fastest = 0.0;
  for (std::size_t i = 0; i < I; ++i) {
    double rate = 0.0;
    for (std::size_t j = 0; j < I; ++j)
      rate += tables.phi(i, j) * state.g[j] * grid.width(j);
    fastest = std::max(fastest, rate);
  }
  return fastest > 0.0 ? 0.1 / fastest : 0.0;
}

std::vector<double> save_times(const IntegratorConfig &cfg) {
  std::vector<double> times{0.0};
  if (cfg.t_end <= 0.0)
    return times;
  const auto count = static_cast<std::size_t>(std::floor(cfg.t_end / cfg.save_every + 1e-9));
  for (std::size_t k = 1; k <= count; ++k) {
    const double t = static_cast<double>(k) * cfg.save_every;
    if (t < cfg.t_end * (1.0 - 1e-12))
      times.push_back(t);
  }
  times.push_back(cfg.t_end);
  return times;
}

State step(const State &state, double dt, const KernelTables &tables, const Grid &grid,
           double dt_min, Execution exec, StepStats *stats) {
  if (!(dt > 0.0))
    throw ConfigurationError("step needs dt > 0");
  if (auto out = rk4_attempt(state, dt, tables, grid, exec)) {
    note_step(stats, dt);
    return std::move(*out);
  }
  if (stats)
    ++stats->rejected;
  const double half = 0.5 * dt;
  if (half < dt_min)
    throw IntegrationFailure("step size underflow at t = " + std::to_string(state.t) +
                                 " (negative density persists down to dt = " + std::to_string(half) + ")",
                             Trajectory{{state}, stats ? *stats : StepStats{}});
  auto mid = step(state, half, tables, grid, dt_min, exec, stats);
  auto out = step(mid, half, tables, grid, dt_min, exec, stats);
  out.t = state.t + dt;
  return out;
}

Trajectory integrate(const State &initial, const IntegratorConfig &cfg, const KernelTables &tables,
                     const Grid &grid) {
  validate(cfg);
  for (double v : initial.g)
    if (!(v >= 0.0))
      throw ContractViolation("initial density must be nonnegative");

  Trajectory traj;
  traj.states.push_back(initial);
  traj.states.back().t = 0.0;
  const auto times = save_times(cfg);
  if (times.size() == 1)
    return traj;

  double dt = cfg.dt_init > 0.0 ? cfg.dt_init : default_dt(initial, tables, grid);
  if (!(dt > 0.0))
    dt = cfg.save_every;
  traj.stats.dt_init = dt;
  const double dt_min = dt * std::ldexp(1.0, -20);

  State y = traj.states.back();
  auto over_budget = [&] { return traj.stats.accepted + traj.stats.rejected > cfg.max_steps; };

  try {
    for (std::size_t k = 1; k < times.size(); ++k) {
      const double target = times[k];
      if (cfg.method == Method::RK4Fixed) {
        const double span = target - y.t;
        const auto substeps = static_cast<std::size_t>(std::max(1.0, std::ceil(span / dt - 1e-9)));
        const double h = span / static_cast<double>(substeps);
        for (std::size_t s = 0; s < substeps; ++s) {
          y = step(y, h, tables, grid, dt_min, cfg.execution, &traj.stats);
          if (over_budget())
            throw IntegrationFailure("max_steps exceeded at t = " + std::to_string(y.t), traj);
        }
      } else {
        while (target - y.t > 1e-14 * std::max(1.0, target)) {
          const double h = std::min(dt, target - y.t);
          auto res = rk23_attempt(y, h, cfg, tables, grid);
          if (res.state && res.error_norm <= 1.0) {
            y = std::move(*res.state);
            note_step(&traj.stats, h);
            const double grow = res.error_norm > 0.0 ? 0.9 * std::pow(res.error_norm, -1.0 / 3.0) : 5.0;
            // a step clipped to a save time does not shrink the nominal dt
            if (h == dt || grow < 1.0)
              dt = h * std::clamp(grow, 0.2, 5.0);
          } else {
            ++traj.stats.rejected;
            dt = res.state ? h * std::clamp(0.9 * std::pow(res.error_norm, -1.0 / 3.0), 0.2, 0.5)
                           : 0.5 * h;
            if (dt < dt_min)
              throw IntegrationFailure("step size underflow at t = " + std::to_string(y.t), traj);
          }
          if (over_budget())
            throw IntegrationFailure("max_steps exceeded at t = " + std::to_string(y.t), traj);
        }
      }
      y.t = target;
      traj.states.push_back(y);
    }
  } catch (const IntegrationFailure &e) {
    throw IntegrationFailure(e.what(), traj);
  }
  return traj;
}

} // namespace ccbe
