#include "ccbe/diagnostics.hpp"

#include "ccbe/errors.hpp"
#include "ccbe/summation.hpp"

#include <algorithm>
#include <cmath>

namespace ccbe {

MomentRow moments(const State &state, const Grid &grid, double alpha) {
  MomentRow row;
  row.t = state.t;
  CompensatedSum mneg2, mneg, m0, m1, m2, conv;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double g = state.g[i];
    if (g == 0.0)
      continue;
    mneg2.add(g * grid.cell_weight_integral(i, -2.0 * alpha));
    mneg.add(g * grid.cell_weight_integral(i, -alpha));
    m0.add(g * grid.cell_weight_integral(i, 0.0));
    m1.add(g * grid.cell_weight_integral(i, 1.0));
    m2.add(g * grid.cell_weight_integral(i, 2.0));
    conv.add(g * grid.cell_weight_integral(i, 1.5));
  }
  row.m_neg2alpha = mneg2.value();
  row.m_negalpha = mneg.value();
  row.m0 = m0.value();
  row.m1 = m1.value();
  row.m2 = m2.value();
  row.convex_moment = conv.value();
  row.lost_mass = state.lost_mass;
  row.subgrid_mass = state.subgrid_mass;
  return row;
}

std::vector<MomentRow> moment_series(const Trajectory &traj, const Grid &grid, double alpha) {
  std::vector<MomentRow> rows;
  rows.reserve(traj.states.size());
  for (const auto &s : traj.states)
    rows.push_back(moments(s, grid, alpha));
  if (rows.empty())
    return rows;
  const double m1_0 = rows.front().m1 + rows.front().lost_mass + rows.front().subgrid_mass;
  for (auto &r : rows) {
    const double drift = std::abs(r.m1 + r.lost_mass + r.subgrid_mass - m1_0);
    r.balance_residual = m1_0 > 0.0 ? drift / m1_0 : drift;
  }
  return rows;
}

double weighted_norm(const State &state, const Grid &grid, double alpha) {
  const auto row = moments(state, grid, alpha);
  return row.m_neg2alpha + row.m1;
}

double convex_weight(double v) { return v * std::sqrt(v); }

double convex_moment(const State &state, const Grid &grid) {
  CompensatedSum s;
  for (std::size_t i = 0; i < grid.size(); ++i)
    s.add(state.g[i] * grid.cell_weight_integral(i, 1.5));
  return s.value();
}

double convex_bound(double k, double B, double upsilon1, double horizon) {
  return (upsilon1 + 48.0 * k * convex_weight(1.0) * B * B * horizon) * std::exp(40.0 * k * B * horizon);
}

double equicontinuity_constant(double k, double alpha, double theta, double lambda, double B) {
  return 0.5 * k * (3.0 * (1.0 + lambda) + 13.0 * (theta + 2.0) / (theta + 1.0 - alpha)) * B * B;
}

BoundReport gronwall_bounds(const KernelSpec &kernel, const DaughterSpec &daughter, double n1_in,
                            double norm_in, double horizon, double lambda) {
  BoundReport r;
  r.k = envelope_constant(kernel);
  r.eta = compute_eta(daughter, kernel.alpha);
  r.n1_in = n1_in;
  r.norm_in = norm_in;
  r.horizon = horizon;
  r.lambda = lambda;
  r.a = 4.0 * r.k * n1_in * (1.0 + r.eta);
  r.b = 2.0 * r.k * n1_in * n1_in * (2.0 + r.eta);
  const double growth = std::exp(r.a * horizon);
  // b/a (e^{aT} - 1) -> b T as a -> 0
  const double forcing = r.a > 0.0 ? r.b / r.a * std::expm1(r.a * horizon) : r.b * horizon;
  r.B1_T = growth * norm_in + forcing;
  r.B_T = r.B1_T + n1_in;
  r.Theta = equicontinuity_constant(r.k, kernel.alpha, daughter.theta, lambda, r.B_T);
  return r;
}

void check_bounds(BoundReport &report, const Trajectory &traj, const Grid &grid, double alpha) {
  double sup = 0.0, convex_sup = 0.0;
  for (const auto &s : traj.states) {
    sup = std::max(sup, weighted_norm(s, grid, alpha));
    convex_sup = std::max(convex_sup, convex_moment(s, grid));
  }
  report.observed_sup = sup;
  report.observed_convex_sup = convex_sup;
  const double upsilon1 = traj.states.empty() ? 0.0 : convex_moment(traj.states.front(), grid);
  report.G_T = convex_bound(report.k, report.B_T, upsilon1, report.horizon);
  report.satisfied = sup <= report.B_T;
}

WeakResidual weak_residual(const Trajectory &traj, const KernelTables &tables, const Grid &grid,
                           const TestFunction &h, WeakForm form) {
  if (traj.states.size() < 3)
    throw ConfigurationError("weak residual needs at least three saved states");
  const auto &first = traj.states.front();
  const auto &last = traj.states.back();
  CompensatedSum lhs;
  for (std::size_t i = 0; i < grid.size(); ++i)
    lhs.add((last.g[i] - first.g[i]) * h.integral(grid.lower(i), grid.upper(i)));

  WeakResidual out;
  out.lhs = lhs.value();
  out.rhs = weak_form_rhs(traj.states, tables, grid, h, form);
  const double m1_in = grid_mass(first.g, grid) + first.lost_mass + first.subgrid_mass;
  const double scale = std::max({std::abs(out.lhs), std::abs(out.rhs), m1_in});
  out.residual = scale > 0.0 ? std::abs(out.lhs - out.rhs) / scale : 0.0;
  return out;
}

double weighted_pairing(std::span<const double> g, const Grid &grid, const TestFunction &h, double p,
                        double lo, double hi) {
  CompensatedSum s;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (g[i] == 0.0)
      continue;
    const double a = std::max(grid.lower(i), lo);
    const double b = std::min(grid.upper(i), hi);
    if (a < b)
      s.add(g[i] * h.weighted_integral(a, b, p));
  }
  return s.value();
}

namespace {

double metric_pairing(const State &s, const Grid &grid, const TestFunction &h, double alpha) {
  return weighted_pairing(s.g, grid, h, -alpha, 0.0, grid.n()) +
         weighted_pairing(s.g, grid, h, 1.0, 0.0, grid.n());
}

} // namespace

double state_distance(const State &a, const Grid &grid_a, const State &b, const Grid &grid_b,
                      double alpha, std::span<const TestFunction> family) {
  double worst = 0.0;
  for (const auto &h : family)
    worst = std::max(worst, std::abs(metric_pairing(a, grid_a, h, alpha) -
                                     metric_pairing(b, grid_b, h, alpha)));
  return worst;
}

double convergence_metric(const Trajectory &a, const Grid &grid_a, const Trajectory &b,
                          const Grid &grid_b, double alpha, std::span<const TestFunction> family) {
  if (a.states.size() != b.states.size())
    throw ConfigurationError("convergence metric needs trajectories with the same save times");
  double worst = 0.0;
  for (std::size_t k = 0; k < a.states.size(); ++k) {
    if (std::abs(a.states[k].t - b.states[k].t) > 1e-12 * std::max(1.0, a.states[k].t))
      throw ConfigurationError("convergence metric needs trajectories with the same save times");
    worst = std::max(worst, state_distance(a.states[k], grid_a, b.states[k], grid_b, alpha, family));
  }
  return worst;
}

double equicontinuity_ratio(const Trajectory &traj, const Grid &grid, double alpha, double lambda,
                            double theta_constant, std::span<const TestFunction> family) {
  const auto &states = traj.states;
  double worst = 0.0;
  for (const auto &h : family) {
    std::vector<double> pairing(states.size());
    for (std::size_t k = 0; k < states.size(); ++k)
      pairing[k] = weighted_pairing(states[k].g, grid, h, -alpha, 0.0, lambda);
    for (std::size_t s = 0; s < states.size(); ++s)
      for (std::size_t t = s + 1; t < states.size(); ++t) {
        const double dt = states[t].t - states[s].t;
        if (dt <= 0.0)
          continue;
        worst = std::max(worst, std::abs(pairing[t] - pairing[s]) / (theta_constant * dt));
      }
  }
  return worst;
}

double loss_rate(const State &state, const Grid &grid, const KernelSpec &kernel, double n) {
  const auto &x = grid.reps();
  const double cutoff = 1.0 / n;
  CompensatedSum total;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (state.g[i] == 0.0 || !(x[i] > cutoff && x[i] < n))
      continue;
    for (std::size_t j = i; j < grid.size(); ++j) {
      if (state.g[j] == 0.0 || !(x[j] > cutoff && x[j] < n))
        continue;
      const double s = x[i] + x[j];
      if (s < n)
        continue;
      const double sym = i == j ? 0.5 : 1.0;
      total.add(sym * s * eval_phi(kernel, x[i], x[j]) * state.g[i] * state.g[j] * grid.width(i) *
                grid.width(j));
    }
  }
  return total.value();
}

namespace {

// Integral over [t[a], t[b]] of the interpolating polynomial through the nodes
// first..last; 3-point Gauss-Legendre is exact up to degree 5.
double interp_integral(const std::vector<double> &t, const std::vector<double> &f, std::size_t first,
                       std::size_t last, std::size_t a, std::size_t b) {
  static constexpr double gx[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
  static constexpr double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  const double mid = 0.5 * (t[a] + t[b]), half = 0.5 * (t[b] - t[a]);
  double acc = 0.0;
  for (int q = 0; q < 3; ++q) {
    const double x = mid + half * gx[q];
    double p = 0.0;
    for (std::size_t i = first; i <= last; ++i) {
      double l = 1.0;
      for (std::size_t j = first; j <= last; ++j)
        if (j != i)
          l *= (x - t[j]) / (t[i] - t[j]);
      p += l * f[i];
    }
    acc += gw[q] * p;
  }
  return half * acc;
}

} // namespace

std::vector<double> integrated_loss(const Trajectory &traj, const Grid &grid, const KernelSpec &kernel,
                                    double n) {
  const std::size_t m = traj.states.size();
  std::vector<double> t(m), rate(m), out(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    t[k] = traj.states[k].t;
    rate[k] = loss_rate(traj.states[k], grid, kernel, n);
  }
  double acc = 0.0;
  for (std::size_t k = 1; k < m; ++k) {
    // cubic through the four nearest states, fewer near a short trajectory
    const std::size_t width = std::min<std::size_t>(4, m);
    std::size_t first = k >= 2 ? k - 2 : 0;
    first = std::min(first, m - width);
    acc += interp_integral(t, rate, first, first + width - 1, k - 1, k);
    out[k] = acc;
  }
  return out;
}

} // namespace ccbe
