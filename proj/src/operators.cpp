#include "ccbe/operators.hpp"

#include "ccbe/errors.hpp"
#include "ccbe/summation.hpp"

#include <algorithm>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ccbe {

namespace {

void check_input(const State &state, const KernelTables &tables, const Grid &grid) {
  if (state.g.size() != grid.size() || tables.cells != grid.size())
    throw ContractViolation("state, tables and grid disagree on the number of cells");
  for (std::size_t i = 0; i < state.g.size(); ++i)
    if (!(state.g[i] >= 0.0))
      throw ContractViolation("negative or NaN density in cell " + std::to_string(i));
}

// Per-worker accumulation of event counts (number per unit time, not yet
// divided by the cell width).
struct Accumulator {
  explicit Accumulator(std::size_t cells) : cell(cells), bucket(cells) {}

  std::vector<CompensatedSum> cell;
  std::vector<CompensatedSum> bucket; ///< breakage weight per pivot interval holding s
  CompensatedSum lost;

  void merge(const Accumulator &o) {
    for (std::size_t c = 0; c < cell.size(); ++c) {
      cell[c].add(o.cell[c]);
      bucket[c].add(o.bucket[c]);
    }
    lost.add(o.lost);
  }
};

void accumulate_pairs(std::span<const PairEntry> pairs, std::span<const double> g, Accumulator &acc) {
  for (const auto &p : pairs) {
    const double rate = p.weight * g[p.i] * g[p.j];
    if (rate == 0.0)
      continue;
    acc.cell[p.i].add(-rate);
    acc.cell[p.j].add(-rate);
    if (p.lost) {
      acc.lost.add(p.mass * rate);
      continue;
    }
    const double coag = p.e_coag * rate;
    const double brk = rate - coag;
    if (coag != 0.0) {
      acc.cell[p.coag_lo].add(coag * p.coag_lo_count);
      acc.cell[p.coag_hi].add(coag * p.coag_hi_count);
    }
    if (brk != 0.0) {
      acc.cell[p.part_lo].add(brk * p.part_lo_count);
      acc.cell[p.part_hi].add(brk * p.part_hi_count);
      acc.bucket[p.break_interval].add(brk * p.break_scale);
    }
  }
}

// Daughters landing in full pivot intervals below s, in [v_min, rep_0) and
// below v_min. Interval c receives every bucket m > c.
Derivative finish(Accumulator &acc, const KernelTables &tables, const Grid &grid) {
  const std::size_t I = grid.size();
  CompensatedSum running;
  for (std::size_t c = I - 1; c-- > 0;) {
    running.add(acc.bucket[c + 1]);
    const double w = running.value();
    if (w != 0.0) {
      acc.cell[c].add(w * tables.interval_lo[c]);
      acc.cell[c + 1].add(w * tables.interval_hi[c]);
    }
  }
  running.add(acc.bucket[0]);
  const double all = running.value();

  Derivative d;
  d.dg.resize(I);
  acc.cell[0].add(all * tables.low_count);
  for (std::size_t c = 0; c < I; ++c)
    d.dg[c] = acc.cell[c].value() / grid.width(c);
  d.dlost = acc.lost.value();
  d.dsubgrid = all * tables.subgrid_unit;
  return d;
}

} // namespace

Derivative rhs_serial(const State &state, const KernelTables &tables, const Grid &grid) {
  check_input(state, tables, grid);
  Accumulator acc(grid.size());
  accumulate_pairs(tables.pairs, state.g, acc);
  return finish(acc, tables, grid);
}

Derivative rhs_parallel(const State &state, const KernelTables &tables, const Grid &grid) {
  check_input(state, tables, grid);
#ifdef _OPENMP
  const int workers = std::max(1, omp_get_max_threads());
#else
  const int workers = 1;
#endif
  std::vector<Accumulator> partial(static_cast<std::size_t>(workers), Accumulator(grid.size()));
  const std::span<const PairEntry> pairs(tables.pairs);
  const std::size_t total = pairs.size();

#pragma omp parallel for schedule(static, 1) num_threads(workers)
  for (int w = 0; w < workers; ++w) {
    const std::size_t begin = total * static_cast<std::size_t>(w) / static_cast<std::size_t>(workers);
    const std::size_t end = total * static_cast<std::size_t>(w + 1) / static_cast<std::size_t>(workers);
    accumulate_pairs(pairs.subspan(begin, end - begin), state.g, partial[static_cast<std::size_t>(w)]);
  }

  // merge in worker order so the result does not depend on scheduling
  Accumulator acc(grid.size());
  for (const auto &p : partial)
    acc.merge(p);
  return finish(acc, tables, grid);
}

double grid_mass(std::span<const double> g, const Grid &grid) {
  CompensatedSum s;
  for (std::size_t i = 0; i < g.size(); ++i)
    s.add(grid.rep(i) * g[i] * grid.width(i));
  return s.value();
}

double weak_form_integrand(const State &state, const KernelTables &tables, const Grid &grid,
                           const TestFunction &h, WeakForm form) {
  check_input(state, tables, grid);
  const std::size_t I = grid.size();
  const auto &g = state.g;
  CompensatedSum total;

  if (form == WeakForm::Discrete) {
    std::vector<double> hbar(I);
    for (std::size_t c = 0; c < I; ++c)
      hbar[c] = h.integral(grid.lower(c), grid.upper(c)) / grid.width(c);
    // below_gain[m]: daughters of full intervals c < m and of [v_min, rep_0), per unit scale
    std::vector<double> below_gain(I);
    double run = tables.low_count * hbar[0];
    for (std::size_t m = 0; m < I; ++m) {
      below_gain[m] = run;
      if (m + 1 < I)
        run += tables.interval_lo[m] * hbar[m] + tables.interval_hi[m] * hbar[m + 1];
    }
    for (const auto &p : tables.pairs) {
      const double rate = p.weight * g[p.i] * g[p.j];
      if (rate == 0.0)
        continue;
      const double out = -(hbar[p.i] + hbar[p.j]);
      if (p.lost) {
        total.add(rate * out);
        continue;
      }
      const double coag_gain = p.coag_lo_count * hbar[p.coag_lo] + p.coag_hi_count * hbar[p.coag_hi];
      const double brk_gain = p.break_scale * below_gain[p.break_interval] +
                              p.part_lo_count * hbar[p.part_lo] + p.part_hi_count * hbar[p.part_hi];
      total.add(rate * (p.e_coag * (coag_gain + out) + (1.0 - p.e_coag) * (brk_gain + out)));
    }
    return total.value();
  }

  std::vector<double> hv(I);
  for (std::size_t c = 0; c < I; ++c)
    hv[c] = h.value(grid.rep(c));
  for (const auto &p : tables.pairs) {
    const double rate = p.weight * g[p.i] * g[p.j];
    if (rate == 0.0)
      continue;
    const double out = -(hv[p.i] + hv[p.j]);
    if (p.lost) {
      total.add(rate * out);
      continue;
    }
    const double coag = h.value(p.mass) + out;
    const double brk = h.daughter_integral(tables.daughter, p.mass) + out;
    total.add(rate * (p.e_coag * coag + (1.0 - p.e_coag) * brk));
  }
  return total.value();
}

double weak_form_rhs(std::span<const State> states, const KernelTables &tables, const Grid &grid,
                     const TestFunction &h, WeakForm form) {
  if (states.size() < 2)
    throw ConfigurationError("weak_form_rhs needs at least two saved states");
  CompensatedSum integral;
  double prev = weak_form_integrand(states[0], tables, grid, h, form);
  for (std::size_t k = 1; k < states.size(); ++k) {
    const double cur = weak_form_integrand(states[k], tables, grid, h, form);
    integral.add(0.5 * (states[k].t - states[k - 1].t) * (prev + cur));
    prev = cur;
  }
  return integral.value();
}

} // namespace ccbe
