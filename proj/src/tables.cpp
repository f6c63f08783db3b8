#include "ccbe/errors.hpp"
#include "ccbe/operators.hpp"

#include <cmath>

namespace ccbe {

namespace {

struct PivotSplit {
  double lo = 0.0;
  double hi = 0.0;
};

// Daughters of P (without the s^-(1+theta) factor) on [a, b] inside the pivot
// interval [x0, x1], split so that both number and mass are reproduced.
PivotSplit split_daughters(double theta, double a, double b, double x0, double x1) {
  const double number = (theta + 2.0) / (theta + 1.0) *
                        (std::pow(b, theta + 1.0) - std::pow(a, theta + 1.0));
  const double mass = std::pow(b, theta + 2.0) - std::pow(a, theta + 2.0);
  const double d = x1 - x0;
  return {(x1 * number - mass) / d, (mass - x0 * number) / d};
}

std::string joined(const std::vector<std::string> &items) {
  std::string out;
  for (const auto &s : items) {
    if (!out.empty())
      out += "; ";
    out += s;
  }
  return out;
}

} // namespace

KernelTables build_tables(const Grid &grid, const TruncationConfig &trunc, const KernelSpec &kernel,
                          const EfficiencySpec &eff, const DaughterSpec &daughter, Gate gate) {
  validate(trunc);
  if (gate == Gate::Enforce) {
    const auto report = check_admissibility(kernel, eff, daughter);
    if (!(report.passes_A1 && report.passes_A2 && report.passes_A3))
      throw InadmissibleError("refusing to build kernel tables: " + joined(report.failures));
  } else if (!(daughter.theta > -1.0)) {
    throw DomainError("daughter distribution needs theta > -1");
  }
  if (std::abs(grid.n() - trunc.n) > 1e-12 * trunc.n)
    throw ConfigurationError("grid upper edge does not match the truncation size n");

  const std::size_t I = grid.size();
  const double theta = daughter.theta;
  const auto &x = grid.reps();

  KernelTables t;
  t.cells = I;
  t.trunc = trunc;
  t.daughter = daughter;
  t.phi_eff.assign(I * I, 0.0);
  t.e_coag.assign(I * I, 0.0);
  t.e_break.assign(I * I, 0.0);

  t.interval_lo.resize(I - 1);
  t.interval_hi.resize(I - 1);
  for (std::size_t c = 0; c + 1 < I; ++c) {
    const auto sp = split_daughters(theta, x[c], x[c + 1], x[c], x[c + 1]);
    t.interval_lo[c] = sp.lo;
    t.interval_hi[c] = sp.hi;
  }
  const double vmin_pow = std::pow(grid.v_min(), theta + 2.0);
  t.low_count = (std::pow(x[0], theta + 2.0) - vmin_pow) / x[0];
  t.subgrid_unit = vmin_pow;

  const double cutoff = trunc.cutoff_low();
  const double n = trunc.n;

  for (std::size_t i = 0; i < I; ++i) {
    for (std::size_t j = 0; j < I; ++j) {
      const double e = eff.coalescence(x[i], x[j]);
      t.e_coag[i * I + j] = e;
      t.e_break[i * I + j] = 1.0 - e;
    }
  }

  for (std::size_t i = 0; i < I; ++i) {
    if (!(x[i] > cutoff && x[i] < n))
      continue;
    for (std::size_t j = i; j < I; ++j) {
      if (!(x[j] > cutoff && x[j] < n))
        continue;
      const double s = x[i] + x[j];
      if (trunc.tau == 1 && !(s < n))
        continue;
      const double phi = eval_phi(kernel, x[i], x[j]);
      t.phi_eff[i * I + j] = phi;
      t.phi_eff[j * I + i] = phi;
      if (phi == 0.0)
        continue;

      PairEntry p;
      p.i = static_cast<std::uint32_t>(i);
      p.j = static_cast<std::uint32_t>(j);
      p.weight = (i == j ? 0.5 : 1.0) * phi * grid.width(i) * grid.width(j);
      p.e_coag = t.e_coag[i * I + j];
      p.mass = s;
      p.lost = !(s < n);
      if (!p.lost) {
        const std::size_t m = grid.pivot_below(s);
        p.break_interval = static_cast<std::uint32_t>(m);
        p.break_scale = std::pow(s, -(1.0 + theta));
        if (m + 1 < I) {
          const double d = x[m + 1] - x[m];
          p.coag_lo = static_cast<std::uint32_t>(m);
          p.coag_hi = static_cast<std::uint32_t>(m + 1);
          p.coag_lo_count = (x[m + 1] - s) / d;
          p.coag_hi_count = (s - x[m]) / d;
          const auto sp = split_daughters(theta, x[m], s, x[m], x[m + 1]);
          p.part_lo = static_cast<std::uint32_t>(m);
          p.part_hi = static_cast<std::uint32_t>(m + 1);
          p.part_lo_count = p.break_scale * sp.lo;
          p.part_hi_count = p.break_scale * sp.hi;
        } else {
          // s beyond the last pivot: the product keeps its mass on the last
          // cell; daughters in [rep_m, s) are extrapolated from the last two
          // pivots, whose negative lower count is outweighed by the full
          // interval below it
          p.coag_lo = p.coag_hi = static_cast<std::uint32_t>(m);
          p.coag_lo_count = s / x[m];
          p.coag_hi_count = 0.0;
          const auto sp = split_daughters(theta, x[m], s, x[m - 1], x[m]);
          p.part_lo = static_cast<std::uint32_t>(m - 1);
          p.part_hi = static_cast<std::uint32_t>(m);
          p.part_lo_count = p.break_scale * sp.lo;
          p.part_hi_count = p.break_scale * sp.hi;
        }
      }
      t.pairs.push_back(p);
    }
  }
  return t;
}

DaughterBinning expand_breakage(const KernelTables &tables, const PairEntry &pair) {
  DaughterBinning out;
  if (pair.lost)
    return out;
  std::vector<double> counts(tables.cells, 0.0);
  const double scale = pair.break_scale;
  for (std::size_t c = 0; c < pair.break_interval; ++c) {
    counts[c] += scale * tables.interval_lo[c];
    counts[c + 1] += scale * tables.interval_hi[c];
  }
  counts[0] += scale * tables.low_count;
  counts[pair.part_lo] += pair.part_lo_count;
  counts[pair.part_hi] += pair.part_hi_count;
  for (std::size_t c = 0; c < counts.size(); ++c)
    if (counts[c] != 0.0)
      out.counts.emplace_back(c, counts[c]);
  out.subgrid_mass = scale * tables.subgrid_unit;
  return out;
}

} // namespace ccbe
