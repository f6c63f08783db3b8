#ifndef CCBE_OPERATORS_HPP_
#define CCBE_OPERATORS_HPP_

#include "ccbe/grid.hpp"
#include "ccbe/kernel_model.hpp"
#include "ccbe/test_function.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace ccbe {

/// Piecewise-constant density on a Grid plus the two mass buckets that keep the
/// discrete balance  sum_i rep_i g_i width_i + lost + subgrid = const  exact.
struct State {
  std::vector<double> g;
  double t = 0.0;
  double lost_mass = 0.0;    ///< removed by over-n events (tau = 0 only)
  double subgrid_mass = 0.0; ///< breakage daughters born below v_min
};

struct Derivative {
  std::vector<double> dg;
  double dlost = 0.0;
  double dsubgrid = 0.0;
};

/// One interacting cell pair (i <= j) with a nonzero truncated rate.
struct PairEntry {
  std::uint32_t i = 0;
  std::uint32_t j = 0;
  /// (1 - delta_ij/2) phi_eff width_i width_j: event rate is weight * g_i * g_j.
  double weight = 0.0;
  double e_coag = 0.0;
  double mass = 0.0; ///< s = rep_i + rep_j
  bool lost = false; ///< tau = 0 and s >= n: death only, mass s to the lost bucket

  // Coagulation product split over the pivots bracketing s (number and mass exact).
  std::uint32_t coag_lo = 0;
  double coag_lo_count = 0.0;
  std::uint32_t coag_hi = 0;
  double coag_hi_count = 0.0;

  // Breakage: pivot interval m holds s; daughters in [rep_m, s) go to pivots
  // m and m+1 as counts per event, daughters below rep_m are handled through
  // s-independent interval stencils scaled by s^-(1+theta).
  std::uint32_t break_interval = 0;
  double break_scale = 0.0;
  std::uint32_t part_lo = 0;
  double part_lo_count = 0.0;
  std::uint32_t part_hi = 0;
  double part_hi_count = 0.0;
};

/**
 * Precomputed rates and redistribution stencils.
 *
 * Full pivot intervals [rep_c, rep_{c+1}] below s receive daughters with
 * counts scale * (interval_lo[c], interval_hi[c]) on pivots (c, c+1); the
 * region [v_min, rep_0) sends its mass to pivot 0 (scale * low_count) and the
 * region (0, v_min) to the subgrid bucket (scale * subgrid_mass).
 */
struct KernelTables {
  std::size_t cells = 0;
  TruncationConfig trunc;
  DaughterSpec daughter;

  std::vector<double> phi_eff; ///< cells x cells, row-major
  std::vector<double> e_coag;  ///< cells x cells
  std::vector<double> e_break; ///< cells x cells

  std::vector<PairEntry> pairs;

  std::vector<double> interval_lo;
  std::vector<double> interval_hi;
  double low_count = 0.0;
  double subgrid_unit = 0.0;

  double phi(std::size_t i, std::size_t j) const { return phi_eff[i * cells + j]; }
};

enum class Gate {
  Enforce, ///< throw InadmissibleError unless (A1)-(A3) pass
  Skip,    ///< discretisation-only studies, e.g. pure breakage with E = 0
};

KernelTables build_tables(const Grid &grid, const TruncationConfig &trunc, const KernelSpec &kernel,
                          const EfficiencySpec &eff, const DaughterSpec &daughter,
                          Gate gate = Gate::Enforce);

/// Fully expanded (cell, count) list of one breakage event of the given pair,
/// plus the daughter mass sent below v_min.
struct DaughterBinning {
  std::vector<std::pair<std::size_t, double>> counts;
  double subgrid_mass = 0.0;
};
DaughterBinning expand_breakage(const KernelTables &tables, const PairEntry &pair);

/// Serial reference right-hand side.
Derivative rhs_serial(const State &state, const KernelTables &tables, const Grid &grid);

/// OpenMP right-hand side; agrees with rhs_serial to ~1e-13 relative.
Derivative rhs_parallel(const State &state, const KernelTables &tables, const Grid &grid);

enum class Execution { Serial, Parallel };

inline Derivative rhs(const State &state, const KernelTables &tables, const Grid &grid,
                      Execution exec = Execution::Serial) {
  return exec == Execution::Parallel ? rhs_parallel(state, tables, grid)
                                     : rhs_serial(state, tables, grid);
}

/// Discrete mass sum_i rep_i g_i width_i.
double grid_mass(std::span<const double> g, const Grid &grid);

enum class WeakForm {
  /// h replaced by its cell averages and products placed where the scheme
  /// places them; equals the exact time derivative of integral(g h).
  Discrete,
  /// h evaluated pointwise at representatives, integral(h P) in closed form.
  Continuous,
};

/// Integrand of the truncated weak formulation at one time:
/// 1/2 sum E h_tau phi g g + 1/2 sum E1 Pi_{h,tau} phi g g.
double weak_form_integrand(const State &state, const KernelTables &tables, const Grid &grid,
                           const TestFunction &h, WeakForm form);

/// Trapezoid-in-time integral of weak_form_integrand over saved states.
double weak_form_rhs(std::span<const State> states, const KernelTables &tables, const Grid &grid,
                     const TestFunction &h, WeakForm form = WeakForm::Discrete);

} // namespace ccbe

#endif // CCBE_OPERATORS_HPP_
