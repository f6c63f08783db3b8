#ifndef CCBE_DIAGNOSTICS_HPP_
#define CCBE_DIAGNOSTICS_HPP_

#include "ccbe/integrator.hpp"
#include "ccbe/kernel_model.hpp"
#include "ccbe/operators.hpp"
#include "ccbe/test_function.hpp"

#include <span>
#include <vector>

namespace ccbe {

struct MomentRow {
  double t = 0.0;
  double m_neg2alpha = 0.0; ///< M_{-2 alpha}
  double m_negalpha = 0.0;  ///< M_{-alpha}
  double m0 = 0.0;
  double m1 = 0.0;
  double m2 = 0.0;
  double lost_mass = 0.0;
  double subgrid_mass = 0.0;
  double balance_residual = 0.0; ///< |M1 + lost + subgrid - M1(0)| / M1(0)
  double convex_moment = 0.0;    ///< integral v^{3/2} g
};

/// M_p = sum_i g_i * integral_{cell i} v^p dv. balance_residual is left at 0.
MomentRow moments(const State &state, const Grid &grid, double alpha);

/// One row per saved state, with balance residuals against the first row.
std::vector<MomentRow> moment_series(const Trajectory &traj, const Grid &grid, double alpha);

/// integral (v^{-2 alpha} + v) g dv.
double weighted_norm(const State &state, const Grid &grid, double alpha);

/// Gamma_1(v) = v^{3/2}.
double convex_weight(double v);
double convex_moment(const State &state, const Grid &grid);

struct BoundReport {
  double k = 0.0; ///< envelope constant of the kernel
  double eta = 0.0;
  double n1_in = 0.0;
  double norm_in = 0.0;
  double horizon = 0.0;

  double a = 0.0;
  double b = 0.0;
  double B1_T = 0.0;
  double B_T = 0.0;
  double G_T = 0.0;   ///< convex-moment bound with Upsilon_1 = integral Gamma_1 g_in
  double Theta = 0.0; ///< equicontinuity constant at lambda, ||Delta||_inf = 1
  double lambda = 1.0;

  double observed_sup = 0.0;        ///< sup_t integral (v^{-2 alpha} + v) g
  double observed_convex_sup = 0.0; ///< sup_t integral Gamma_1 g
  bool satisfied = false;
};

/// a, b, B1(T), B(T) from the Gronwall argument; Theta(lambda, T) for lambda.
BoundReport gronwall_bounds(const KernelSpec &kernel, const DaughterSpec &daughter, double n1_in,
                            double norm_in, double horizon, double lambda = 1.0);

/// (Upsilon_1 + 48 k Gamma_1(1) B^2 T) exp(40 k B T).
double convex_bound(double k, double B, double upsilon1, double horizon);

/// 1/2 k (3 (1 + lambda) + 13 (theta+2)/(theta+1-alpha)) B^2.
double equicontinuity_constant(double k, double alpha, double theta, double lambda, double B);

/// Fills observed sups and G_T from a trajectory; satisfied iff observed_sup <= B_T.
void check_bounds(BoundReport &report, const Trajectory &traj, const Grid &grid, double alpha);

/// Relative |LHS - RHS| of the weak formulation over the whole trajectory.
struct WeakResidual {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0; ///< |lhs - rhs| / max(|lhs|, |rhs|, M1(0))
};
WeakResidual weak_residual(const Trajectory &traj, const KernelTables &tables, const Grid &grid,
                           const TestFunction &h, WeakForm form = WeakForm::Discrete);

/// integral over (lo, hi) of v^p h(v) g(v) dv for the piecewise-constant g.
double weighted_pairing(std::span<const double> g, const Grid &grid, const TestFunction &h, double p,
                        double lo, double hi);

/// sup over shared save times and over the family of
/// |integral (v^{-alpha} + v)(g_a - g_b) h dv|, each integral exact on its own grid.
double convergence_metric(const Trajectory &a, const Grid &grid_a, const Trajectory &b,
                          const Grid &grid_b, double alpha, std::span<const TestFunction> family);

/// Same distance at a single pair of states.
double state_distance(const State &a, const Grid &grid_a, const State &b, const Grid &grid_b,
                      double alpha, std::span<const TestFunction> family);

/// Worst ratio |integral_0^lambda v^{-alpha} h (g(t)-g(s))| / (Theta (t - s)) over
/// all save-time pairs and the family; <= 1 means the bound holds.
double equicontinuity_ratio(const Trajectory &traj, const Grid &grid, double alpha, double lambda,
                            double theta_constant, std::span<const TestFunction> family);

/// Over-n mass loss rate for tau = 0, recomputed from the kernel directly
/// (independent of the precomputed tables).
double loss_rate(const State &state, const Grid &grid, const KernelSpec &kernel, double n);

/// Time integral of loss_rate over saved states (local cubic interpolation),
/// one value per state.
std::vector<double> integrated_loss(const Trajectory &traj, const Grid &grid, const KernelSpec &kernel,
                                    double n);

} // namespace ccbe

#endif // CCBE_DIAGNOSTICS_HPP_
