#ifndef CCBE_INTEGRATOR_HPP_
#define CCBE_INTEGRATOR_HPP_

#include "ccbe/operators.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ccbe {

enum class Method { RK4Fixed, RK23Adaptive };

std::string_view to_string(Method m);
Method parse_method(std::string_view name);

struct IntegratorConfig {
  Method method = Method::RK4Fixed;
  double dt_init = 0.0; ///< <= 0 selects 0.1 / (fastest initial depletion rate)
  double rel_tol = 1e-8;
  double abs_tol = 1e-12;
  double t_end = 1.0;
  double save_every = 0.05;
  std::size_t max_steps = 1000000;
  Execution execution = Execution::Serial;

  bool operator==(const IntegratorConfig &) const = default;
};

void validate(const IntegratorConfig &cfg);

struct StepStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  double min_dt = 0.0;
  double dt_init = 0.0;
};

struct Trajectory {
  std::vector<State> states;
  StepStats stats;
};

/// Thrown when integration cannot continue; carries everything saved so far.
class IntegrationFailure : public std::runtime_error {
public:
  IntegrationFailure(const std::string &what, Trajectory partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const Trajectory &partial() const { return partial_; }

private:
  Trajectory partial_;
};

/// 0.1 / max_i sum_j phi_eff[i][j] g_j width_j, or 0 when every rate vanishes.
double default_dt(const State &state, const KernelTables &tables, const Grid &grid);

/// Save times 0, save_every, 2 save_every, ..., t_end.
std::vector<double> save_times(const IntegratorConfig &cfg);

/**
 * Advances by exactly dt with classical RK4. A step producing a negative
 * density (in any stage or the result) is replaced by two half steps,
 * recursively, down to dt_min; below that IntegrationFailure is thrown.
 */
State step(const State &state, double dt, const KernelTables &tables, const Grid &grid,
           double dt_min, Execution exec = Execution::Serial, StepStats *stats = nullptr);

Trajectory integrate(const State &initial, const IntegratorConfig &cfg, const KernelTables &tables,
                     const Grid &grid);

} // namespace ccbe

#endif // CCBE_INTEGRATOR_HPP_
