#ifndef CCBE_RUN_HPP_
#define CCBE_RUN_HPP_

#include "ccbe/diagnostics.hpp"
#include "ccbe/scenario.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace ccbe {

enum ExitCode : int { kSuccess = 0, kInvariantViolation = 1, kConfigurationError = 2, kIntegrationFailure = 3 };

struct WeakCheck {
  std::string test;
  WeakResidual discrete;
  WeakResidual continuous;
};

struct RunResult {
  int exit_code = kSuccess;
  Grid grid;
  Trajectory trajectory;
  std::vector<MomentRow> moments;
  BoundReport bounds;
  AdmissibilityReport admissibility;
  InitialTruncation initial_truncation;
  std::vector<WeakCheck> weak;
  double equicontinuity = 0.0; ///< worst ratio against Theta(1, T); <= 1 passes
  std::vector<std::string> violations;
  std::string failure; ///< integration failure message, if any
};

/// Simulates the scenario and evaluates every diagnostic; writes nothing.
RunResult simulate(const Scenario &s);

/// Directory the scenario writes into: $CCBE_OUTPUT_ROOT/<output_dir> when the
/// variable is set, <output_dir> otherwise.
std::filesystem::path output_directory(const Scenario &s);

/// grid.csv, moments.csv, density_<t>.csv, bounds.json, admissibility.json, scenario.txt.
void write_outputs(const Scenario &s, const RunResult &r, const std::filesystem::path &dir);

/// simulate + write_outputs. exit_code is nonzero iff a hard invariant fails
/// (1) or integration fails (3).
RunResult run(const Scenario &s);

struct ConvergenceRow {
  enum class Kind { Pair, Cross };
  Kind kind = Kind::Pair;
  int tau = 1;      ///< Pair rows only
  double n_a = 0.0; ///< Pair: n_k, Cross: n
  double n_b = 0.0; ///< Pair: n_{k+1}, Cross: n
  double sup_metric = 0.0;
  double final_distance = 0.0; ///< at t_end
};

struct ConvergenceStudy {
  std::vector<ConvergenceRow> rows;
  int exit_code = kSuccess;
};

/// Runs base at every n in n_list for both tau; pairwise metrics between
/// consecutive n and the tau=0 vs tau=1 distance at each n.
ConvergenceStudy convergence_study(const Scenario &base, const std::vector<double> &n_list);

void write_convergence_csv(const ConvergenceStudy &study, const std::filesystem::path &file);

} // namespace ccbe

#endif // CCBE_RUN_HPP_
