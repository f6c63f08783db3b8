#ifndef CCBE_SCENARIO_HPP_
#define CCBE_SCENARIO_HPP_

#include "ccbe/errors.hpp"
#include "ccbe/grid.hpp"
#include "ccbe/integrator.hpp"
#include "ccbe/kernel_model.hpp"
#include "ccbe/test_function.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ccbe {

struct InitialCondition {
  enum class Kind { Exponential, Pulse, Table };

  Kind kind = Kind::Exponential;
  double c = 1.0;  ///< exponential: c exp(-v / mu)
  double mu = 1.0;
  std::size_t cell = 0; ///< pulse: cell index
  double value = 0.0;   ///< pulse: density on that cell
  std::string table;    ///< table: CSV path with columns index,g

  bool operator==(const InitialCondition &) const = default;
};

/// "exponential:<c>,<mu>", "pulse:<cell>,<density>", "table:<path>".
std::string to_string(const InitialCondition &ic);
InitialCondition parse_initial_condition(std::string_view text);

/**
 * Everything needed for one run. Text form is one `key = value` per line,
 * '#' starts a comment. `kernel` and `n` are required; all other keys default.
 */
struct Scenario {
  KernelSpec kernel;
  EfficiencySpec efficiency = EfficiencySpec::constant(0.7);
  DaughterSpec daughter;
  InitialCondition initial;

  double n = 10.0;
  std::size_t cells = 256;
  std::optional<double> v_min; ///< unset: default_v_min(n)
  int tau = 1;

  IntegratorConfig integrator;

  std::string output_dir = "out";
  bool write_density = true;
  bool check_bounds = true;
  std::vector<std::string> weak_tests = {"1", "ind:0.5,2", "min1"};
  double balance_tolerance = 1e-8;

  double resolved_v_min() const { return v_min ? *v_min : default_v_min(n); }
  TruncationConfig truncation() const { return {n, tau}; }

  bool operator==(const Scenario &) const = default;
};

/// Parameters rejected by the admissibility checker; carries the full report.
class InadmissibleScenario : public InadmissibleError {
public:
  InadmissibleScenario(const std::string &what, AdmissibilityReport report)
      : InadmissibleError(what), report_(std::move(report)) {}
  const AdmissibilityReport &report() const { return report_; }

private:
  AdmissibilityReport report_;
};

/// Parses text without validation against the admissibility checker.
Scenario parse_scenario_text(std::string_view text, const std::vector<std::string> &overrides = {});

/// Reads, applies overrides (`key=value`) and validates the scenario.
Scenario parse_scenario(const std::filesystem::path &path, const std::vector<std::string> &overrides = {});

std::string emit_scenario(const Scenario &s);

/// Admissibility of the model parameters plus the initial-data condition on the grid.
AdmissibilityReport admissibility(const Scenario &s);

/// Throws ConfigurationError / InadmissibleScenario.
void validate(const Scenario &s);

struct InitialTruncation {
  double number_below_vmin = 0.0;
  double mass_below_vmin = 0.0;
};

/// Cell-averaged initial density on the grid, g_in restricted to (0, n).
State make_initial_state(const Scenario &s, const Grid &grid, InitialTruncation *note = nullptr);

std::string format_double(double x);

} // namespace ccbe

#endif // CCBE_SCENARIO_HPP_
