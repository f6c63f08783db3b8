// ccbe: batch driver for the truncated coagulation / collisional breakage solver.
//
//   ccbe run <scenario> [--set key=value]...
//   ccbe check <scenario> [--set key=value]...
//   ccbe converge <scenario> --n 5,10,20 [--set key=value]...
//
// Exit codes: 0 success, 1 invariant violation, 2 configuration error,
// 3 integration failure. CCBE_OUTPUT_ROOT prefixes every output directory.

#include "ccbe/run.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

void print_report(const ccbe::AdmissibilityReport &r) {
  std::cout << "eta(2 alpha)   = " << ccbe::format_double(r.eta_2alpha) << '\n'
            << "T_N            = " << ccbe::format_double(r.t_n) << '\n'
            << "E threshold    = " << ccbe::format_double(r.e_threshold) << '\n'
            << "k (envelope)   = " << ccbe::format_double(r.k_envelope) << '\n'
            << "A1 " << (r.passes_A1 ? "pass" : "FAIL") << "  A2 " << (r.passes_A2 ? "pass" : "FAIL")
            << "  A3 " << (r.passes_A3 ? "pass" : "FAIL") << "  A4 " << (r.passes_A4 ? "pass" : "FAIL")
            << '\n';
  for (const auto &f : r.failures)
    std::cout << "  " << f << '\n';
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Sectional solver for coagulation with collisional breakage"};
  app.require_subcommand(1);

  std::string file;
  std::vector<std::string> overrides;
  std::vector<double> n_list;

  auto *run_cmd = app.add_subcommand("run", "integrate a scenario and write diagnostics");
  run_cmd->add_option("scenario", file, "scenario file")->required();
  run_cmd->add_option("--set", overrides, "override a scenario key (key=value)");

  auto *check_cmd = app.add_subcommand("check", "admissibility report only");
  check_cmd->add_option("scenario", file, "scenario file")->required();
  check_cmd->add_option("--set", overrides, "override a scenario key (key=value)");

  auto *conv_cmd = app.add_subcommand("converge", "truncation-convergence study");
  conv_cmd->add_option("scenario", file, "scenario file")->required();
  conv_cmd->add_option("--n", n_list, "truncation sizes, e.g. 5,10,20")->delimiter(',')->required();
  conv_cmd->add_option("--set", overrides, "override a scenario key (key=value)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ccbe::kConfigurationError;
  }

  try {
    if (check_cmd->parsed()) {
      print_report(ccbe::admissibility(ccbe::parse_scenario(file, overrides)));
      return ccbe::kSuccess;
    }

    const auto scenario = ccbe::parse_scenario(file, overrides);

    if (run_cmd->parsed()) {
      const auto r = ccbe::run(scenario);
      const auto &last = r.moments.back();
      std::cout << "t = " << ccbe::format_double(last.t) << "  M0 = " << ccbe::format_double(last.m0)
                << "  M1 = " << ccbe::format_double(last.m1)
                << "  lost = " << ccbe::format_double(last.lost_mass)
                << "  subgrid = " << ccbe::format_double(last.subgrid_mass) << '\n';
      std::cout << "output: " << ccbe::output_directory(scenario).string() << '\n';
      for (const auto &v : r.violations)
        std::cerr << "violation: " << v << '\n';
      if (!r.failure.empty())
        std::cerr << "integration failure: " << r.failure << '\n';
      return r.exit_code;
    }

    const auto study = ccbe::convergence_study(scenario, n_list);
    const auto out = ccbe::output_directory(scenario) / "convergence.csv";
    ccbe::write_convergence_csv(study, out);
    std::cout << "output: " << out.string() << '\n';
    return study.exit_code;
  } catch (const ccbe::InadmissibleScenario &e) {
    std::cerr << "error: " << e.what() << '\n';
    print_report(e.report());
    return ccbe::kConfigurationError;
  } catch (const ccbe::IntegrationFailure &e) {
    std::cerr << "integration failure: " << e.what() << '\n';
    return ccbe::kIntegrationFailure;
  } catch (const std::invalid_argument &e) {
    std::cerr << "error: " << e.what() << '\n';
    return ccbe::kConfigurationError;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return ccbe::kIntegrationFailure;
  }
}
