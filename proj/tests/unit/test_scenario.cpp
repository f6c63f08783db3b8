#include "ccbe/errors.hpp"
#include "ccbe/run.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

using namespace ccbe;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<double>> read_csv(const fs::path &p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line); // header
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
      row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

Scenario quick(const std::string &extra = "") {
  return parse_scenario_text("kernel = singular-bound\nn = 10\ncells = 64\nt_end = 0.5\nsave_every = 0.1\n" +
                             extra);
}

} // namespace

TEST_CASE("minimal file gets the documented defaults") {
  const auto s = parse_scenario_text("kernel = singular-bound\nn = 10\n");
  CHECK(s.kernel.family == KernelFamily::SingularBound);
  CHECK(s.kernel.k == 1.0);
  CHECK(s.kernel.alpha == 0.25);
  CHECK(s.efficiency == EfficiencySpec::constant(0.7));
  CHECK(s.daughter.theta == 0.0);
  CHECK(s.initial.kind == InitialCondition::Kind::Exponential);
  CHECK(s.initial.c == 1.0);
  CHECK(s.initial.mu == 1.0);
  CHECK(s.n == 10.0);
  CHECK(s.cells == 256);
  CHECK_FALSE(s.v_min.has_value());
  CHECK(s.resolved_v_min() == 1e-4);
  CHECK(s.tau == 1);
  CHECK(s.integrator == IntegratorConfig{});
  CHECK(s.integrator.t_end == 1.0);
  CHECK(s.integrator.save_every == 0.05);
  CHECK(s.weak_tests == std::vector<std::string>{"1", "ind:0.5,2", "min1"});
  CHECK(s.balance_tolerance == 1e-8);
  CHECK_NOTHROW(validate(s));
}

TEST_CASE("comments, spacing and overrides") {
  const auto s = parse_scenario_text("# header\n  kernel=constant   # trailing\n\nn = 5\nk = 2\n",
                                     {"n=8", "tau = 0"});
  CHECK(s.kernel.family == KernelFamily::Constant);
  CHECK(s.kernel.k == 2.0);
  CHECK(s.n == 8.0);
  CHECK(s.tau == 0);
}

TEST_CASE("malformed input is a configuration error") {
  CHECK_THROWS_AS(parse_scenario_text("n = 10\n"), ConfigurationError);
  CHECK_THROWS_AS(parse_scenario_text("kernel = constant\n"), ConfigurationError);
  CHECK_THROWS_AS(parse_scenario_text("kernel = constant\nn = 10\ncolour = red\n"), ConfigurationError);
  CHECK_THROWS_AS(parse_scenario_text("kernel = constant\nn = 10\nn = 20\n"), ConfigurationError);
  CHECK_THROWS_AS(parse_scenario_text("kernel = constant\nn = ten\n"), ConfigurationError);
  CHECK_THROWS_AS(parse_scenario_text("kernel = constant\nn = 10\ntau = 2\n"), ConfigurationError);
  CHECK_THROWS_AS(parse_scenario_text("kernel = constant\nn = 10\njust words\n"), ConfigurationError);
  CHECK_THROWS_AS(parse_scenario_text("kernel = constant\nn = 10\n", {"cells"}), ConfigurationError);
  CHECK_THROWS_AS(parse_scenario("/nonexistent/scenario.txt"), ConfigurationError);
}

TEST_CASE("inadmissible parameters are rejected with a report") {
  SUBCASE("alpha = 0.6") {
    const auto s = parse_scenario_text("kernel = singular-bound\nn = 10\nalpha = 0.6\n");
    try {
      validate(s);
      FAIL("expected rejection");
    } catch (const InadmissibleScenario &e) {
      CHECK_FALSE(e.report().passes_A1);
    }
  }
  SUBCASE("theta = -1") {
    const auto s = parse_scenario_text("kernel = singular-bound\nn = 10\ntheta = -1.0\n");
    try {
      validate(s);
      FAIL("expected rejection");
    } catch (const InadmissibleScenario &e) {
      CHECK_FALSE(e.report().passes_A3);
    }
  }
  SUBCASE("E below the threshold") {
    const auto s = parse_scenario_text("kernel = singular-bound\nn = 10\nefficiency = constant:0.5\n");
    CHECK_THROWS_AS(validate(s), InadmissibleScenario);
    CHECK_FALSE(admissibility(s).passes_A2);
  }
  SUBCASE("initial data is part of the report") {
    const auto r = admissibility(parse_scenario_text("kernel = singular-bound\nn = 10\n"));
    CHECK(r.a4_evaluated);
    CHECK(r.passes_A4);
    CHECK(r.admissible());
  }
}

TEST_CASE("emit and parse round-trip") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const char *families[] = {"singular-bound", "constant"};
  for (int trial = 0; trial < 200; ++trial) {
    Scenario s;
    s.kernel.family = parse_kernel_family(families[trial % 2]);
    s.kernel.k = 0.1 + 3.0 * u(rng);
    s.kernel.alpha = 0.01 + 0.2 * u(rng);
    s.daughter.theta = -0.3 * u(rng);
    s.efficiency = trial % 3 == 0 ? EfficiencySpec::step_local(0.95 + 0.05 * u(rng), u(rng))
                                  : EfficiencySpec::constant(0.9 + 0.1 * u(rng));
    s.initial = trial % 4 == 0 ? InitialCondition{InitialCondition::Kind::Pulse, 1.0, 1.0, 5, u(rng), ""}
                               : InitialCondition{InitialCondition::Kind::Exponential, u(rng),
                                                  0.1 + u(rng), 0, 0.0, ""};
    s.n = 2.0 + 100.0 * u(rng);
    s.cells = 16 + static_cast<std::size_t>(500.0 * u(rng));
    if (trial % 5 == 0)
      s.v_min = 1e-6 * (1.0 + u(rng));
    s.tau = trial % 2;
    s.integrator.method = trial % 3 == 1 ? Method::RK23Adaptive : Method::RK4Fixed;
    s.integrator.dt_init = trial % 2 ? 0.0 : 1e-3 * u(rng);
    s.integrator.rel_tol = 1e-6 * u(rng) + 1e-12;
    s.integrator.t_end = 1.0 + u(rng);
    s.integrator.save_every = 0.01 + 0.1 * u(rng);
    s.integrator.max_steps = 1000 + trial;
    s.integrator.execution = trial % 2 ? Execution::Parallel : Execution::Serial;
    s.output_dir = "out/trial_" + std::to_string(trial);
    s.write_density = trial % 2 == 0;
    s.check_bounds = trial % 3 != 0;
    s.weak_tests = {"1", "ind:" + format_double(u(rng)) + ",3", "v"};
    s.balance_tolerance = 1e-8 * (1.0 + u(rng));
    CAPTURE(emit_scenario(s));
    const auto back = parse_scenario_text(emit_scenario(s));
    CHECK(back == s);
    CHECK_NOTHROW(validate(back));
  }
}

TEST_CASE("initial state is the exact cell average of the exponential") {
  const auto s = quick("initial = exponential:2,0.5\n");
  const auto grid = build_grid(s.n, s.cells, s.resolved_v_min());
  InitialTruncation note;
  const auto st = make_initial_state(s, grid, &note);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double avg =
        ccbe::testing::quad([](double v) { return 2.0 * std::exp(-v / 0.5); }, grid.lower(i), grid.upper(i)) /
        grid.width(i);
    CHECK(st.g[i] == doctest::Approx(avg).epsilon(1e-12));
  }
  CHECK(note.number_below_vmin == doctest::Approx(1.0 * (1.0 - std::exp(-2e-4))).epsilon(1e-10));
  CHECK(note.mass_below_vmin > 0.0);
  CHECK(note.mass_below_vmin < 1e-7);
}

TEST_CASE("pulse and table initial data") {
  const auto grid_of = [](const Scenario &s) { return build_grid(s.n, s.cells, s.resolved_v_min()); };
  const auto p = quick("initial = pulse:40,2.5\n");
  const auto st = make_initial_state(p, grid_of(p));
  CHECK(st.g[40] == 2.5);
  CHECK(std::count(st.g.begin(), st.g.end(), 0.0) == 63);
  CHECK_THROWS_AS(make_initial_state(quick("initial = pulse:64,1\n"), grid_of(p)), ConfigurationError);

  const fs::path dir = fs::temp_directory_path() / "ccbe_table_test";
  fs::create_directories(dir);
  {
    std::ofstream(dir / "g.csv") << "index,g\n3,0.5\n10,1.25\n";
    std::ofstream(dir / "s.txt") << "kernel = singular-bound\nn = 10\ncells = 64\ninitial = table:g.csv\n";
  }
  const auto t = parse_scenario(dir / "s.txt");
  const auto tst = make_initial_state(t, grid_of(t));
  CHECK(tst.g[3] == 0.5);
  CHECK(tst.g[10] == 1.25);
  CHECK(tst.g[4] == 0.0);
}

TEST_CASE("zero initial data runs cleanly") {
  auto s = quick("initial = exponential:0,1\noutput_dir = zero\n");
  const auto r = run(s);
  CHECK(r.exit_code == kSuccess);
  for (const auto &m : r.moments) {
    CHECK(m.m0 == 0.0);
    CHECK(m.m1 == 0.0);
    CHECK(m.lost_mass == 0.0);
  }
}

TEST_CASE("default scenario balance column") {
  const auto r = simulate(parse_scenario_text("kernel = singular-bound\nn = 10\n"));
  CHECK(r.exit_code == kSuccess);
  CHECK(r.violations.empty());
  for (const auto &m : r.moments) {
    CHECK(m.balance_residual <= 1e-8);
    CHECK(m.lost_mass == 0.0);
  }
  CHECK(r.bounds.satisfied);
  CHECK(r.weak.size() == 3);
}

TEST_CASE("non-conservative constant kernel loses mass steadily") {
  const auto r = simulate(parse_scenario_text(
      "kernel = constant\nk = 5\nefficiency = constant:1\nn = 5\ncells = 128\ntau = 0\n"));
  CHECK(r.exit_code == kSuccess);
  for (std::size_t k = 1; k < r.moments.size(); ++k)
    CHECK(r.moments[k].lost_mass > r.moments[k - 1].lost_mass);
}

TEST_CASE("outputs are byte-identical across repeated serial runs") {
  auto a = quick("output_dir = det_a\n");
  auto b = quick("output_dir = det_b\n");
  run(a);
  run(b);
  const auto da = output_directory(a), db = output_directory(b);
  std::size_t files = 0;
  for (const auto &entry : fs::directory_iterator(da)) {
    const auto name = entry.path().filename();
    if (name == "scenario.txt")
      continue;
    ++files;
    CAPTURE(name.string());
    CHECK(slurp(da / name) == slurp(db / name));
  }
  CHECK(files >= 6 + 4);
}

TEST_CASE("density snapshots reproduce the moments table") {
  auto s = quick("output_dir = snap\n");
  run(s);
  const auto dir = output_directory(s);
  const auto grid = read_csv(dir / "grid.csv");
  const auto moments = read_csv(dir / "moments.csv");
  std::map<double, std::vector<double>> by_time;
  for (const auto &row : moments)
    by_time[row[0]] = row;
  std::size_t seen = 0;
  for (const auto &entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (!name.starts_with("density_"))
      continue;
    const double t = std::stod(name.substr(8, name.size() - 12));
    auto it = by_time.lower_bound(t - 1e-9);
    REQUIRE(it != by_time.end());
    REQUIRE(std::abs(it->first - t) < 1e-9);
    const auto dens = read_csv(entry.path());
    REQUIRE(dens.size() == grid.size());
    double m0 = 0.0, m1 = 0.0;
    for (std::size_t i = 0; i < dens.size(); ++i) {
      CHECK(dens[i][2] >= 0.0);
      const double lo = grid[i][1], hi = grid[i][2];
      m0 += dens[i][2] * (hi - lo);
      m1 += dens[i][2] * 0.5 * (hi * hi - lo * lo);
    }
    CHECK(m0 == doctest::Approx(it->second[3]).epsilon(1e-12));
    CHECK(m1 == doctest::Approx(it->second[4]).epsilon(1e-12));
    ++seen;
  }
  CHECK(seen == moments.size());
}

TEST_CASE("output root override") {
  const auto s = quick("output_dir = here\n");
  const char *root = std::getenv("CCBE_OUTPUT_ROOT");
  if (root && *root)
    CHECK(output_directory(s) == fs::path(root) / "here");
  else
    CHECK(output_directory(s) == fs::path("here"));
}

TEST_CASE("convergence study") {
  SUBCASE("repeated n gives a zero pair metric") {
    const auto study = convergence_study(quick(), {5.0, 10.0, 10.0});
    bool found = false;
    for (const auto &r : study.rows)
      if (r.kind == ConvergenceRow::Kind::Pair && r.n_a == 10.0 && r.n_b == 10.0) {
        CHECK(r.sup_metric == 0.0);
        found = true;
      }
    CHECK(found);
  }
  SUBCASE("bad lists") {
    CHECK_THROWS_AS(convergence_study(quick(), {5.0, 10.0}), ConfigurationError);
    CHECK_THROWS_AS(convergence_study(quick(), {10.0, 5.0, 20.0}), ConfigurationError);
  }
  SUBCASE("csv layout") {
    const auto study = convergence_study(quick(), {5.0, 10.0, 20.0});
    CHECK(study.rows.size() == 2 * 2 + 3);
    const auto file = output_directory(quick()) / "conv" / "convergence.csv";
    write_convergence_csv(study, file);
    const auto text = slurp(file);
    CHECK(text.starts_with("kind,tau,n_a,n_b,sup_metric,final_distance\n"));
    CHECK(text.find("cross,both,5,5,") != std::string::npos);
  }
}
