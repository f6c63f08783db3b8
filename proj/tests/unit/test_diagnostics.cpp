#include "ccbe/diagnostics.hpp"
#include "ccbe/errors.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace ccbe;
using ccbe::testing::make_problem;
using ccbe::testing::quad;
using ccbe::testing::rel_err;

namespace {

// 8 cells with ratio 2 ending at 2: cell 7 is [1, 2].
Grid dyadic_grid() { return build_grid(2.0, 8, std::ldexp(1.0, -7)); }

IntegratorConfig horizon(double t_end, double save_every) {
  IntegratorConfig cfg;
  cfg.t_end = t_end;
  cfg.save_every = save_every;
  return cfg;
}

} // namespace

TEST_CASE("moments of the zero field") {
  const auto g = dyadic_grid();
  const State s{std::vector<double>(g.size(), 0.0)};
  const auto row = moments(s, g, 0.25);
  CHECK(row.m_neg2alpha == 0.0);
  CHECK(row.m0 == 0.0);
  CHECK(row.m1 == 0.0);
  CHECK(row.m2 == 0.0);
  CHECK(convex_moment(s, g) == 0.0);
}

TEST_CASE("unit density on [1, 2]") {
  const auto g = dyadic_grid();
  State s{std::vector<double>(g.size(), 0.0)};
  s.g[7] = 1.0;
  const auto row = moments(s, g, 0.25);
  CHECK(row.m0 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(row.m1 == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(row.m2 == doctest::Approx(7.0 / 3.0).epsilon(1e-14));
  CHECK(convex_moment(s, g) == doctest::Approx((std::pow(2.0, 2.5) - 1.0) / 2.5).epsilon(1e-14));
  CHECK(convex_moment(s, g) == doctest::Approx(1.8627).epsilon(1e-4));
  CHECK(row.convex_moment == convex_moment(s, g));
  CHECK(row.m_neg2alpha == doctest::Approx((std::sqrt(2.0) - 1.0) / 0.5).epsilon(1e-14));
}

TEST_CASE("exponential initial data on a fine grid") {
  const auto p = make_problem("kernel = singular-bound\nn = 10\ncells = 256\n");
  const auto row = moments(p.state, p.grid, 0.25);
  // the grid starts at v_min; the cell-average error is second order in the width
  const double lo = p.grid.v_min();
  const double m1 = quad([](double v) { return v * std::exp(-v); }, lo, 10.0);
  const double m0 = quad([](double v) { return std::exp(-v); }, lo, 10.0);
  const double mneg = quad([](double v) { return std::pow(v, -0.5) * std::exp(-v); }, lo, 10.0);
  CHECK(rel_err(row.m1, m1) < 1e-3);
  CHECK(rel_err(row.m0, m0) < 1e-3);
  CHECK(rel_err(row.m_neg2alpha, mneg) < 1e-3);
}

TEST_CASE("gronwall bound examples") {
  const KernelSpec sb{KernelFamily::SingularBound, 1.0, 0.25};
  const DaughterSpec d{0.0};

  const auto zero = gronwall_bounds(sb, d, 1.0, 3.0, 0.0);
  CHECK(zero.B1_T == 3.0);
  CHECK(zero.B_T == 4.0);

  const auto one = gronwall_bounds(sb, d, 1.0, 3.0, 1.0);
  CHECK(one.eta == 4.0);
  CHECK(one.a == 20.0);
  CHECK(one.b == 12.0);
  const double e20 = std::exp(20.0);
  CHECK(one.B1_T == doctest::Approx(e20 * 3.0 + 0.6 * (e20 - 1.0)).epsilon(1e-14));
  CHECK(one.B_T == doctest::Approx(one.B1_T + 1.0).epsilon(1e-15));

  CHECK(equicontinuity_constant(1.0, 0.25, 0.0, 1.0, 2.0) ==
        doctest::Approx(0.5 * (6.0 + 13.0 * 2.0 / 0.75) * 4.0).epsilon(1e-14));
  CHECK(equicontinuity_constant(1.0, 0.25, 0.0, 1.0, 2.0) == doctest::Approx(81.333).epsilon(1e-5));
}

TEST_CASE("convex bound") {
  CHECK(convex_bound(1.0, 2.0, 0.5, 0.0) == 0.5);
  CHECK(convex_bound(1.0, 2.0, 0.5, 0.1) ==
        doctest::Approx((0.5 + 48.0 * 4.0 * 0.1) * std::exp(8.0)).epsilon(1e-14));
  CHECK(convex_weight(4.0) == 8.0);
}

TEST_CASE("observed weighted moment stays below B(T)") {
  for (int tau : {0, 1}) {
    const auto p = make_problem("kernel = singular-bound\nn = 10\ncells = 128\ntau = " +
                                std::to_string(tau) + "\n");
    const auto traj = integrate(p.state, horizon(1.0, 0.1), p.tables, p.grid);
    auto rep = gronwall_bounds(p.scenario.kernel, p.scenario.daughter, grid_mass(p.state.g, p.grid),
                               weighted_norm(p.state, p.grid, 0.25), 1.0);
    check_bounds(rep, traj, p.grid, 0.25);
    CHECK(rep.satisfied);
    CHECK(rep.observed_sup <= rep.B_T);
    CHECK(rep.observed_sup >= weighted_norm(p.state, p.grid, 0.25));
    CHECK(rep.observed_convex_sup <= rep.G_T);
  }
}

TEST_CASE("moment series balance residuals") {
  const auto p = make_problem("kernel = singular-bound\nn = 10\ncells = 128\ntau = 0\n");
  const auto traj = integrate(p.state, horizon(1.0, 0.1), p.tables, p.grid);
  const auto rows = moment_series(traj, p.grid, 0.25);
  REQUIRE(rows.size() == traj.states.size());
  CHECK(rows.front().balance_residual == 0.0);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    CHECK(rows[k].balance_residual < 1e-10);
    if (k > 0)
      CHECK(rows[k].lost_mass > rows[k - 1].lost_mass);
  }
}

TEST_CASE("weak residual examples") {
  const std::string base = "kernel = singular-bound\nn = 10\ncells = 128\n";
  SUBCASE("mass test function, conservative") {
    const auto p = make_problem(base);
    const auto traj = integrate(p.state, horizon(1.0, 0.05), p.tables, p.grid);
    for (auto form : {WeakForm::Discrete, WeakForm::Continuous})
      CHECK(weak_residual(traj, p.tables, p.grid, TestFunction::identity(), form).residual < 1e-6);
  }
  SUBCASE("zero initial data") {
    auto p = make_problem(base);
    std::fill(p.state.g.begin(), p.state.g.end(), 0.0);
    const auto traj = integrate(p.state, horizon(1.0, 0.25), p.tables, p.grid);
    const auto w = weak_residual(traj, p.tables, p.grid, TestFunction::one());
    CHECK(w.lhs == 0.0);
    CHECK(w.rhs == 0.0);
    CHECK(w.residual == 0.0);
  }
  SUBCASE("number-neutral binary breakage") {
    const auto p = make_problem(base + "efficiency = constant:0\nv_min = 1e-12\n", Gate::Skip);
    const auto traj = integrate(p.state, horizon(1.0, 0.05), p.tables, p.grid);
    const auto w = weak_residual(traj, p.tables, p.grid, TestFunction::one(), WeakForm::Continuous);
    CHECK(std::abs(w.lhs) < 1e-8);
    CHECK(std::abs(w.rhs) < 1e-12);
  }
  SUBCASE("halving the save interval at least halves the residual") {
    const auto p = make_problem(base);
    const auto coarse = integrate(p.state, horizon(1.0, 0.1), p.tables, p.grid);
    const auto fine = integrate(p.state, horizon(1.0, 0.05), p.tables, p.grid);
    for (const auto &h : default_test_family()) {
      const double r1 = weak_residual(coarse, p.tables, p.grid, h).residual;
      const double r2 = weak_residual(fine, p.tables, p.grid, h).residual;
      CAPTURE(h.name());
      CHECK(r2 <= 0.5 * r1);
    }
  }
  SUBCASE("too few states") {
    const auto p = make_problem(base);
    const auto traj = integrate(p.state, horizon(1.0, 0.5), p.tables, p.grid);
    Trajectory short_traj{{traj.states[0], traj.states[1]}, {}};
    CHECK_THROWS_AS(weak_residual(short_traj, p.tables, p.grid, TestFunction::one()),
                    ConfigurationError);
  }
}

TEST_CASE("weighted pairing matches quadrature of the piecewise-constant field") {
  const auto p = make_problem("kernel = singular-bound\nn = 10\ncells = 64\n");
  const auto &g = p.grid;
  const auto h = TestFunction::min_one();
  double want = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double a = std::max(g.lower(i), 0.05), b = std::min(g.upper(i), 3.0);
    const auto f = [&](double v) { return std::pow(v, -0.25) * h.value(v); };
    // split at the kink of min(v, 1)
    if (a < b && a < 1.0 && b > 1.0)
      want += p.state.g[i] * (quad(f, a, 1.0) + quad(f, 1.0, b));
    else if (a < b)
      want += p.state.g[i] * quad(f, a, b);
  }
  CHECK(rel_err(weighted_pairing(p.state.g, g, h, -0.25, 0.05, 3.0), want) < 1e-10);
}

TEST_CASE("convergence metric") {
  const auto family = default_test_family();
  const auto p = make_problem("kernel = singular-bound\nn = 10\ncells = 64\n");
  const auto a = integrate(p.state, horizon(0.5, 0.1), p.tables, p.grid);
  CHECK(convergence_metric(a, p.grid, a, p.grid, 0.25, family) == 0.0);

  const auto q = make_problem("kernel = singular-bound\nn = 20\ncells = 64\n");
  const auto b = integrate(q.state, horizon(0.5, 0.1), q.tables, q.grid);
  const double d = convergence_metric(a, p.grid, b, q.grid, 0.25, family);
  CHECK(d > 0.0);
  CHECK(d == doctest::Approx(convergence_metric(b, q.grid, a, p.grid, 0.25, family)));
  CHECK(d >= state_distance(a.states.back(), p.grid, b.states.back(), q.grid, 0.25, family));

  const auto c = integrate(q.state, horizon(0.5, 0.25), q.tables, q.grid);
  CHECK_THROWS_AS(convergence_metric(a, p.grid, c, q.grid, 0.25, family), ConfigurationError);
}

TEST_CASE("equicontinuity ratio on the default scenario") {
  const auto p = make_problem("kernel = singular-bound\nn = 10\ncells = 128\n");
  const auto traj = integrate(p.state, horizon(1.0, 0.1), p.tables, p.grid);
  const auto family = default_test_family();
  const auto rep = gronwall_bounds(p.scenario.kernel, p.scenario.daughter,
                                   grid_mass(p.state.g, p.grid),
                                   weighted_norm(p.state, p.grid, 0.25), 1.0);
  CHECK(equicontinuity_ratio(traj, p.grid, 0.25, 1.0, rep.Theta, family) <= 1.0);
  // with a unit constant the ratio is the raw Lipschitz quotient, which is O(1) here
  const double raw = equicontinuity_ratio(traj, p.grid, 0.25, 1.0, 1.0, family);
  CHECK(raw > 0.0);
  CHECK(raw < 10.0);
}

TEST_CASE("independently recomputed loss matches the lost bucket") {
  const auto p = make_problem("kernel = singular-bound\nn = 10\ncells = 128\ntau = 0\n");
  const auto traj = integrate(p.state, horizon(1.0, 0.01), p.tables, p.grid);
  const auto loss = integrated_loss(traj, p.grid, p.scenario.kernel, 10.0);
  CHECK(loss.front() == 0.0);
  for (std::size_t k = 1; k < loss.size(); ++k)
    CHECK(rel_err(loss[k], traj.states[k].lost_mass) < 1e-4);
  CHECK(loss_rate(traj.states[0], p.grid, p.scenario.kernel, 10.0) ==
        doctest::Approx(rhs_serial(traj.states[0], p.tables, p.grid).dlost).epsilon(1e-12));
}
