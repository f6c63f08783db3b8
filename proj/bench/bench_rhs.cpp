// Serial reference vs OpenMP right-hand side on the default problem.
#include "ccbe/operators.hpp"
#include "ccbe/scenario.hpp"

#include <benchmark/benchmark.h>

namespace {

struct Problem {
  ccbe::Grid grid;
  ccbe::KernelTables tables;
  ccbe::State state;
};

Problem make_problem(std::size_t cells) {
  auto s = ccbe::parse_scenario_text("kernel = singular-bound\nn = 10\n");
  s.cells = cells;
  Problem p;
  p.grid = ccbe::build_grid(s.n, s.cells, s.resolved_v_min());
  p.tables = ccbe::build_tables(p.grid, s.truncation(), s.kernel, s.efficiency, s.daughter);
  p.state = ccbe::make_initial_state(s, p.grid);
  return p;
}

void BM_RhsSerial(benchmark::State &st) {
  const auto p = make_problem(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st)
    benchmark::DoNotOptimize(ccbe::rhs_serial(p.state, p.tables, p.grid));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(p.tables.pairs.size()));
}

void BM_RhsParallel(benchmark::State &st) {
  const auto p = make_problem(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st)
    benchmark::DoNotOptimize(ccbe::rhs_parallel(p.state, p.tables, p.grid));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(p.tables.pairs.size()));
}

} // namespace

BENCHMARK(BM_RhsSerial)->Arg(64)->Arg(256)->Arg(1024);
BENCHMARK(BM_RhsParallel)->Arg(64)->Arg(256)->Arg(1024);

BENCHMARK_MAIN();
