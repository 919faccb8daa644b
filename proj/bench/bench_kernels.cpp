// Parallel vs serial timings for the two sweep kernels. Thread count follows
// OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include "rydoa/config.hpp"
#include "rydoa/scenario.hpp"
#include "rydoa/spectroscopy.hpp"

using namespace rydoa;
namespace sp = rydoa::spectroscopy;

namespace {

const config::ScenarioConfig& fig3() {
  static const auto cfg = config::build(config::preset("fig3"));
  return cfg;
}

void full_response(benchmark::State& state, sp::Exec exec) {
  const auto& cfg = fig3();
  const auto paths = sp::enumerate_paths(cfg.e1, fields::decompose_e_field(cfg.scene.theta_rf, cfg.scene.e_amplitude),
                                         cfg.bias);
  const auto grid = sp::linear_grid(cfg.grid.start, cfg.grid.stop, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sp::sweep_response(cfg.e1, paths, grid, sp::ResponseModel::full, exec));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void qcrb_grid(benchmark::State& state, sp::Exec exec) {
  scenario::SweepSpec spec;
  spec.primary = scenario::parse_axis(scenario::Variable::theta_rf, "5:85:" + std::to_string(state.range(0)), false);
  for (auto _ : state) benchmark::DoNotOptimize(scenario::qcrb_sweep(fig3(), spec, exec));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK_CAPTURE(full_response, serial, sp::Exec::serial)->Arg(201)->Arg(2001)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(full_response, parallel, sp::Exec::parallel)->Arg(201)->Arg(2001)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(qcrb_grid, serial, sp::Exec::serial)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(qcrb_grid, parallel, sp::Exec::parallel)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
