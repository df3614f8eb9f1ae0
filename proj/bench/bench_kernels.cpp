// Serial reference vs OpenMP for the per-step kernels. Thread count follows
// OMP_NUM_THREADS / TIPREL_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <memory>

#include "tiprel/data.hpp"
#include "tiprel/mala.hpp"
#include "tiprel/potentials.hpp"
#include "tiprel/precond.hpp"
#include "tiprel/sampler.hpp"

using namespace tiprel;

namespace {

ChainEnsemble start(std::size_t dim, std::int64_t chains) {
  return initialize(InitSpec::gaussian(Vector::Zero(static_cast<Eigen::Index>(dim)), 0.1), chains, 1);
}

void rosenbrock_curvature(benchmark::State& state, Exec exec) {
  const auto pot = std::make_shared<Rosenbrock>();
  const auto pc = curvature_aware(pot, ClampSpec{1e-3});
  ChainEnsemble ens = start(2, state.range(0));
  for (auto _ : state) tiprel_advance(ens, *pot, *pc, 6e-3, exec);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void logistic_curvature(benchmark::State& state, Exec exec) {
  const auto pot = std::make_shared<LogisticPosterior>(make_synthetic_logistic(300, 13, 1).model);
  const auto pc = curvature_aware(pot, std::nullopt);
  ChainEnsemble ens = start(13, state.range(0));
  for (auto _ : state) tiprel_advance(ens, *pot, *pc, 1e-3, exec);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void logistic_mala(benchmark::State& state, Exec exec) {
  const auto pot = std::make_shared<LogisticPosterior>(make_synthetic_logistic(300, 13, 1).model);
  MalaChains chains(start(13, state.range(0)), *pot, exec);
  for (auto _ : state) benchmark::DoNotOptimize(chains.step(*pot, 1e-3, exec));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK_CAPTURE(rosenbrock_curvature, serial, Exec::serial)->Arg(2000);
BENCHMARK_CAPTURE(rosenbrock_curvature, parallel, Exec::parallel)->Arg(2000);
BENCHMARK_CAPTURE(logistic_curvature, serial, Exec::serial)->Arg(200);
BENCHMARK_CAPTURE(logistic_curvature, parallel, Exec::parallel)->Arg(200);
BENCHMARK_CAPTURE(logistic_mala, serial, Exec::serial)->Arg(1000);
BENCHMARK_CAPTURE(logistic_mala, parallel, Exec::parallel)->Arg(1000);

BENCHMARK_MAIN();
