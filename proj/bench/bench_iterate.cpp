// One iteration of the agent-parallel engine against the dense serial
// reference. Args: {n} for the reference, {n, threads} for the engine.

#include <map>

#include <benchmark/benchmark.h>

#include "danyra/engine.hpp"
#include "danyra/reference.hpp"

namespace {

const danyra::HyperParams kHp{0.01, 0.02, 0.1, 0.2, danyra::BufferSchedule::constant(0.1)};

const danyra::ProblemInstance& instance_of(std::size_t n) {
  static std::map<std::size_t, danyra::ProblemInstance> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, danyra::generate_instance(1, n, 5.0 * n, n / 3)).first;
  return it->second;
}

// A state a few hundred iterations in, so the queue floor is not trivially active.
danyra::SwarmState warm_state(const danyra::ProblemInstance& inst) {
  danyra::InitSpec init;
  init.offset = danyra::Vector::Constant(2, 5.0);
  auto s = danyra::init_state(inst, kHp, danyra::ConstraintMode::kInequality, init);
  for (int k = 0; k < 200; ++k) s = danyra::iterate(s, inst, kHp);
  return s;
}

void BM_Reference(benchmark::State& st) {
  const auto& inst = instance_of(static_cast<std::size_t>(st.range(0)));
  const auto ops = danyra::reference::build_operators(inst);
  auto s = warm_state(inst);
  for (auto _ : st) {
    s = danyra::reference::iterate(s, inst, ops, kHp);
    benchmark::DoNotOptimize(s.agents.front().x.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_Engine(benchmark::State& st) {
  const auto& inst = instance_of(static_cast<std::size_t>(st.range(0)));
  const danyra::ExecutionPolicy policy{static_cast<int>(st.range(1))};
  auto s = warm_state(inst);
  for (auto _ : st) {
    s = danyra::iterate(s, inst, kHp, policy);
    benchmark::DoNotOptimize(s.agents.front().x.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

BENCHMARK(BM_Reference)->Arg(14)->Arg(100)->Arg(400)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Engine)
    ->ArgsProduct({{14, 100, 400, 2000}, {0, 1, 2, 4}})
    ->ArgNames({"n", "threads"})
    ->Unit(benchmark::kMicrosecond)
    ->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
