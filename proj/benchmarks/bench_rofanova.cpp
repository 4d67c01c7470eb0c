#include <benchmark/benchmark.h>

#include "rofanova/fanova.hpp"
#include "rofanova/permtest.hpp"
#include "rofanova/robust.hpp"
#include "rofanova/simgen.hpp"

namespace {

using namespace rofanova;

FunctionalSample scenario1(Contamination c, std::size_t grid_points) {
  Scenario1Spec spec;
  spec.model = Model::M2;
  spec.contamination = c;
  spec.grid_points = grid_points;
  Rng rng = make_stream(1, 0);
  return generate_scenario1(spec, rng);
}

LossSpec loss_of(int index) {
  switch (index) {
    case 0: return LossSpec::calibrated(LossFamily::median, 0.95);
    case 1: return LossSpec::calibrated(LossFamily::huber, 0.95);
    case 2: return LossSpec::calibrated(LossFamily::bisquare, 0.95);
    case 3: return LossSpec::calibrated(LossFamily::hampel, 0.95);
    default: return LossSpec::calibrated(LossFamily::optimal, 0.95);
  }
}

void BM_MEstimate(benchmark::State& state) {
  const FunctionalSample s = scenario1(Contamination::C1, static_cast<std::size_t>(state.range(1)));
  const LossSpec loss = loss_of(static_cast<int>(state.range(0)));
  const ScaleFunction sigma = funmad(s);
  for (auto _ : state) benchmark::DoNotOptimize(m_estimate(s, loss, sigma));
  state.SetLabel(loss.describe());
}
BENCHMARK(BM_MEstimate)->ArgsProduct({{0, 1, 2, 3, 4}, {25, 200}});

void BM_Funmad(benchmark::State& state) {
  const FunctionalSample s = scenario1(Contamination::C0, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(funmad(s));
}
BENCHMARK(BM_Funmad)->Arg(25)->Arg(200);

void BM_FitRobustTwoWay(benchmark::State& state) {
  Scenario2Spec spec;
  spec.a = 0.5;
  spec.b = 0.5;
  spec.contamination = Contamination::C3;
  Rng rng = make_stream(2, 0);
  const FunctionalSample s = generate_scenario2(spec, rng);
  const DesignSpec d = DesignSpec::from_sample(s, DesignKind::two_way);
  const LossSpec loss = LossSpec::calibrated(LossFamily::bisquare, 0.95);
  for (auto _ : state) benchmark::DoNotOptimize(fit_robust(s, d, loss));
}
BENCHMARK(BM_FitRobustTwoWay);

void BM_PermutationTest(benchmark::State& state) {
  const FunctionalSample s = scenario1(Contamination::C0, 25);
  const DesignSpec d = DesignSpec::from_sample(s, DesignKind::one_way);
  const LossSpec loss = LossSpec::calibrated(LossFamily::bisquare, 0.95);
  PermutationConfig perm;
  perm.permutations = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_test(s, d, loss, {}, perm));
}
BENCHMARK(BM_PermutationTest)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_GpSample(benchmark::State& state) {
  GpSpec spec;
  spec.grid = DomainGrid::line(static_cast<std::size_t>(state.range(0)));
  Rng rng = make_stream(3, 0);
  for (auto _ : state) benchmark::DoNotOptimize(gp_sample(spec, 60, rng));
}
BENCHMARK(BM_GpSample)->Arg(25)->Arg(200);

}  // namespace
BENCHMARK_MAIN();
