#include <benchmark/benchmark.h>

#include "rdt/engine.hpp"
#include "rdt/logistic.hpp"
#include "rdt/montecarlo.hpp"
#include "rdt/scenario.hpp"

namespace {

rdt::ScenarioConfig base_scenario(const std::string& design) {
  rdt::ScenarioConfig config;
  config.population.n_stage1 = 24;
  config.population.response_intercept = 0.4;
  config.population.outcome.responder_effect = 1.5;
  config.population.outcome.residual_sd = 1.0;
  config.stage1.period_days = 20;
  config.stage1.criteria.improvement_threshold = 0.5;
  config.stage1.p_min = 0.2;
  config.stage2.period_days = 10;
  config.stage2.washout_days = 5;
  config.stage2.cycles = 3;
  config.stage2.success_threshold = 0.5;
  config.stage2.design = config.stage2.make_design(design);
  config.mc.replications = 1;
  config.mc.master_seed = 7;
  return config;
}

void BM_RunTrial(benchmark::State& state, const std::string& design) {
  const auto scenario = base_scenario(design);
  std::uint64_t seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rdt::run_trial(scenario, seed++));
  }
}

void BM_FitLogistic(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  rdt::RngStream rng(11);
  std::vector<std::vector<double>> rows(n);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.normal(0.0, 1.0);
    const double z = rng.bernoulli(0.5) ? 1.0 : 0.0;
    rows[i] = {x, z};
    labels[i] = rng.bernoulli(rdt::inverse_logit(0.3 + 0.8 * x - 0.5 * z)) ? 1 : 0;
  }
  const auto design = rdt::DesignMatrix::with_intercept(rows);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rdt::fit_logistic(design, labels));
  }
}

void BM_Replications(benchmark::State& state) {
  auto scenario = base_scenario("crossover");
  const int workers = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(rdt::run_replications(scenario, 200, 42, workers));
  }
}

}  // namespace

BENCHMARK_CAPTURE(BM_RunTrial, crossover, std::string("crossover"));
BENCHMARK_CAPTURE(BM_RunTrial, nof1, std::string("nof1"));
BENCHMARK_CAPTURE(BM_RunTrial, adaptive, std::string("adaptive"));
BENCHMARK_CAPTURE(BM_RunTrial, parallel, std::string("parallel"));
BENCHMARK(BM_FitLogistic)->Arg(50)->Arg(500);
BENCHMARK(BM_Replications)->Arg(1)->Arg(2);

BENCHMARK_MAIN();
