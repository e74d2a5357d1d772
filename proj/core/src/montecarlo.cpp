#include "rdt/montecarlo.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>

namespace rdt {

namespace {

/// The per-replication facts that feed the aggregates.
struct ReplicationSummary {
  bool rejected = false;
  bool stage1_stopped = false;
  double total_enrolled = 0.0;
  double duration_days = 0.0;
  double access_proportion = 0.0;
  double stage2_n = 0.0;
  std::optional<double> stage2_access;
  std::optional<double> sensitivity;
  std::optional<double> specificity;
  std::optional<double> superior_arm_allocation;
  std::optional<double> effect_point;
};

ReplicationSummary summarize(const TrialResult& trial) {
  ReplicationSummary summary;
  summary.rejected = trial.final_decision == FinalDecision::EffectiveForResponders;
  summary.stage1_stopped = trial.end_reason == StopReason::Stage1Futility;
  summary.total_enrolled = trial.metrics.total_enrolled;
  summary.duration_days = trial.metrics.total_duration_days;
  summary.access_proportion = trial.metrics.access_proportion;
  summary.stage2_n = trial.metrics.stage2_n;
  summary.stage2_access = trial.metrics.stage2_access_proportion;
  summary.sensitivity = trial.classification_sensitivity;
  summary.specificity = trial.classification_specificity;
  summary.superior_arm_allocation = trial.metrics.superior_arm_allocation;
  if (trial.effect) {
    summary.effect_point = trial.effect->point;
  }
  return summary;
}

/// Welford-free accumulator: sums and sums of squares, reduced in index
/// order for bit-stable aggregates.
struct MeanAccumulator {
  double sum = 0.0;
  double sum_sq = 0.0;
  int n = 0;

  void add(double value) {
    sum += value;
    sum_sq += value * value;
    ++n;
  }
  void add(const std::optional<double>& value) {
    if (value) add(*value);
  }

  MeanStat finish() const {
    MeanStat stat;
    stat.n = n;
    if (n == 0) {
      stat.value = std::nan("");
      stat.mc_se = std::nan("");
      return stat;
    }
    stat.value = sum / n;
    if (n > 1) {
      const double variance = std::max(0.0, (sum_sq - sum * sum / n) / (n - 1));
      stat.mc_se = std::sqrt(variance / n);
    }
    return stat;
  }
};

RateStat finish_rate(int count, int total) {
  RateStat stat;
  stat.value = static_cast<double>(count) / static_cast<double>(total);
  stat.mc_se = std::sqrt(stat.value * (1.0 - stat.value) / static_cast<double>(total));
  return stat;
}

}  // namespace

std::uint64_t replication_seed(std::uint64_t master_seed, int replication_index) {
  return mix64(master_seed, static_cast<std::uint64_t>(replication_index));
}

OperatingCharacteristics run_replications(const ScenarioConfig& scenario, int replications,
                                          std::uint64_t master_seed, int workers) {
  scenario.validate();
  if (replications < 1) {
    throw std::invalid_argument("run_replications: replications must be >= 1");
  }
  if (workers < 1) {
    workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
  }
  workers = std::min(workers, replications);

  std::vector<ReplicationSummary> summaries(static_cast<std::size_t>(replications));
  std::atomic<int> next_index{0};
  std::mutex failure_mutex;
  std::exception_ptr failure;
  std::string failure_context;

  const auto worker_loop = [&]() {
    while (true) {
      const int index = next_index.fetch_add(1);
      if (index >= replications) {
        return;
      }
      {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (failure) return;
      }
      const std::uint64_t seed = replication_seed(master_seed, index);
      try {
        summaries[static_cast<std::size_t>(index)] = summarize(run_trial(scenario, seed));
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) {
          failure = std::current_exception();
          failure_context = "replication " + std::to_string(index) + " (seed " +
                            std::to_string(seed) + ") failed";
        }
        return;
      }
    }
  };

  if (workers == 1) {
    worker_loop();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back(worker_loop);
    }
    for (auto& thread : pool) {
      thread.join();
    }
  }
  if (failure) {
    try {
      std::rethrow_exception(failure);
    } catch (const std::exception& inner) {
      throw std::runtime_error(failure_context + ": " + inner.what());
    }
  }

  OperatingCharacteristics oc;
  oc.design_label = design_label(scenario.stage2.design);
  oc.replications = replications;

  int rejected = 0;
  int stage1_stopped = 0;
  MeanAccumulator total_n, duration, access, stage2_n, stage2_access, sensitivity,
      specificity, superior_alloc, effect_point;
  for (const auto& summary : summaries) {
    rejected += summary.rejected ? 1 : 0;
    stage1_stopped += summary.stage1_stopped ? 1 : 0;
    total_n.add(summary.total_enrolled);
    duration.add(summary.duration_days);
    access.add(summary.access_proportion);
    stage2_n.add(summary.stage2_n);
    stage2_access.add(summary.stage2_access);
    sensitivity.add(summary.sensitivity);
    specificity.add(summary.specificity);
    superior_alloc.add(summary.superior_arm_allocation);
    effect_point.add(summary.effect_point);
  }
  oc.rejection_rate = finish_rate(rejected, replications);
  oc.stage1_stop_rate = finish_rate(stage1_stopped, replications);
  oc.mean_total_n = total_n.finish();
  oc.mean_duration_days = duration.finish();
  oc.mean_access_proportion = access.finish();
  oc.mean_stage2_n = stage2_n.finish();
  oc.stage2_access_proportion = stage2_access.finish();
  oc.classification_sensitivity = sensitivity.finish();
  oc.classification_specificity = specificity.finish();
  oc.superior_arm_allocation = superior_alloc.finish();
  oc.mean_effect_point = effect_point.finish();
  return oc;
}

std::vector<OperatingCharacteristics> compare_designs(const ScenarioConfig& scenario,
                                                      const std::vector<DesignChoice>& designs,
                                                      int workers) {
  if (designs.empty()) {
    throw std::invalid_argument("compare_designs: need at least one design");
  }
  std::vector<OperatingCharacteristics> table;
  table.reserve(designs.size());
  for (const auto& design : designs) {
    ScenarioConfig variant = scenario;
    variant.stage2.design = design;
    table.push_back(run_replications(variant, variant.mc.replications,
                                     variant.mc.master_seed, workers));
  }
  return table;
}

std::vector<PowerPoint> power_curve(const ScenarioConfig& scenario,
                                    const std::vector<double>& deltas, int workers) {
  if (deltas.empty()) {
    throw std::invalid_argument("power_curve: need at least one delta");
  }
  std::vector<PowerPoint> points;
  points.reserve(deltas.size());
  for (const double delta : deltas) {
    ScenarioConfig variant = scenario;
    variant.population.outcome.responder_effect = delta;
    const auto oc = run_replications(variant, variant.mc.replications,
                                     variant.mc.master_seed, workers);
    points.push_back({delta, oc.rejection_rate, oc.mean_effect_point});
  }
  return points;
}

}  // namespace rdt
