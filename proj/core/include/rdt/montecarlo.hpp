#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rdt/engine.hpp"
#include "rdt/scenario.hpp"

namespace rdt {

/// A per-replication binary rate with its exact Monte Carlo standard error
/// sqrt(p(1-p)/R).
struct RateStat {
  double value = 0.0;
  double mc_se = 0.0;
};

/// A replication-averaged quantity with standard error sd/sqrt(n); n counts
/// the replications where the quantity was defined.
struct MeanStat {
  double value = 0.0;
  double mc_se = 0.0;
  int n = 0;
};

/// Aggregated operating characteristics over R independent replications.
struct OperatingCharacteristics {
  std::string design_label;
  int replications = 0;
  RateStat rejection_rate;       // replications declaring effectiveness
  RateStat stage1_stop_rate;     // stopped at the Stage-1 gate
  MeanStat mean_total_n;
  MeanStat mean_duration_days;
  MeanStat mean_access_proportion;
  MeanStat mean_stage2_n;
  MeanStat stage2_access_proportion;
  MeanStat classification_sensitivity;
  MeanStat classification_specificity;
  MeanStat superior_arm_allocation;
  MeanStat mean_effect_point;
};

/// Replication seed derivation: a splitmix-style 64-bit mix of the master
/// seed and the replication index. Documented so streams are reproducible
/// across implementations.
std::uint64_t replication_seed(std::uint64_t master_seed, int replication_index);

/// Runs R independent replications on a pool of `workers` threads.
///
/// Results land in per-index slots and are reduced in index order, so the
/// aggregate is bit-identical for any worker count. A failing replication
/// aborts the run with its index and seed in the error message.
OperatingCharacteristics run_replications(const ScenarioConfig& scenario, int replications,
                                          std::uint64_t master_seed, int workers = 1);

/// One operating-characteristics row per design, all under common random
/// numbers (identical replication seeds, hence identical populations).
std::vector<OperatingCharacteristics> compare_designs(const ScenarioConfig& scenario,
                                                      const std::vector<DesignChoice>& designs,
                                                      int workers = 1);

struct PowerPoint {
  double delta = 0.0;
  RateStat rejection_rate;
  MeanStat mean_effect_point;
};

/// Rejection rate as a function of the responder effect.
std::vector<PowerPoint> power_curve(const ScenarioConfig& scenario,
                                    const std::vector<double>& deltas, int workers = 1);

}  // namespace rdt
