#pragma once

#include <optional>
#include <vector>

#include "rdt/analysis.hpp"
#include "rdt/audit.hpp"
#include "rdt/scenario.hpp"
#include "rdt/stage1.hpp"
#include "rdt/stage2.hpp"

namespace rdt {

struct TrialMetrics {
  int total_enrolled = 0;
  int total_duration_days = 0;
  /// Fraction of all enrolled patients who completed at least one
  /// experimental period (Stage 1 exposes everyone by construction).
  double access_proportion = 0.0;
  int stage2_n = 0;
  /// Among Stage-2 participants: fraction with >=1 experimental period
  /// within Stage 2 itself.
  std::optional<double> stage2_access_proportion;
  /// Among Stage-2 participants of single-treatment designs: fraction
  /// allocated to the truly superior arm. Absent when no arm is superior.
  std::optional<double> superior_arm_allocation;
};

enum class FinalDecision { EffectiveForResponders, Ineffective, StoppedEarly };

const char* to_string(FinalDecision decision);

/// One replication's full outcome: decisions, estimates, Stage-1 data,
/// metrics and the audit trail.
struct TrialResult {
  FinalDecision final_decision = FinalDecision::StoppedEarly;
  StopReason end_reason = StopReason::Stage1Futility;
  std::optional<EffectEstimate> effect;  // present iff Stage 2 reached an analysis
  Stage1Result stage1;
  std::optional<LogisticFit> logistic;
  std::optional<MetaResult> meta;  // n-of-1 series only
  std::optional<Stage2Data> stage2;
  TrialMetrics metrics;
  std::optional<double> classification_sensitivity;  // vs latent truth
  std::optional<double> classification_specificity;
  bool protocol_deviation = false;
  std::vector<PatientProfile> stage1_population;
  AuditTrail audit;
};

/// Derives the trial metrics from the recorded audit events alone.
TrialMetrics compute_metrics(const AuditTrail& audit, std::optional<Arm> superior_arm);

/// Executes one full replication of the two-stage protocol. Deterministic
/// in (scenario, seed). Design infeasibility is recorded as an early stop,
/// never a crash.
TrialResult run_trial(const ScenarioConfig& scenario, std::uint64_t seed);

}  // namespace rdt
