#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "rdt/analysis.hpp"
#include "rdt/audit.hpp"
#include "rdt/population.hpp"
#include "rdt/rng.hpp"
#include "rdt/types.hpp"

namespace rdt {

struct CrossoverDesign {
  int washout_days = 0;
};

struct NOf1Design {
  int cycles = 2;
  int washout_days = 0;
};

struct ResponseAdaptiveDesign {
  UrnState urn;
  double success_threshold = 0.0;
};

struct ParallelGroupDesign {};

using DesignChoice =
    std::variant<CrossoverDesign, NOf1Design, ResponseAdaptiveDesign, ParallelGroupDesign>;

const char* design_label(const DesignChoice& design);

/// Permuted-block randomization with block size 2: AB/BA counts never differ
/// by more than one. Throws DesignInfeasibleError below 2 patients.
std::vector<SequenceOrder> plan_crossover(int n_patients, RngStream& rng);

/// A series of k cycles, each independently randomized to (exp, ctrl) or
/// (ctrl, exp), with washouts between all consecutive periods.
TreatmentSchedule plan_nof1(int cycles, int period_days, int washout_days, RngStream& rng);

/// Permuted blocks of 4 (two per arm, shuffled within block).
std::vector<Arm> plan_parallel(int n_patients, RngStream& rng);

/// Draws an arm with probability proportional to ball counts; the urn itself
/// is unchanged by the draw.
Arm urn_draw(const UrnState& urn, RngStream& rng);

/// Randomized play-the-winner update: add-on balls go to the drawn arm on
/// success and to the opposite arm on failure.
UrnState urn_update(UrnState urn, Arm drawn_arm, bool success);

struct Stage2PatientData {
  int patient_id = 0;
  SequenceOrder sequence = SequenceOrder::ExperimentalFirst;  // crossover only
  TreatmentSchedule schedule;
  std::vector<std::optional<double>> outcomes;  // missing after dropout
  std::optional<bool> success;                  // adaptive dichotomized outcome
  std::optional<UrnState> urn_at_draw;          // adaptive snapshot before draw
  std::vector<std::uint64_t> assignment_tokens;  // one per period
};

struct InterimRecord {
  int n_used = 0;
  EffectEstimate estimate;
  InterimDecision decision = InterimDecision::Continue;
};

struct Stage2Data {
  std::vector<Stage2PatientData> patients;  // enrollment order
  std::optional<InterimRecord> interim;
  std::size_t analyzed_count = 0;  // leading patients entering the analysis
};

/// Exportable allocation record per the external audit format.
struct AllocationEntry {
  int period_index = 0;
  Arm arm = Arm::Control;
  std::uint64_t token = 0;
};

struct AllocationRecord {
  int patient_id = 0;
  std::vector<AllocationEntry> entries;
  std::optional<UrnState> urn_at_draw;
};

std::vector<AllocationRecord> allocation_records(const Stage2Data& data);

struct Stage2Settings {
  DesignChoice design;
  int period_days = 1;
  double dropout_prob = 0.0;
  int n_resamples = 1000;
  std::optional<InterimRule> interim;
};

/// Runs the comparative stage: builds concealed schedules with the planners,
/// simulates outcomes, drives the urn for the adaptive design and evaluates
/// the interim rule at the configured information fraction.
Stage2Data run_stage2(const Stage2Settings& settings,
                      const std::vector<PatientProfile>& patients, const OutcomeModel& model,
                      AuditTrail& audit, RngStream& rng);

/// Design-appropriate treatment-effect analysis over the first `limit`
/// patients of the Stage-2 data set.
EffectEstimate analyze_stage2(const Stage2Settings& settings, const Stage2Data& data,
                              std::size_t limit, RngStream& analysis_rng,
                              MetaResult* meta_out = nullptr);

/// Whether the estimate points in the beneficial direction.
bool estimate_favorable(const EffectEstimate& estimate, const DesignChoice& design,
                        ImprovementDirection direction);

}  // namespace rdt
