#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rdt/types.hpp"

namespace rdt {

enum class TrialPhase { Enrolling, Stage1, Gate, Washout, Stage2, Stopped, Completed };

enum class StopReason {
  Stage1Futility,
  InterimFutility,
  InterimEfficacy,
  FinalAnalysis,
  DesignInfeasible,
};

enum class EventKind {
  Enrolled,
  PhaseTransition,
  Assignment,
  OutcomeObserved,
  GateEvaluated,
  InterimEvaluated,
  FinalAnalysisDone,
  ProtocolDeviation,
};

/// One audit event. The event's index in the trail is its sequence number;
/// allocation concealment is asserted on that ordering.
struct TrialEvent {
  EventKind kind = EventKind::PhaseTransition;
  TrialPhase phase = TrialPhase::Enrolling;  // phase in effect when recorded
  int day = 0;
  int patient_id = -1;
  int period_index = -1;
  std::optional<Arm> arm;
  std::optional<double> value;
  std::uint64_t token = 0;
  TrialPhase transition_to = TrialPhase::Enrolling;
  std::string note;
};

/// Ordered event log of a single replication.
class AuditTrail {
 public:
  TrialPhase phase() const { return phase_; }
  std::optional<StopReason> stop_reason() const { return stop_reason_; }
  int current_day() const { return day_; }
  const std::vector<TrialEvent>& events() const { return events_; }

  std::size_t record(TrialEvent event);
  void advance_day(int days) { day_ += days; }
  void transition(TrialPhase to);
  void stop(StopReason reason);
  /// Normal end: transition to Completed with reason FinalAnalysis.
  void complete();

 private:
  std::vector<TrialEvent> events_;
  TrialPhase phase_ = TrialPhase::Enrolling;
  std::optional<StopReason> stop_reason_;
  int day_ = 0;
};

const char* to_string(TrialPhase phase);
const char* to_string(StopReason reason);
const char* to_string(EventKind kind);

/// Checks state machine legality (allowed transitions, no phase revisited)
/// and allocation concealment (every assignment precedes the patient's first
/// Stage-2 outcome). Returns human-readable violations; empty means clean.
std::vector<std::string> validate_audit(const AuditTrail& audit);

}  // namespace rdt
