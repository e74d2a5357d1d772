#include "rdt/audit.hpp"

#include <map>
#include <set>

namespace rdt {

std::size_t AuditTrail::record(TrialEvent event) {
  event.phase = phase_;
  event.day = day_;
  events_.push_back(std::move(event));
  return events_.size() - 1;
}

void AuditTrail::transition(TrialPhase to) {
  TrialEvent event;
  event.kind = EventKind::PhaseTransition;
  event.transition_to = to;
  record(event);
  phase_ = to;
}

void AuditTrail::stop(StopReason reason) {
  stop_reason_ = reason;
  TrialEvent event;
  event.kind = EventKind::PhaseTransition;
  event.transition_to = TrialPhase::Stopped;
  event.note = to_string(reason);
  record(event);
  phase_ = TrialPhase::Stopped;
}

void AuditTrail::complete() {
  stop_reason_ = StopReason::FinalAnalysis;
  TrialEvent event;
  event.kind = EventKind::PhaseTransition;
  event.transition_to = TrialPhase::Completed;
  event.note = to_string(StopReason::FinalAnalysis);
  record(event);
  phase_ = TrialPhase::Completed;
}

const char* to_string(TrialPhase phase) {
  switch (phase) {
    case TrialPhase::Enrolling: return "enrolling";
    case TrialPhase::Stage1: return "stage1";
    case TrialPhase::Gate: return "gate";
    case TrialPhase::Washout: return "washout";
    case TrialPhase::Stage2: return "stage2";
    case TrialPhase::Stopped: return "stopped";
    case TrialPhase::Completed: return "completed";
  }
  return "?";
}

const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::Stage1Futility: return "stage1-futility";
    case StopReason::InterimFutility: return "interim-futility";
    case StopReason::InterimEfficacy: return "interim-efficacy";
    case StopReason::FinalAnalysis: return "final-analysis";
    case StopReason::DesignInfeasible: return "design-infeasible";
  }
  return "?";
}

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Enrolled: return "enrolled";
    case EventKind::PhaseTransition: return "phase-transition";
    case EventKind::Assignment: return "assignment";
    case EventKind::OutcomeObserved: return "outcome";
    case EventKind::GateEvaluated: return "gate";
    case EventKind::InterimEvaluated: return "interim";
    case EventKind::FinalAnalysisDone: return "final-analysis";
    case EventKind::ProtocolDeviation: return "protocol-deviation";
  }
  return "?";
}

std::vector<std::string> validate_audit(const AuditTrail& audit) {
  std::vector<std::string> issues;

  static const std::set<std::pair<TrialPhase, TrialPhase>> legal = {
      {TrialPhase::Enrolling, TrialPhase::Stage1},
      {TrialPhase::Stage1, TrialPhase::Gate},
      {TrialPhase::Gate, TrialPhase::Stopped},
      {TrialPhase::Gate, TrialPhase::Washout},
      {TrialPhase::Washout, TrialPhase::Stage2},
      {TrialPhase::Stage2, TrialPhase::Stopped},
      {TrialPhase::Stage2, TrialPhase::Completed},
  };

  TrialPhase current = TrialPhase::Enrolling;
  std::set<TrialPhase> visited{current};
  for (const auto& event : audit.events()) {
    if (event.kind != EventKind::PhaseTransition) {
      continue;
    }
    const auto edge = std::make_pair(current, event.transition_to);
    if (!legal.contains(edge)) {
      issues.push_back(std::string("illegal transition ") + to_string(current) + " -> " +
                       to_string(event.transition_to));
    }
    if (visited.contains(event.transition_to)) {
      issues.push_back(std::string("phase revisited: ") + to_string(event.transition_to));
    }
    visited.insert(event.transition_to);
    current = event.transition_to;
  }

  // Concealment: all of a patient's assignment tokens must exist before the
  // patient's first Stage-2 outcome is observed.
  std::map<int, std::size_t> first_stage2_outcome;
  const auto& events = audit.events();
  for (std::size_t seq = 0; seq < events.size(); ++seq) {
    const auto& event = events[seq];
    if (event.kind == EventKind::OutcomeObserved && event.phase == TrialPhase::Stage2 &&
        !first_stage2_outcome.contains(event.patient_id)) {
      first_stage2_outcome[event.patient_id] = seq;
    }
  }
  for (std::size_t seq = 0; seq < events.size(); ++seq) {
    const auto& event = events[seq];
    if (event.kind != EventKind::Assignment) {
      continue;
    }
    const auto it = first_stage2_outcome.find(event.patient_id);
    if (it != first_stage2_outcome.end() && seq >= it->second) {
      issues.push_back("assignment after outcome for patient " +
                       std::to_string(event.patient_id));
    }
  }
  return issues;
}

}  // namespace rdt
