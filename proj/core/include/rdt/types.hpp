#pragma once

#include <stdexcept>
#include <string>

namespace rdt {

enum class Arm { Experimental, Control };

/// Orientation of a beneficial outcome change.
enum class ImprovementDirection { Increase, Decrease };

/// Within-patient treatment order for two-period designs.
/// ExperimentalFirst is the "AB" sequence, ControlFirst is "BA".
enum class SequenceOrder { ExperimentalFirst, ControlFirst };

/// Ball counts of the response-adaptive urn. Counts start at one or more
/// and only ever grow; add_on_success balls are added per observed outcome.
struct UrnState {
  int balls_experimental = 1;
  int balls_control = 1;
  int add_on_success = 1;
};

inline const char* to_string(Arm arm) {
  return arm == Arm::Experimental ? "experimental" : "control";
}

inline const char* to_string(SequenceOrder order) {
  return order == SequenceOrder::ExperimentalFirst ? "AB" : "BA";
}

inline double direction_sign(ImprovementDirection direction) {
  return direction == ImprovementDirection::Increase ? 1.0 : -1.0;
}

}  // namespace rdt
