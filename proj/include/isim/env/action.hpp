#pragma once

#include <array>

#include "isim/errors.hpp"

namespace isim::env {

// Physical bounds of the 5-D timing/backchannel control. Time-valued
// dimensions (target latency, max wait) are in 0.1 s units.
struct ActionBounds {
  std::array<double, 5> lower{10.0, 3.0, 0.40, 0.00, 0.85};
  std::array<double, 5> upper{24.0, 9.0, 0.85, 0.70, 1.15};

  double range(int i) const { return upper[i] - lower[i]; }
};

struct Action {
  double target_latency = 17.0;        // a1: desired gap after the patient ends
  double max_wait = 6.0;               // a2: extra silence tolerated past a1
  double backchannel_rate = 0.625;     // a3
  double interruption_tolerance = 0.35;  // a4: fraction of the tail window
  double immediacy_gain = 1.0;         // a5: scales micro-behavior promptness

  std::array<double, 5> to_array() const {
    return {target_latency, max_wait, backchannel_rate, interruption_tolerance,
            immediacy_gain};
  }
  static Action from_array(const std::array<double, 5>& v) {
    return {v[0], v[1], v[2], v[3], v[4]};
  }
};

// Elementwise clamp into [lower, upper]. Non-finite components are a
// numeric fault, not a clampable value.
Action clamp_action(const Action& a, const ActionBounds& b);

// Midpoint of the bounds; the zero-initialized actor head starts here.
Action midpoint_action(const ActionBounds& b);

}  // namespace isim::env
