#pragma once

#include <limits>
#include <span>

#include "crowdsim/errors.hpp"

namespace crowdsim::walk {

struct WalkParams {
  double desired_speed = 1.33;    // m/s
  double relaxation_time = 0.5;   // s
  double repulsion_strength = 2.0;  // m/s^2
  double repulsion_range = 1.0;     // m
  double body_radius = 0.25;        // m
  double max_speed = 2.0;           // m/s

  void validate() const;
};

/// Headway sentinel: no agent ahead within the lookahead.
constexpr double kOpen = std::numeric_limits<double>::infinity();
constexpr double kLookahead = 10.0;  // m

/// Center-to-center distance to the nearest agent strictly ahead on the
/// current link, looking across the boundary onto the next route link.
/// `same_link` and `next_link` are occupant offsets sorted ascending;
/// kOpen when nothing is within kLookahead.
double headway(double offset, double link_length,
               std::span<const double> same_link,
               std::span<const double> next_link);

struct StepResult {
  double advance = 0.0;  // m actually moved this step
  double speed = 0.0;    // m/s after the step
  bool capped = false;   // hit the no-passing limit
};

/// One dt of leader-follower dynamics:
///   a  = (v0 - v)/tau - A exp((2r - h)/B)   (repulsion 0 when h is kOpen)
///   v' = clamp(v + a dt, 0, max_speed), advance = v' dt,
/// with the advance capped at h - 2r so an agent never passes through the
/// one ahead; the reported speed matches the capped motion.
StepResult step_kinematics(double speed, double headway_m,
                           const WalkParams& params, double dt);

}  // namespace crowdsim::walk
