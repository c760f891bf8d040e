#include "crowdsim/walking.hpp"

#include <algorithm>
#include <cmath>

namespace crowdsim::walk {

void WalkParams::validate() const {
  if (desired_speed <= 0 || relaxation_time <= 0 || repulsion_strength <= 0 ||
      repulsion_range <= 0 || body_radius <= 0 || max_speed <= 0)
    throw ContractError("walk parameters must be positive");
  if (desired_speed > max_speed)
    throw ContractError("desired speed exceeds max speed");
}

double headway(double offset, double link_length,
               std::span<const double> same_link,
               std::span<const double> next_link) {
  // nearest occupant strictly ahead on the same link
  auto it = std::upper_bound(same_link.begin(), same_link.end(), offset);
  if (it != same_link.end()) {
    const double h = *it - offset;
    return h <= kLookahead ? h : kOpen;
  }
  if (!next_link.empty()) {
    const double h = (link_length - offset) + next_link.front();
    return h <= kLookahead ? h : kOpen;
  }
  return kOpen;
}

StepResult step_kinematics(double speed, double headway_m,
                           const WalkParams& params, double dt) {
  double accel = (params.desired_speed - speed) / params.relaxation_time;
  if (headway_m != kOpen) {
    // skip the exp once the term is below ~1e-4 m/s^2
    const double gap = 2.0 * params.body_radius - headway_m;
    if (gap > -10.0 * params.repulsion_range)
      accel -= params.repulsion_strength * std::exp(gap / params.repulsion_range);
  }
  StepResult r;
  r.speed = std::clamp(speed + accel * dt, 0.0, params.max_speed);
  r.advance = r.speed * dt;
  if (headway_m != kOpen) {
    const double limit = std::max(0.0, headway_m - 2.0 * params.body_radius);
    if (r.advance > limit) {
      r.advance = limit;
      r.speed = limit / dt;
      r.capped = true;
    }
  }
  return r;
}

}  // namespace crowdsim::walk
