#pragma once

#include "safespeed/types.hpp"

namespace safespeed {

enum class BindingConstraint { visibility, ssd_cap };

struct EnvelopeResult {
  double v_phys_mph = 0;
  double d_visible_ft = 0;
  BindingConstraint binding = BindingConstraint::ssd_cap;
};

// Total stopping distance in feet at speed v_mph: braking u^2/(2 mu g) plus
// reaction travel u*t_reaction plus headway u*k_gap, with u in ft/s.
double stopping_distance_ft(double v_mph, const PhysicsParams& params);

// Sight distance available for stopping: visibility converted to feet, never
// above the cap.
double visible_distance_ft(double visibility_m, const PhysicsParams& params);

// Largest speed whose stopping distance fits inside the visible distance.
// mu <= 0 or no visible distance pins the speed to zero.
EnvelopeResult solve_v_phys(double mu, double visibility_m, const PhysicsParams& params);

// Interval fusion: the upper bound yields to physics and law, the lower bound
// never crosses the upper. q25 above q75 is a caller bug.
SpeedInterval fuse(double q25_mph, double q75_mph, double v_phys_mph, double v_law_mph);

}  // namespace safespeed
