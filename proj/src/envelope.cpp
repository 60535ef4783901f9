#include "safespeed/envelope.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "safespeed/units.hpp"

namespace safespeed {

namespace {

void validate_physics(const PhysicsParams& params) {
  if (!(params.g_ft_s2 > 0)) throw std::invalid_argument("gravity must be positive");
  if (params.t_reaction_s < 0) throw std::invalid_argument("reaction time must be non-negative");
  if (params.k_gap_s < 0) throw std::invalid_argument("headway gap must be non-negative");
  if (!(params.ssd_cap_ft > 0)) throw std::invalid_argument("sight distance cap must be positive");
}

}  // namespace

double stopping_distance_ft(double v_mph, const PhysicsParams& params) {
  validate_physics(params);
  if (v_mph < 0) throw std::invalid_argument("speed must be non-negative");
  if (v_mph == 0) return 0;
  if (params.mu <= 0)
    throw std::invalid_argument("friction must be positive for a moving vehicle");
  const double u = mph_to_ft_s(v_mph);
  return u * u / (2.0 * params.mu * params.g_ft_s2) + u * params.t_reaction_s + u * params.k_gap_s;
}

double visible_distance_ft(double visibility_m, const PhysicsParams& params) {
  validate_physics(params);
  return std::min(m_to_ft(visibility_m), params.ssd_cap_ft);
}

EnvelopeResult solve_v_phys(double mu, double visibility_m, const PhysicsParams& params) {
  validate_physics(params);
  EnvelopeResult result;
  result.d_visible_ft = visible_distance_ft(visibility_m, params);
  result.binding = m_to_ft(visibility_m) < params.ssd_cap_ft ? BindingConstraint::visibility
                                                             : BindingConstraint::ssd_cap;
  const double d = result.d_visible_ft;
  if (mu <= 0 || d <= 0) {
    result.v_phys_mph = 0;
    return result;
  }
  // Positive root of a*u^2 + b*u = d written as 2d / (b + sqrt(b^2 + 4ad)),
  // which stays stable as b approaches zero.
  const double a = 1.0 / (2.0 * mu * params.g_ft_s2);
  const double b = params.t_reaction_s + params.k_gap_s;
  const double u = 2.0 * d / (b + std::sqrt(b * b + 4.0 * a * d));
  result.v_phys_mph = u / kMphToFtPerSec;
  return result;
}

SpeedInterval fuse(double q25_mph, double q75_mph, double v_phys_mph, double v_law_mph) {
  if (!std::isfinite(q25_mph) || !std::isfinite(q75_mph) || !std::isfinite(v_phys_mph) ||
      !std::isfinite(v_law_mph))
    throw std::invalid_argument("non-finite fusion input");
  if (q25_mph > q75_mph)
    throw std::invalid_argument("q25 " + std::to_string(q25_mph) + " exceeds q75 " +
                                std::to_string(q75_mph));
  SpeedInterval interval;
  interval.q25 = q25_mph;
  interval.q75 = q75_mph;
  interval.v_phys = v_phys_mph;
  interval.v_law = v_law_mph;
  interval.v_high = std::min(q75_mph, std::min(v_phys_mph, v_law_mph));
  interval.v_low = std::min(q25_mph, interval.v_high);
  return interval;
}

}  // namespace safespeed
