#include "harvest/scenario.hpp"

#include <cmath>
#include <string>

#include "harvest/errors.hpp"

namespace harvest {

namespace {

void require(bool ok, const char* field, const char* constraint) {
  if (!ok) throw ValidationError(field, constraint);
}

void require_interval(const Interval& iv, const char* field) {
  require(std::isfinite(iv.lo) && std::isfinite(iv.hi) && iv.lo < iv.hi, field,
          "must be finite with min < max");
}

}  // namespace

void validate(const Scenario& s) {
  const PlannerConfig& p = s.planner;
  require(p.camera.hfov > 0.0 && p.camera.hfov < M_PI, "camera.hfov", "must lie in (0, pi)");
  require(p.camera.vfov > 0.0 && p.camera.vfov < M_PI, "camera.vfov", "must lie in (0, pi)");
  require(p.vehicle.mass > 0.0, "vehicle.mass", "must be positive");
  require(p.vehicle.gravity > 0.0, "vehicle.gravity", "must be positive");

  const CostWeights& w = p.weights;
  require(w.movement >= 0.0, "weights.w_x", "must be non-negative");
  require(w.remaining >= 0.0, "weights.w_i", "must be non-negative");
  require(w.quality >= 0.0, "weights.w_q", "must be non-negative");
  require(w.smoothness >= 0.0, "weights.w_u", "must be non-negative");
  require(w.altitude_floor >= 0.0, "weights.w_z", "must be non-negative");
  require(w.guidance >= 0.0, "weights.w_goal", "must be non-negative");
  require(w.vertical_damping >= 0.0, "weights.w_vz", "must be non-negative");

  const ActuationLimits& l = p.limits;
  require_interval(l.thrust, "limits.thrust");
  require_interval(l.roll, "limits.roll");
  require_interval(l.pitch, "limits.pitch");
  require_interval(l.yaw, "limits.yaw");
  require_interval(l.vx, "limits.vx");
  require_interval(l.vy, "limits.vy");
  require_interval(l.vz, "limits.vz");
  require_interval(l.altitude, "limits.altitude");
  require(l.roll.lo > -M_PI_2 && l.roll.hi < M_PI_2, "limits.roll", "must stay inside (-pi/2, pi/2)");
  require(l.pitch.lo > -M_PI_2 && l.pitch.hi < M_PI_2, "limits.pitch", "must stay inside (-pi/2, pi/2)");

  require(p.band.z_min >= 0.0 && p.band.z_min < p.band.z_max, "quality",
          "requires 0 <= z_min < z_max");
  require(p.surrogate.sharpness > 0.0, "surrogate.kappa", "must be positive");
  require(p.horizon >= 1, "horizon", "must be at least 1");
  require(p.dt > 0.0, "dt", "must be positive");
  require(p.max_corrected_distance > 0.0, "max_corrected_distance", "must be positive");
  require(p.harvest_inset >= 0.0 && std::isfinite(p.harvest_inset), "harvest_inset", "must be finite and non-negative");
  require(p.solver.max_iterations >= 1, "solver.max_iterations", "must be at least 1");

  require(s.particles >= 1, "particles", "must be at least 1");
  require(s.noise.position_sigma >= 0.0, "noise.position_sigma", "must be non-negative");
  require(s.noise.thrust_amplitude >= 0.0, "noise.thrust_amplitude", "must be non-negative");
  require(s.initial.as_vector().allFinite(), "initial_state", "must be finite");
  require(s.initial.z >= 0.0, "initial_state.position", "z must be non-negative");
  require(s.step_cap >= 0, "step_cap", "must be non-negative");
  require(s.coverage_threshold >= 0.0 && s.coverage_threshold <= 1.0, "coverage_threshold",
          "must lie in [0, 1]");
  require(polygon_area(s.polygon) >= 1e-12, "polygon", "area must be at least 1e-12 m^2");
}

}  // namespace harvest
