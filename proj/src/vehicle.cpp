#include "harvest/vehicle.hpp"

#include <cmath>

namespace harvest {

State dynamics(const State& s, const ControlInput& u, const VehicleParams& params) {
  const double cphi = std::cos(u.roll), sphi = std::sin(u.roll);
  const double cth = std::cos(u.pitch), sth = std::sin(u.pitch);
  const double cpsi = std::cos(u.yaw), spsi = std::sin(u.yaw);
  const double a = u.thrust / params.mass;
  State d;
  d.x = s.vx;
  d.vx = a * (cpsi * sth * cphi + spsi * sphi);
  d.y = s.vy;
  d.vy = a * (spsi * sth * cphi - cpsi * sphi);
  d.z = s.vz;
  d.vz = -params.gravity + a * (cth * cphi);
  return d;
}

State step(const State& s, const ControlInput& u, const VehicleParams& params, double dt) {
  using V = Eigen::Matrix<double, 6, 1>;
  const auto f = [&](const V& x) { return dynamics(State::from_vector(x), u, params).as_vector(); };
  const V x0 = s.as_vector();
  const V k1 = f(x0);
  const V k2 = f(x0 + 0.5 * dt * k1);
  const V k3 = f(x0 + 0.5 * dt * k2);
  const V k4 = f(x0 + dt * k3);
  return State::from_vector(x0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

ControlInput clamp_input(const ControlInput& u, const ActuationLimits& lim) {
  return {lim.thrust.clamp(u.thrust), lim.roll.clamp(u.roll), lim.pitch.clamp(u.pitch),
          lim.yaw.clamp(u.yaw)};
}

bool input_within(const ControlInput& u, const ActuationLimits& lim) {
  return lim.thrust.contains(u.thrust) && lim.roll.contains(u.roll) &&
         lim.pitch.contains(u.pitch) && lim.yaw.contains(u.yaw);
}

}  // namespace harvest
