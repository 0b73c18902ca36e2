#pragma once

#include <Eigen/Dense>

#include "harvest/geometry.hpp"

namespace harvest {

/// Translational state [x, vx, y, vy, z, vz]; position in m, velocity in m/s.
struct State {
  double x = 0.0, vx = 0.0;
  double y = 0.0, vy = 0.0;
  double z = 0.0, vz = 0.0;

  Vec3 position() const { return {x, y, z}; }
  Vec3 velocity() const { return {vx, vy, vz}; }
  Eigen::Matrix<double, 6, 1> as_vector() const { return {x, vx, y, vy, z, vz}; }
  static State from_vector(const Eigen::Matrix<double, 6, 1>& v) {
    return {v[0], v[1], v[2], v[3], v[4], v[5]};
  }
  bool operator==(const State&) const = default;
};

/// Commanded thrust (N) and attitude (rad); the attitude is tracked ideally.
struct ControlInput {
  double thrust = 0.0;
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;

  Attitude attitude() const { return {roll, pitch, yaw}; }
  Eigen::Vector4d as_vector() const { return {thrust, roll, pitch, yaw}; }
  bool operator==(const ControlInput&) const = default;
};

struct VehicleParams {
  double mass = 3.3;      // kg
  double gravity = 9.81;  // m/s^2

  double hover_thrust() const { return mass * gravity; }
};

struct Interval {
  double lo;
  double hi;

  double clamp(double v) const { return v < lo ? lo : (v > hi ? hi : v); }
  bool contains(double v) const { return v >= lo && v <= hi; }
  double width() const { return hi - lo; }
};

struct ActuationLimits {
  Interval thrust{0.0, 50.0};
  Interval roll{-0.31415926535897931, 0.31415926535897931};
  Interval pitch{-0.31415926535897931, 0.31415926535897931};
  Interval yaw{-3.1415926535897931, 3.1415926535897931};
  Interval vx{-2.0, 2.0};
  Interval vy{-2.0, 2.0};
  Interval vz{-2.0, 2.0};
  Interval altitude{0.0, 1.0};
};

// Time derivative of the state, in the same [x, vx, y, vy, z, vz] layout.
State dynamics(const State& s, const ControlInput& u, const VehicleParams& params);

// One classical RK4 step under a zero-order-hold input.
State step(const State& s, const ControlInput& u, const VehicleParams& params, double dt);

ControlInput clamp_input(const ControlInput& u, const ActuationLimits& lim);

bool input_within(const ControlInput& u, const ActuationLimits& lim);

}  // namespace harvest
