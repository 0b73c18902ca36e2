#pragma once

#include <cstdint>
#include <string>

#include "harvest/geometry.hpp"
#include "harvest/planner.hpp"
#include "harvest/vehicle.hpp"

namespace harvest {

struct NoiseModel {
  bool enabled = true;
  double position_sigma = 0.03;    // m, Gaussian on the x, y, z estimate
  double thrust_amplitude = 1.0;   // N, uniform disturbance added at the plant
};

/// Full experiment definition.
struct Scenario {
  Polygon2D polygon;
  std::string name = "scenario";
  PlannerConfig planner{};
  std::size_t particles = 500;
  std::uint64_t sampling_seed = 1;
  std::uint64_t noise_seed = 2;
  NoiseModel noise{};
  State initial{1.0, 0.0, -0.8, 0.0, 0.0, 0.0};
  int step_cap = 10000;
  double coverage_threshold = 0.975;
  // End the mission once this coverage is reached and no particle has been
  // harvested for `stall_steps` consecutive steps.
  double stall_coverage = 0.999;
  int stall_steps = 50;
};

// Throws ValidationError naming the first offending field.
void validate(const Scenario& s);

}  // namespace harvest
