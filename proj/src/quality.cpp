#include "harvest/quality.hpp"

#include <cmath>

namespace harvest {

double corrected_distance(double z, double roll, double pitch) {
  return z / (std::cos(roll) * std::cos(pitch));
}

double coverage_quality(double distance, const QualityBand& band) {
  if (!(distance >= band.z_min && distance <= band.z_max)) return 0.0;
  const double span2 = (band.z_min - band.z_max) * (band.z_min - band.z_max);
  const double off = distance - band.z_min;
  const double num = off * off - span2;
  return (num * num) / (span2 * span2);
}

}  // namespace harvest
