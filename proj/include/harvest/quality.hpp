#pragma once

namespace harvest {

struct QualityBand {
  double z_min = 0.2;  // m, quality 1
  double z_max = 1.0;  // m, quality 0
};

// Camera-to-ground distance along the optical axis: z / (cos(roll) cos(pitch)).
double corrected_distance(double z, double roll, double pitch);

/// Viewing-distance quality in [0, 1]: 1 at z_min, 0 at z_max and outside the band.
///
/// q(d) = ((d - z_min)^2 - (z_min - z_max)^2)^2 / (z_min - z_max)^4 on [z_min, z_max].
double coverage_quality(double distance, const QualityBand& band);

}  // namespace harvest
