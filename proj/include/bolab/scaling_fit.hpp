#pragma once

// Least-squares power-law fits value ~ K h^p.

#include <utility>
#include <vector>

namespace bolab {

struct ScalingFit {
  double order = 0.0;
  double stderr_order = 0.0;
  double log_prefactor = 0.0;
};

/// Slope of log(value) against log(h). Needs >= 3 points with positive h and
/// value; otherwise UsageError.
ScalingFit fit_scaling_exponent(const std::vector<std::pair<double, double>>& points);

}  // namespace bolab
