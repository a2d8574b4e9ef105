#include "bolab/scaling_fit.hpp"

#include <cmath>

#include "bolab/errors.hpp"

namespace bolab {

ScalingFit fit_scaling_exponent(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw UsageError("scaling fit needs at least 3 points");
  const double n = static_cast<double>(points.size());
  double sx = 0, sy = 0;
  for (const auto& [h, v] : points) {
    if (!(h > 0.0) || !(v > 0.0) || !std::isfinite(h) || !std::isfinite(v)) {
      throw UsageError("scaling fit needs positive finite h and values");
    }
    sx += std::log(h);
    sy += std::log(v);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (const auto& [h, v] : points) {
    const double dx = std::log(h) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(v) - my);
  }
  if (sxx == 0.0) throw UsageError("scaling fit needs distinct h values");
  ScalingFit fit;
  fit.order = sxy / sxx;
  fit.log_prefactor = my - fit.order * mx;
  double rss = 0;
  for (const auto& [h, v] : points) {
    const double r = std::log(v) - fit.log_prefactor - fit.order * std::log(h);
    rss += r * r;
  }
  fit.stderr_order = std::sqrt(rss / (n - 2.0) / sxx);
  return fit;
}

}  // namespace bolab
