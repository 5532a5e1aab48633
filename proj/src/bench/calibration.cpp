#include "fog/bench/calibration.hpp"

#include <cmath>
#include <string>

namespace fog::bench {

OverheadCalibration calibrate_overhead(double t_inf_mean, double t_inf_std, double t_rtt_mean, double t_rtt_std) {
  if (!std::isfinite(t_inf_mean) || !std::isfinite(t_rtt_mean) || !(t_inf_std >= 0.0) || !(t_rtt_std >= 0.0))
    throw CalibrationError("calibration inputs must be finite with non-negative stds");
  if (!(t_rtt_mean > t_inf_mean))
    throw CalibrationError("rtt mean " + std::to_string(t_rtt_mean) + " ms does not exceed inf mean " +
                           std::to_string(t_inf_mean) + " ms");
  OverheadCalibration c;
  c.mean_ms = t_rtt_mean - t_inf_mean;
  c.std_ms = std::sqrt(std::max(0.0, t_rtt_std * t_rtt_std - t_inf_std * t_inf_std));
  c.per_direction_mean_ms = c.mean_ms / 2.0;
  c.per_direction_std_ms = c.std_ms / std::sqrt(2.0);
  return c;
}

double truncnormal_location_for_mean(double target_mean, double std, double lower) {
  if (!(target_mean > lower)) throw CalibrationError("truncated mean must lie above the lower bound");
  if (std == 0.0) return target_mean;
  auto f = [&](double mu) { return simcore::mean(simcore::TruncNormal{mu, std, lower}) - target_mean; };
  // The truncated mean is increasing in mu and exceeds mu, so the root lies below target_mean.
  double hi = target_mean;
  double lo = target_mean - std;
  while (f(lo) > 0.0) lo -= 2.0 * (hi - lo);
  for (int i = 0; i < 200 && hi - lo > 1e-12 * std::max(1.0, std::abs(hi)); ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

simcore::TruncNormal calibrated_link_latency(const OverheadCalibration& cal) {
  const double mu = truncnormal_location_for_mean(cal.per_direction_mean_ms, cal.per_direction_std_ms, 0.0);
  return simcore::TruncNormal{mu, cal.per_direction_std_ms, 0.0};
}

}  // namespace fog::bench
