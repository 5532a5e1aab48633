#pragma once

#include "fog/error.hpp"
#include "fog/simcore/rng.hpp"

namespace fog::bench {

class CalibrationError : public Error {
 public:
  using Error::Error;
};

/// Network overhead implied by a measured (t_inf, t_rtt) pair, assuming
/// compute and network are independent.
struct OverheadCalibration {
  double mean_ms = 0.0;                // rtt - inf
  double std_ms = 0.0;                 // sqrt(max(0, rtt_std^2 - inf_std^2))
  double per_direction_mean_ms = 0.0;  // mean / 2
  double per_direction_std_ms = 0.0;   // std / sqrt(2): two independent legs add variances
};

/// Throws CalibrationError unless t_rtt_mean > t_inf_mean.
OverheadCalibration calibrate_overhead(double t_inf_mean, double t_inf_std, double t_rtt_mean, double t_rtt_std);

/// One-way latency distribution normal(mu, s) truncated at 0, with mu chosen
/// so that the truncated mean equals the per-direction mean exactly.
simcore::TruncNormal calibrated_link_latency(const OverheadCalibration& cal);

/// Location mu with mean(TruncNormal{mu, std, lower}) == target (bisection).
double truncnormal_location_for_mean(double target_mean, double std, double lower);

}  // namespace fog::bench
