#pragma once

#include "buavc/mathkit.hpp"
#include "buavc/separators.hpp"

namespace buavc {

/// Constant-velocity Kalman filter state with mean [position; velocity].
struct FilterState {
  VecX mean;
  MatX cov;
  double q = 0.5;  // white-noise acceleration density, m^2/s^3
  Mat rm;          // measurement noise, d x d

  int dim() const { return static_cast<int>(rm.rows()); }
};

struct InflationPolicy {
  double factor = 1.0;  // >= 1
};

/// True position plus a zero-mean Gaussian noise draw.
Vec measure(const Vec& true_pos, const Mat& noise_cov, Rng& rng);

/// Filter initialized on the first measurement: velocity zero, position
/// covariance equal to the measurement noise, unit velocity covariance.
FilterState kf_init(const Vec& z, const Mat& rm, double q = 0.5);

/// One predict + update cycle. The covariance is symmetrized and checked for
/// positive definiteness each step; the returned snapshot is the position
/// block.
GaussianPosition kf_predict_update(FilterState& fs, const Vec& z, double dt);

/// Covariance grown by factor^2 with the mean untouched.
GaussianPosition inflate(const GaussianPosition& other,
                         const InflationPolicy& policy);

}  // namespace buavc
