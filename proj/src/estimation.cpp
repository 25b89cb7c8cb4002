#include "buavc/estimation.hpp"

#include <stdexcept>

namespace buavc {

Vec measure(const Vec& true_pos, const Mat& noise_cov, Rng& rng) {
  return sample_gaussian(true_pos, noise_cov, rng);
}

FilterState kf_init(const Vec& z, const Mat& rm, double q) {
  const int d = static_cast<int>(z.size());
  FilterState fs;
  fs.mean = VecX::Zero(2 * d);
  fs.mean.head(d) = z;
  fs.cov = MatX::Zero(2 * d, 2 * d);
  fs.cov.topLeftCorner(d, d) = rm;
  fs.cov.bottomRightCorner(d, d) = Mat::Identity(d, d);
  fs.q = q;
  fs.rm = rm;
  return fs;
}

GaussianPosition kf_predict_update(FilterState& fs, const Vec& z, double dt) {
  if (dt <= 0.0) {
    throw std::invalid_argument("kf_predict_update requires dt > 0");
  }
  const int d = fs.dim();
  const Mat id = Mat::Identity(d, d);

  MatX f = MatX::Identity(2 * d, 2 * d);
  f.topRightCorner(d, d) = dt * id;
  MatX qn = MatX::Zero(2 * d, 2 * d);
  qn.topLeftCorner(d, d) = fs.q * (dt * dt * dt / 3.0) * id;
  qn.topRightCorner(d, d) = fs.q * (dt * dt / 2.0) * id;
  qn.bottomLeftCorner(d, d) = qn.topRightCorner(d, d);
  qn.bottomRightCorner(d, d) = fs.q * dt * id;

  fs.mean = f * fs.mean;
  fs.cov = f * fs.cov * f.transpose() + qn;

  const MatX s = fs.cov.topLeftCorner(d, d) + MatX(fs.rm);
  const MatX k = fs.cov.leftCols(d) * s.inverse();
  const VecX innov = VecX(z) - VecX(fs.mean.head(d));
  fs.mean += k * innov;

  // Joseph form keeps the update numerically symmetric positive definite.
  MatX ikh = MatX::Identity(2 * d, 2 * d);
  ikh.leftCols(d) -= k;
  fs.cov = ikh * fs.cov * ikh.transpose() + k * fs.rm * k.transpose();
  fs.cov = 0.5 * (fs.cov + fs.cov.transpose()).eval();
  cholesky(fs.cov);  // throws NotSpdError if the covariance degenerated

  GaussianPosition out;
  out.mean = fs.mean.head(d);
  out.cov = fs.cov.topLeftCorner(d, d);
  return out;
}

GaussianPosition inflate(const GaussianPosition& other,
                         const InflationPolicy& policy) {
  if (policy.factor < 1.0) {
    throw std::invalid_argument("inflation factor must be at least 1");
  }
  GaussianPosition out = other;
  out.cov *= policy.factor * policy.factor;
  return out;
}

}  // namespace buavc
