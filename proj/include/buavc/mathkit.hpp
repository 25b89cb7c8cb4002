#pragma once

#include <Eigen/Dense>

#include <random>
#include <stdexcept>

namespace buavc {

// Spatial vectors/matrices are runtime-sized (2D or 3D per scenario) but
// stack-allocated via Eigen's max-size template parameters.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 3, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 3, 3>;

// Larger stack-allocated variants for Kalman state covariances (up to 6x6).
using VecX = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 6, 1>;
using MatX = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 6, 6>;

struct NotSpdError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Gauss error function. Thin wrapper over std::erf (absolute error well
/// below 1e-14 over the whole axis; saturates to +-1 beyond |x| ~ 6).
double erf(double x);

/// Inverse of erf on (-1, 1). Rational initial guess refined with Newton
/// steps on erf itself; accurate to ~1 ulp. Throws std::domain_error
/// outside the open interval.
double erf_inv(double y);

/// Quantile of the chi-squared distribution with dof in {2, 3}.
/// dof == 2 has the closed form -2 ln(1 - p); dof == 3 is solved by
/// bisection on the CDF written in terms of erf. p in [0, 1).
double chi2_inv_cdf(double p, int dof);

/// Lower-triangular Cholesky factor of a symmetric positive definite
/// matrix. Throws NotSpdError when a pivot falls at or below 1e-14, and
/// when the input is not symmetric to 1e-12.
MatX cholesky(const MatX& s);

/// Deterministic random stream: mt19937_64 core with explicit uniform and
/// Box-Muller normal generation so that sequences are bit-reproducible.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  /// Substream derived from (seed, stream_id) by splitmix64 so per-robot
  /// streams are independent of iteration order.
  static Rng stream(uint64_t seed, uint64_t stream_id);

  uint64_t next_u64() { return gen_(); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1]; safe as a log argument.
  double uniform_pos() {
    return static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53;
  }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller with one cached spare.
  double normal();

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Draw from N(mean, cov) as mean + L z with L the Cholesky factor.
/// A covariance whose entries are all at most 1e-18 in magnitude is
/// treated as exactly zero and returns the mean without consuming
/// randomness.
Vec sample_gaussian(const Vec& mean, const Mat& cov, Rng& rng);

inline double sq(double x) { return x * x; }

}  // namespace buavc
