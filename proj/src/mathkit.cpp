#include "buavc/mathkit.hpp"

#include <cmath>

namespace buavc {
namespace {

// Acklam's rational approximation to the standard normal quantile,
// max relative error ~1.15e-9; used only as the Newton starting point.
double norm_quantile_approx(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  if (p < p_low) {
    double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - p_low) {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double q = p - 0.5;
  double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double erf(double x) { return std::erf(x); }

double erf_inv(double y) {
  if (!(y > -1.0 && y < 1.0)) {
    throw std::domain_error("erf_inv: argument must lie in (-1, 1)");
  }
  if (y == 0.0) return 0.0;
  // erf_inv(y) = Phi^{-1}((y + 1) / 2) / sqrt(2)
  double x = norm_quantile_approx(0.5 * (y + 1.0)) * M_SQRT1_2;
  // Newton on erf(x) - y; derivative 2/sqrt(pi) exp(-x^2). Two steps take
  // the ~1e-9 seed to full double precision; a third guards the tails.
  const double two_over_sqrt_pi = 2.0 / std::sqrt(M_PI);
  for (int it = 0; it < 3; ++it) {
    double err = std::erf(x) - y;
    double deriv = two_over_sqrt_pi * std::exp(-x * x);
    if (deriv == 0.0) break;
    x -= err / deriv;
  }
  return x;
}

double chi2_inv_cdf(double p, int dof) {
  if (dof != 2 && dof != 3) {
    throw std::domain_error("chi2_inv_cdf: dof must be 2 or 3");
  }
  if (!(p >= 0.0 && p < 1.0)) {
    throw std::domain_error("chi2_inv_cdf: p must lie in [0, 1)");
  }
  if (p == 0.0) return 0.0;
  if (dof == 2) return -2.0 * std::log1p(-p);
  // dof == 3: CDF(q) = erf(sqrt(q/2)) - sqrt(2 q / pi) exp(-q/2).
  auto cdf3 = [](double q) {
    return std::erf(std::sqrt(0.5 * q)) -
           std::sqrt(2.0 * q / M_PI) * std::exp(-0.5 * q);
  };
  double lo = 0.0, hi = 1.0;
  while (cdf3(hi) < p) hi *= 2.0;
  while (hi - lo > 1e-12) {
    double mid = 0.5 * (lo + hi);
    (cdf3(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

MatX cholesky(const MatX& s) {
  const Eigen::Index n = s.rows();
  if (s.cols() != n) throw NotSpdError("cholesky: matrix not square");
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      if (std::abs(s(i, j) - s(j, i)) > 1e-12) {
        throw NotSpdError("cholesky: matrix not symmetric");
      }
    }
  }
  MatX l = MatX::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = s(j, j);
    for (Eigen::Index k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (d <= 1e-14) throw NotSpdError("cholesky: matrix not positive definite");
    l(j, j) = std::sqrt(d);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double v = s(i, j);
      for (Eigen::Index k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / l(j, j);
    }
  }
  return l;
}

Rng Rng::stream(uint64_t seed, uint64_t stream_id) {
  // splitmix64 over seed xor golden-ratio-scrambled id.
  uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream_id + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  z = z ^ (z >> 31);
  return Rng(z);
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform_pos();
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double c = std::cos(2.0 * M_PI * u2);
  double s = std::sin(2.0 * M_PI * u2);
  spare_ = r * s;
  has_spare_ = true;
  return r * c;
}

Vec sample_gaussian(const Vec& mean, const Mat& cov, Rng& rng) {
  if (cov.cwiseAbs().maxCoeff() <= 1e-18) return mean;
  MatX l = cholesky(MatX(cov));
  Vec z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  Vec out = mean;
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) out[i] += l(i, j) * z[j];
  }
  return out;
}

}  // namespace buavc
