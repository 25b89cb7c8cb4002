#include "buavc/separators.hpp"

#include <cmath>

namespace buavc {
namespace {

// Direction of the candidate separator for a given interpolation t:
// a(t) = [t Si + (1-t) Sj]^-1 (mj - mi), lightly regularized.
Vec direction_at(double t, const GaussianPosition& gi, const GaussianPosition& gj,
                 const Vec& dm) {
  const int d = int(dm.size());
  Mat m = t * gi.cov + (1.0 - t) * gj.cov;
  // Relative regularization: an absolute floor would dominate the solve when
  // the interpolation matrix itself is tiny (near-deterministic estimates).
  m += (1e-12 * m.trace() / d) * Mat::Identity(d, d);
  return m.partialPivLu().solve(dm);
}

// Root function of the equal-margin condition:
// g(t) = a(t)' [t^2 Si - (1-t)^2 Sj] a(t); g < 0 at t=0+, g > 0 at t=1-.
double margin_gap(double t, const GaussianPosition& gi, const GaussianPosition& gj,
                  const Vec& dm) {
  Vec a = direction_at(t, gi, gj, dm);
  return t * t * a.dot(gi.cov * a) - (1.0 - t) * (1.0 - t) * a.dot(gj.cov * a);
}

}  // namespace

Hyperplane best_linear_separator(const GaussianPosition& gi_in,
                                 const GaussianPosition& gj_in) {
  Vec dm = gj_in.mean - gi_in.mean;
  if (dm.norm() <= 1e-9) {
    throw CoincidentMeans("best_linear_separator: coincident means");
  }
  const int d = int(dm.size());
  const double len2 = dm.squaredNorm();
  const Vec dhat = dm / std::sqrt(len2);
  const double vi = dhat.dot(gi_in.cov * dhat);
  const double vj = dhat.dot(gj_in.cov * dhat);
  const double tiny = 1e-12 * len2;
  if (vi <= tiny && vj <= tiny) {
    // Deterministic limit: the midplane, as for noise-free Voronoi cells.
    return normalize({dm, dm.dot(0.5 * (gi_in.mean + gj_in.mean))});
  }
  // A vanishing variance on one side pushes the optimum onto the boundary
  // t -> 0 or 1 where the interpolation matrix loses rank; an isotropic
  // floor keeps the solve conditioned and moves the plane by O(sqrt(tiny)).
  GaussianPosition gi = gi_in, gj = gj_in;
  if (vi <= tiny) gi.cov += tiny * Mat::Identity(d, d);
  if (vj <= tiny) gj.cov += tiny * Mat::Identity(d, d);

  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    double mid = 0.5 * (lo + hi);
    (margin_gap(mid, gi, gj, dm) < 0.0 ? lo : hi) = mid;
  }
  double t = 0.5 * (lo + hi);
  Vec a = direction_at(t, gi, gj, dm);
  double b1 = a.dot(gi.mean) + t * a.dot(gi.cov * a);
  double b2 = a.dot(gj.mean) - (1.0 - t) * a.dot(gj.cov * a);
  double scale = std::max({1.0, std::abs(b1), std::abs(b2)});
  if (std::abs(b1 - b2) > 1e-6 * scale) {
    throw std::runtime_error("best_linear_separator: offset expressions disagree");
  }
  Hyperplane h = normalize({a, 0.5 * (b1 + b2)});
  if (h.normal.dot(gi.mean) > h.offset) {
    h.normal = -h.normal;
    h.offset = -h.offset;
  }
  return h;
}

double separator_margin(const Hyperplane& h, const GaussianPosition& gi,
                        const GaussianPosition& gj) {
  double u1 = (h.offset - h.normal.dot(gi.mean)) /
              std::sqrt(h.normal.dot(gi.cov * h.normal));
  double u2 = (h.normal.dot(gj.mean) - h.offset) /
              std::sqrt(h.normal.dot(gj.cov * h.normal));
  return 0.5 * (u1 + u2);
}

VPolytope obstacle_shadow_whitened(const UncertainObstacle& obs, double delta,
                                   Mat* whitener) {
  if (!(delta > 0.0 && delta < 0.75)) {
    throw std::domain_error("obstacle_separator: delta must lie in (0, 0.75)");
  }
  const int d = obs.nominal.dim();
  double eps = 1.0 - std::sqrt(1.0 - delta);
  MatX l = cholesky(MatX(obs.translation_cov));
  Mat w = Mat::Identity(d, d);
  // Forward-substitute columns of I to invert the lower factor.
  for (int c = 0; c < d; ++c) {
    for (int r = 0; r < d; ++r) {
      double v = w(r, c);
      for (int k = 0; k < r; ++k) v -= l(r, k) * w(k, c);
      w(r, c) = v / l(r, r);
    }
  }
  if (whitener) *whitener = w;
  double radius = std::sqrt(chi2_inv_cdf(1.0 - eps, d));
  return dilate(transform(obs.nominal, w), radius);
}

Hyperplane obstacle_separator(const Vec& p_hat, const UncertainObstacle& obs,
                              double delta) {
  Mat w;
  VPolytope shadow = obstacle_shadow_whitened(obs, delta, &w);
  Vec pw = w * p_hat;
  if (distance(shadow, pw) <= 1e-9) {
    throw RobotInsideShadow("obstacle_separator: estimate inside the shadow");
  }
  Hyperplane hw = max_margin_separator(pw, shadow);
  // Plane a_w . (W x) = b_w pulls back to (W' a_w) . x = b_w.
  Hyperplane h = normalize({Vec(w.transpose() * hw.normal), hw.offset});
  if (h.normal.dot(p_hat) > h.offset) {
    h.normal = -h.normal;
    h.offset = -h.offset;
  }
  return h;
}

double halfspace_probability(const Hyperplane& h, const GaussianPosition& g) {
  double sigma = std::sqrt(h.normal.dot(g.cov * h.normal));
  if (sigma <= 1e-300) return h.normal.dot(g.mean) <= h.offset ? 1.0 : 0.0;
  double z = (h.offset - h.normal.dot(g.mean)) / (std::sqrt(2.0) * sigma);
  return 0.5 + 0.5 * std::erf(z);
}

}  // namespace buavc
