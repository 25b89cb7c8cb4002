#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "buavc/separators.hpp"
#include "test_support.hpp"

using namespace buavc;
using testsupport::vec2;
using testsupport::vec3;

namespace {

double phi(double u) { return 0.5 + 0.5 * std::erf(u / std::sqrt(2.0)); }

// Worse of the two misclassification probabilities for a given plane.
double max_misclass(const Hyperplane& h, const GaussianPosition& gi,
                    const GaussianPosition& gj) {
  double si = std::sqrt(h.normal.dot(gi.cov * h.normal));
  double sj = std::sqrt(h.normal.dot(gj.cov * h.normal));
  double pi_wrong = 1.0 - phi((h.offset - h.normal.dot(gi.mean)) / si);
  double pj_wrong = phi((h.offset - h.normal.dot(gj.mean)) / sj);
  return std::max(pi_wrong, pj_wrong);
}

// Dense sweep over plane angles; the optimal offset for a fixed direction
// equalizes the two tail margins in closed form.
double grid_minimax(const GaussianPosition& gi, const GaussianPosition& gj,
                    int n_angles = 3600) {
  double best = 1.0;
  for (int k = 0; k < n_angles; ++k) {
    double th = 2.0 * M_PI * k / n_angles;
    Vec a = vec2(std::cos(th), std::sin(th));
    double si = std::sqrt(a.dot(gi.cov * a));
    double sj = std::sqrt(a.dot(gj.cov * a));
    double u = a.dot(gj.mean - gi.mean) / (si + sj);
    best = std::min(best, 1.0 - phi(u));
  }
  return best;
}

GaussianPosition random_gaussian(int d, Rng& rng, double spread) {
  Vec m(d);
  for (int i = 0; i < d; ++i) m[i] = rng.uniform(-spread, spread);
  return {m, testsupport::random_spd(d, rng, 0.02, 0.5)};
}

}  // namespace

TEST_CASE("best_linear_separator closed-form example") {
  GaussianPosition gi{vec2(0, 0), Mat::Identity(2, 2)};
  GaussianPosition gj{vec2(4, 0), Mat(4.0 * Mat::Identity(2, 2))};
  Hyperplane h = best_linear_separator(gi, gj);
  // Interpolant root t = 2/3 puts the plane at x = 4/3.
  CHECK(std::abs(h.normal[0] - 1.0) <= 1e-9);
  CHECK(std::abs(h.normal[1]) <= 1e-9);
  CHECK(std::abs(h.offset - 4.0 / 3.0) <= 1e-9);
  double u1 = (h.offset - h.normal.dot(gi.mean)) / std::sqrt(h.normal.dot(gi.cov * h.normal));
  double u2 = (h.normal.dot(gj.mean) - h.offset) / std::sqrt(h.normal.dot(gj.cov * h.normal));
  CHECK(std::abs(u1 - 4.0 / 3.0) <= 1e-8);
  CHECK(std::abs(u1 - u2) <= 1e-8);
}

TEST_CASE("equal isotropic covariances give the Voronoi midplane") {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    int d = (trial % 2) ? 3 : 2;
    double s = rng.uniform(0.01, 0.5);
    Vec mi(d), mj(d);
    for (int i = 0; i < d; ++i) {
      mi[i] = rng.uniform(-3, 3);
      mj[i] = rng.uniform(-3, 3);
    }
    if ((mj - mi).norm() < 0.1) continue;
    Mat cov = s * s * Mat::Identity(d, d);
    Hyperplane h = best_linear_separator({mi, cov}, {mj, cov});
    Vec n_expect = Vec((mj - mi) / (mj - mi).norm());
    double b_expect = n_expect.dot(0.5 * (mi + mj));
    CHECK((h.normal - n_expect).norm() <= 1e-9);
    CHECK(std::abs(h.offset - b_expect) <= 1e-9);
  }
}

TEST_CASE("equal anisotropic covariances pass through the midpoint") {
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    GaussianPosition gi = random_gaussian(2, rng, 2.0);
    GaussianPosition gj = random_gaussian(2, rng, 2.0);
    gj.cov = gi.cov;
    if ((gj.mean - gi.mean).norm() < 0.1) continue;
    Hyperplane h = best_linear_separator(gi, gj);
    CHECK(std::abs(h.normal.dot(0.5 * (gi.mean + gj.mean)) - h.offset) <= 1e-9);
  }
}

TEST_CASE("swapping the robots negates the separator") {
  Rng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    int d = (trial % 2) ? 3 : 2;
    GaussianPosition gi = random_gaussian(d, rng, 2.0);
    GaussianPosition gj = random_gaussian(d, rng, 2.0);
    if ((gj.mean - gi.mean).norm() < 0.1) continue;
    Hyperplane hij = best_linear_separator(gi, gj);
    Hyperplane hji = best_linear_separator(gj, gi);
    CHECK((hij.normal + hji.normal).norm() <= 1e-8);
    CHECK(std::abs(hij.offset + hji.offset) <= 1e-8);
  }
}

TEST_CASE("separator margins agree and beat an angle sweep") {
  Rng rng(14);
  for (int trial = 0; trial < 25; ++trial) {
    GaussianPosition gi = random_gaussian(2, rng, 2.0);
    GaussianPosition gj = random_gaussian(2, rng, 2.0);
    if ((gj.mean - gi.mean).norm() < 0.3) continue;
    Hyperplane h = best_linear_separator(gi, gj);
    double u1 = (h.offset - h.normal.dot(gi.mean)) /
                std::sqrt(h.normal.dot(gi.cov * h.normal));
    double u2 = (h.normal.dot(gj.mean) - h.offset) /
                std::sqrt(h.normal.dot(gj.cov * h.normal));
    CHECK(std::abs(u1 - u2) <= 1e-8);
    CHECK(max_misclass(h, gi, gj) <= grid_minimax(gi, gj) + 1e-4);
  }
}

TEST_CASE("separator is rotation equivariant") {
  Rng rng(15);
  for (int trial = 0; trial < 50; ++trial) {
    GaussianPosition gi = random_gaussian(2, rng, 2.0);
    GaussianPosition gj = random_gaussian(2, rng, 2.0);
    if ((gj.mean - gi.mean).norm() < 0.2) continue;
    double ang = rng.uniform(0.0, 2.0 * M_PI);
    Mat rot(2, 2);
    rot << std::cos(ang), -std::sin(ang), std::sin(ang), std::cos(ang);
    Hyperplane h = best_linear_separator(gi, gj);
    GaussianPosition ri{Vec(rot * gi.mean), Mat(rot * gi.cov * rot.transpose())};
    GaussianPosition rj{Vec(rot * gj.mean), Mat(rot * gj.cov * rot.transpose())};
    Hyperplane rh = best_linear_separator(ri, rj);
    CHECK((rh.normal - Vec(rot * h.normal)).norm() <= 1e-7);
    CHECK(std::abs(rh.offset - h.offset) <= 1e-7);
  }
}

TEST_CASE("coincident means are rejected") {
  GaussianPosition g{vec2(1, 1), Mat(0.01 * Mat::Identity(2, 2))};
  CHECK_THROWS_AS(best_linear_separator(g, g), CoincidentMeans);
}

TEST_CASE("halfspace_probability matches Monte Carlo") {
  Rng rng(16);
  GaussianPosition g{vec2(0.3, -0.2), testsupport::random_spd(2, rng, 0.05, 0.4)};
  Hyperplane h = normalize({vec2(1.0, 0.7), 0.5});
  double p = halfspace_probability(h, g);
  int hits = 0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    Vec x = sample_gaussian(g.mean, g.cov, rng);
    if (h.normal.dot(x) <= h.offset) ++hits;
  }
  CHECK(std::abs(double(hits) / n - p) <= 0.002);
}

TEST_CASE("obstacle_separator identity-covariance example") {
  UncertainObstacle obs{make_box(vec2(4.0, -1.0), vec2(5.0, 1.0)),
                        Mat::Identity(2, 2)};
  Hyperplane h = obstacle_separator(vec2(0.0, 0.0), obs, 0.19);
  // eps = 1 - sqrt(0.81) = 0.1; shadow radius sqrt(-2 ln 0.1) = 2.14597.
  CHECK(std::abs(h.normal[0] - 1.0) <= 1e-8);
  CHECK(std::abs(h.normal[1]) <= 1e-8);
  CHECK(std::abs(h.offset - 1.8540339737106528) <= 1e-8);
  CHECK(h.normal.dot(vec2(0.0, 0.0)) < h.offset);
}

TEST_CASE("chi-square quantile covers the stated translation mass") {
  Rng rng(17);
  for (int d : {2, 3}) {
    Mat cov = testsupport::random_spd(d, rng, 0.02, 0.2);
    double eps = 0.1;
    double q = chi2_inv_cdf(1.0 - eps, d);
    MatX l = cholesky(MatX(cov));
    Eigen::MatrixXd li = Eigen::MatrixXd(l).inverse();
    int inside = 0;
    const int n = 1000000;
    Vec zero = Vec::Zero(d);
    for (int i = 0; i < n; ++i) {
      Vec x = sample_gaussian(zero, cov, rng);
      Eigen::VectorXd y = li * Eigen::VectorXd(x);
      if (y.squaredNorm() <= q) ++inside;
    }
    CHECK(std::abs(double(inside) / n - (1.0 - eps)) <= 0.002);
  }
}

TEST_CASE("translated obstacle stays inside the shadow with the stated mass") {
  Rng rng(18);
  for (int trial = 0; trial < 3; ++trial) {
    double delta = 0.1 + 0.15 * trial;
    double eps = 1.0 - std::sqrt(1.0 - delta);
    UncertainObstacle obs{
        make_box(vec2(rng.uniform(1.0, 2.0), rng.uniform(-1.0, 0.0)),
                 vec2(rng.uniform(2.5, 3.5), rng.uniform(0.5, 1.5))),
        testsupport::random_spd(2, rng, 0.005, 0.05)};
    Mat w;
    VPolytope shadow = obstacle_shadow_whitened(obs, delta, &w);
    int contained = 0;
    const int n = 100000;
    Vec zero = Vec::Zero(2);
    for (int i = 0; i < n; ++i) {
      Vec d = sample_gaussian(zero, obs.translation_cov, rng);
      bool all_in = true;
      for (const Vec& v : obs.nominal.vertices) {
        if (!vcontains(shadow, Vec(w * (v + d)), 1e-9)) {
          all_in = false;
          break;
        }
      }
      if (all_in) ++contained;
    }
    // Conservative construction: containment frequency at least 1 - eps.
    CHECK(double(contained) / n >= 1.0 - eps - 0.002);
  }
}

TEST_CASE("separator clears the translated obstacle when inside the shadow") {
  Rng rng(19);
  UncertainObstacle obs{make_box(vec2(2.0, -0.5), vec2(3.0, 0.5)),
                        Mat(0.03 * Mat::Identity(2, 2))};
  Vec p = vec2(-0.5, 0.2);
  double delta = 0.1;
  Hyperplane h = obstacle_separator(p, obs, delta);
  Mat w;
  VPolytope shadow = obstacle_shadow_whitened(obs, delta, &w);
  for (int i = 0; i < 20000; ++i) {
    Vec d = sample_gaussian(Vec::Zero(2), obs.translation_cov, rng);
    bool all_in = true;
    for (const Vec& v : obs.nominal.vertices) {
      all_in = all_in && vcontains(shadow, Vec(w * (v + d)), 1e-9);
    }
    if (!all_in) continue;
    for (const Vec& v : obs.nominal.vertices) {
      CHECK(h.normal.dot(Vec(v + d)) >= h.offset - 1e-9);
    }
  }
}

TEST_CASE("obstacle_separator offset grows with delta") {
  UncertainObstacle obs{make_box(vec2(3.0, -1.0), vec2(4.0, 1.0)),
                        Mat(0.05 * Mat::Identity(2, 2))};
  Vec p = vec2(0.0, 0.0);
  double prev = -1e300;
  for (double delta : {0.02, 0.05, 0.1, 0.2, 0.4, 0.6}) {
    Hyperplane h = obstacle_separator(p, obs, delta);
    CHECK(h.offset >= prev - 1e-12);
    prev = h.offset;
  }
}

TEST_CASE("obstacle_separator is whitener independent") {
  Rng rng(20);
  for (int trial = 0; trial < 20; ++trial) {
    UncertainObstacle obs{
        testsupport::random_polygon(rng, vec2(3.0, 1.0), 0.8),
        testsupport::random_spd(2, rng, 0.01, 0.08)};
    Vec p = vec2(rng.uniform(-1.0, 0.5), rng.uniform(-1.0, 1.0));
    double delta = rng.uniform(0.05, 0.5);
    Hyperplane h = obstacle_separator(p, obs, delta);

    // Redo the pipeline with the symmetric eigendecomposition square root
    // instead of the Cholesky factor; the plane must not change.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{
        Eigen::MatrixXd(obs.translation_cov)};
    Eigen::MatrixXd w2d = es.operatorInverseSqrt();
    Mat w2(2, 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) w2(i, j) = w2d(i, j);
    double eps = 1.0 - std::sqrt(1.0 - delta);
    double radius = std::sqrt(chi2_inv_cdf(1.0 - eps, 2));
    VPolytope shadow2 = dilate(transform(obs.nominal, w2), radius);
    if (distance(shadow2, Vec(w2 * p)) <= 1e-9) continue;
    Hyperplane hw = max_margin_separator(Vec(w2 * p), shadow2);
    Hyperplane h2 = normalize({Vec(w2.transpose() * hw.normal), hw.offset});
    CHECK((h.normal - h2.normal).norm() <= 1e-8);
    CHECK(std::abs(h.offset - h2.offset) <= 1e-8);
  }
}

TEST_CASE("robot estimate inside the shadow is rejected") {
  UncertainObstacle obs{make_box(vec2(0.0, 0.0), vec2(1.0, 1.0)),
                        Mat(0.02 * Mat::Identity(2, 2))};
  CHECK_THROWS_AS(obstacle_separator(vec2(0.5, 0.5), obs, 0.1), RobotInsideShadow);
  CHECK_THROWS_AS(obstacle_separator(vec2(1.05, 0.5), obs, 0.1), RobotInsideShadow);
}

TEST_CASE("obstacle_separator delta domain") {
  UncertainObstacle obs{make_box(vec2(2.0, 0.0), vec2(3.0, 1.0)),
                        Mat(0.02 * Mat::Identity(2, 2))};
  CHECK_THROWS_AS(obstacle_separator(vec2(0, 0), obs, 0.0), std::domain_error);
  CHECK_THROWS_AS(obstacle_separator(vec2(0, 0), obs, 0.8), std::domain_error);
}

TEST_CASE("obstacle_separator works in 3D") {
  UncertainObstacle obs{make_box(vec3(2.0, -0.5, 0.0), vec3(3.0, 0.5, 1.0)),
                        Mat(0.01 * Mat::Identity(3, 3))};
  Hyperplane h = obstacle_separator(vec3(0.0, 0.0, 0.5), obs, 0.1);
  CHECK(std::abs(h.normal.norm() - 1.0) <= 1e-12);
  CHECK(h.normal.dot(vec3(0.0, 0.0, 0.5)) < h.offset);
  // All nominal vertices on the far side (nominal sits inside its shadow).
  for (const Vec& v : obs.nominal.vertices) {
    CHECK(h.normal.dot(v) >= h.offset - 1e-9);
  }
}

TEST_CASE("zero-covariance pair degenerates to the exact midplane") {
  GaussianPosition gi{vec2(-1.0, 2.0), Mat(Mat::Zero(2, 2))};
  GaussianPosition gj{vec2(3.0, 2.0), Mat(Mat::Zero(2, 2))};
  Hyperplane h = best_linear_separator(gi, gj);
  CHECK(std::abs(h.normal.norm() - 1.0) <= 1e-12);
  CHECK(std::abs(h.normal[0] - 1.0) <= 1e-12);
  CHECK(std::abs(h.normal[1]) <= 1e-12);
  CHECK(h.offset == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("one-sided zero covariance hugs the deterministic mean") {
  GaussianPosition gi{vec2(0.0, 0.0), Mat(Mat::Zero(2, 2))};
  GaussianPosition gj{vec2(4.0, 0.0), Mat(Mat::Identity(2, 2))};
  Hyperplane h = best_linear_separator(gi, gj);
  CHECK(h.normal.dot(gi.mean) <= h.offset);
  CHECK(h.normal.dot(gj.mean) > h.offset);
  // The optimum pushes the plane to the deterministic side.
  CHECK(h.offset >= 0.0);
  CHECK(h.offset <= 0.1);
}
