#pragma once

#include "buavc/geometry.hpp"
#include "buavc/mathkit.hpp"

namespace buavc {

struct CoincidentMeans : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct RobotInsideShadow : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Position estimate with its uncertainty.
struct GaussianPosition {
  Vec mean;
  Mat cov;
};

/// Convex obstacle with a Gaussian uncertain translation.
struct UncertainObstacle {
  VPolytope nominal;
  Mat translation_cov;
};

/// Separating hyperplane between two Gaussian positions that minimizes the
/// larger of the two misclassification probabilities. At the optimum both
/// tail margins u1 = (b - a.mi)/sqrt(a'Si a) and u2 = (a.mj - b)/sqrt(a'Sj a)
/// coincide. Returned normalized with gi on the a.x < b side.
/// Throws CoincidentMeans when the means are closer than 1e-9.
Hyperplane best_linear_separator(const GaussianPosition& gi,
                                 const GaussianPosition& gj);

/// The shared tail margin u1 = u2 of the returned separator.
double separator_margin(const Hyperplane& h, const GaussianPosition& gi,
                        const GaussianPosition& gj);

/// Halfspace that the robot position satisfies with probability at least
/// 1 - eps when the obstacle stays in its eps-shadow, eps = 1 - sqrt(1-delta):
/// whiten by the inverse Cholesky factor of the translation covariance,
/// grow the obstacle by the chi-square quantile radius, take the
/// max-margin separator, and map back. Normalized, robot on a.x < b.
/// Throws RobotInsideShadow when the estimate sits inside the grown shadow.
Hyperplane obstacle_separator(const Vec& p_hat, const UncertainObstacle& obs,
                              double delta);

/// The dilated shadow in original coordinates is not materialized by
/// obstacle_separator; tests use this helper to reason about it.
VPolytope obstacle_shadow_whitened(const UncertainObstacle& obs, double delta,
                                   Mat* whitener = nullptr);

/// Probability that a Gaussian position satisfies a.x <= b.
double halfspace_probability(const Hyperplane& h, const GaussianPosition& g);

}  // namespace buavc
