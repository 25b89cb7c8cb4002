#pragma once

#include <cstdint>
#include <string>

#include "buavc/separators.hpp"

namespace buavc {

/// Outcome of one probabilistic-guarantee check. pass holds when empirical
/// stays within margin of bound; detail says which direction was checked
/// and carries any secondary numbers.
struct VerifyReport {
  std::string kind;
  double empirical = 0.0;
  double bound = 0.0;
  double margin = 0.0;
  bool pass = false;
  std::string detail;
};

/// Samples obstacle translations and checks that the chi-square quantile
/// ellipsoid captures them with frequency 1 - eps (two-sided, fixed 0.002
/// margin), and that the translated obstacle lies inside the dilated shadow
/// at least as often (the dilation is an outer approximation, so this
/// frequency can only exceed the first). dim selects the 2D or 3D fixture.
VerifyReport verify_shadow_coverage(double eps, int dim, int samples,
                                    uint64_t seed);

/// Empirical frequency of a.x <= b for a fixed Gaussian against the closed
/// form 1/2 + 1/2 erf((b - a.mean)/sqrt(2 a'Sa)), fixed 0.002 margin.
VerifyReport verify_halfspace_mass(int samples, uint64_t seed);

/// Robot-robot collision frequency with both means pushed onto their
/// buffered faces (the worst positions the cells admit), checked one-sided
/// against delta plus a 3-sigma binomial margin. cov_scale scales both
/// covariances; 0 collapses to the deterministic limit where the frequency
/// must be exactly zero.
VerifyReport verify_pair_collision_bound(int samples, uint64_t seed,
                                         double delta = 0.05,
                                         double cov_scale = 1.0);

/// Robot-obstacle collision frequency with the mean on the buffered shadow
/// face, obstacle translation resampled every draw, one-sided against delta
/// plus a 3-sigma binomial margin.
VerifyReport verify_obstacle_collision_bound(int samples, uint64_t seed,
                                             double delta = 0.05);

/// Worst excess of the returned separator's larger misclassification
/// probability over a dense angle-grid oracle (optimal offset per angle in
/// closed form), across random Gaussian pairs. empirical is the largest
/// gap; it must stay below 1e-4.
VerifyReport verify_separator_minimax(int pairs, uint64_t seed);

}  // namespace buavc
