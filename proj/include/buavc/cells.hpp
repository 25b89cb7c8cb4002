#pragma once

#include "buavc/geometry.hpp"
#include "buavc/separators.hpp"

namespace buavc {

enum class FaceSource { Robot, Obstacle, Workspace };

/// Cell face with its retraction bookkeeping. The halfspace actually used
/// is a.p <= b - beta_r - beta_delta - beta_s.
struct BufferedFace {
  Hyperplane base;  // normalized
  double beta_r = 0.0;
  double beta_delta = 0.0;
  double beta_s = 0.0;
  FaceSource source = FaceSource::Workspace;
  int source_id = -1;  // robot or obstacle index; -1 for workspace

  Hyperplane effective() const {
    return {base.normal, base.offset - beta_r - beta_delta - beta_s};
  }
};

/// A robot's buffered cell. empty is certified by the Chebyshev radius of
/// the effective polytope (or forced when a separator was degenerate).
struct BUAVC {
  int owner = -1;
  std::vector<BufferedFace> faces;
  bool empty = false;
  Vec center;
  double radius = 0.0;  // negative when the effective polytope is empty

  HPolytope polytope() const;
};

/// Retraction equal to the safety radius; the face normal must be unit.
double buffer_radius(const Hyperplane& h, double r_s);

/// Chance retraction sqrt(2 a'Sa) * erf_inv(2 sqrt(1-delta) - 1). With the
/// mean exactly this far inside a face, the face is crossed with
/// probability 1 - sqrt(1-delta).
double buffer_chance(const Hyperplane& h, const Mat& cov, double delta);

/// Braking-distance retraction (a'v)^2 / (2 acc_max) when moving toward the
/// face, 0 otherwise.
double buffer_stopping(const Hyperplane& h, const Vec& v, double acc_max);

struct RobotSnapshot {
  GaussianPosition state;
  Vec velocity;
  double r_s = 0.2;
  double acc_max = 0.0;
};

struct NeighborEstimate {
  int id = -1;
  GaussianPosition position;
};

struct CellOptions {
  double delta = 0.05;
  double sensing_range = 2.0;
  bool stopping_buffer = false;
  // Walls are deterministic, so workspace faces get only beta_r by default;
  // this opts them into the stopping retraction as well.
  bool stopping_buffer_on_workspace = false;
  HPolytope workspace;  // faces normalized
};

/// Build the cell for one robot from a snapshot of neighbor estimates
/// (already inflated by the caller when there is no communication) and
/// obstacles. Neighbors and obstacles beyond the sensing range are skipped.
/// Degenerate geometry (coincident means, estimate inside a shadow) never
/// throws; the cell comes back empty-flagged instead.
BUAVC build_buavc(int owner, const RobotSnapshot& self,
                  const std::vector<NeighborEstimate>& others,
                  const std::vector<UncertainObstacle>& obstacles,
                  const CellOptions& opt);

/// Deterministic baseline cell: Voronoi midplanes retracted by r_s.
/// Throws CoincidentMeans for coincident positions.
HPolytope build_bvc(const Vec& self, const std::vector<Vec>& others,
                    double r_s);

}  // namespace buavc
