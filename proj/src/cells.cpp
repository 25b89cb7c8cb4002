#include "buavc/cells.hpp"

#include <cmath>
#include <limits>

namespace buavc {

HPolytope BUAVC::polytope() const {
  HPolytope p;
  p.faces.reserve(faces.size());
  for (const BufferedFace& f : faces) p.faces.push_back(f.effective());
  return p;
}

namespace {

void require_unit(const Hyperplane& h, const char* who) {
  if (std::abs(h.normal.norm() - 1.0) > 1e-9) {
    throw std::invalid_argument(std::string(who) + ": normal must be unit");
  }
}

}  // namespace

double buffer_radius(const Hyperplane& h, double r_s) {
  require_unit(h, "buffer_radius");
  if (r_s <= 0.0) throw std::invalid_argument("buffer_radius: r_s must be > 0");
  return r_s;
}

double buffer_chance(const Hyperplane& h, const Mat& cov, double delta) {
  require_unit(h, "buffer_chance");
  if (!(delta > 0.0 && delta < 0.75)) {
    throw std::domain_error("buffer_chance: delta must lie in (0, 0.75)");
  }
  double var = h.normal.dot(cov * h.normal);
  return std::sqrt(2.0 * var) * erf_inv(2.0 * std::sqrt(1.0 - delta) - 1.0);
}

double buffer_stopping(const Hyperplane& h, const Vec& v, double acc_max) {
  require_unit(h, "buffer_stopping");
  if (acc_max <= 0.0) {
    throw std::invalid_argument("buffer_stopping: acc_max must be > 0");
  }
  double approach = h.normal.dot(v);
  return approach > 0.0 ? approach * approach / (2.0 * acc_max) : 0.0;
}

BUAVC build_buavc(int owner, const RobotSnapshot& self,
                  const std::vector<NeighborEstimate>& others,
                  const std::vector<UncertainObstacle>& obstacles,
                  const CellOptions& opt) {
  BUAVC cell;
  cell.owner = owner;
  bool degenerate = false;

  auto stopping = [&](const Hyperplane& h) {
    return opt.stopping_buffer ? buffer_stopping(h, self.velocity, self.acc_max)
                               : 0.0;
  };

  for (const NeighborEstimate& other : others) {
    if ((other.position.mean - self.state.mean).norm() > opt.sensing_range) {
      continue;
    }
    BufferedFace f;
    f.source = FaceSource::Robot;
    f.source_id = other.id;
    try {
      f.base = best_linear_separator(self.state, other.position);
    } catch (const CoincidentMeans&) {
      degenerate = true;
      continue;
    }
    f.beta_r = buffer_radius(f.base, self.r_s);
    f.beta_delta = buffer_chance(f.base, self.state.cov, opt.delta);
    f.beta_s = stopping(f.base);
    cell.faces.push_back(f);
  }

  for (size_t o = 0; o < obstacles.size(); ++o) {
    if (distance(obstacles[o].nominal, self.state.mean) > opt.sensing_range) {
      continue;
    }
    BufferedFace f;
    f.source = FaceSource::Obstacle;
    f.source_id = int(o);
    try {
      f.base = obstacle_separator(self.state.mean, obstacles[o], opt.delta);
    } catch (const RobotInsideShadow&) {
      degenerate = true;
      continue;
    }
    f.beta_r = buffer_radius(f.base, self.r_s);
    f.beta_delta = buffer_chance(f.base, self.state.cov, opt.delta);
    f.beta_s = stopping(f.base);
    cell.faces.push_back(f);
  }

  for (const Hyperplane& wall : opt.workspace.faces) {
    BufferedFace f;
    f.base = normalize(wall);
    f.source = FaceSource::Workspace;
    f.beta_r = buffer_radius(f.base, self.r_s);
    f.beta_s = opt.stopping_buffer_on_workspace ? stopping(f.base) : 0.0;
    cell.faces.push_back(f);
  }

  ChebyshevResult ball = chebyshev_center(cell.polytope());
  cell.center = ball.center;
  cell.radius = ball.radius;
  cell.empty = ball.radius < 0.0;
  if (degenerate) {
    cell.empty = true;
    cell.radius = -std::numeric_limits<double>::infinity();
  }
  return cell;
}

HPolytope build_bvc(const Vec& self, const std::vector<Vec>& others,
                    double r_s) {
  HPolytope cell;
  for (const Vec& other : others) {
    Vec d = other - self;
    double n = d.norm();
    if (n <= 1e-9) throw CoincidentMeans("build_bvc: coincident positions");
    Vec a = d / n;
    cell.faces.push_back({a, a.dot(0.5 * (self + other)) - r_s});
  }
  return cell;
}

}  // namespace buavc
