#include "buavc/control.hpp"

#include <cmath>

namespace buavc {
namespace {

// Point of the segment closest to g.
Vec segment_closest(const Segment& s, const Vec& g) {
  Vec d = s.b - s.a;
  double len2 = d.squaredNorm();
  if (len2 <= 1e-18) return s.a;
  double t = std::min(1.0, std::max(0.0, (g - s.a).dot(d) / len2));
  return s.a + t * d;
}

double clamp_mag(double x, double limit) {
  return std::max(-limit, std::min(limit, x));
}

Vec cross(const Vec& x, const Vec& y) {
  Vec r(3);
  r << x[1] * y[2] - x[2] * y[1], x[2] * y[0] - x[0] * y[2],
      x[0] * y[1] - x[1] * y[0];
  return r;
}

}  // namespace

Vec single_integrator_control(const Vec& p_hat, const Vec& goal,
                              const BUAVC& cell, double v_max, double dt) {
  if (cell.empty) return Vec::Zero(p_hat.size());
  Vec g_star = project_point(cell.polytope(), goal);
  Vec to_target = g_star - p_hat;
  double dist = to_target.norm();
  if (dist <= 1e-9) return Vec::Zero(p_hat.size());
  return std::min(v_max, dist / dt) * (to_target / dist);
}

Vec double_integrator_control(const Vec& p_hat, const Vec& v, const Vec& goal,
                              const BUAVC& cell, double acc_max) {
  if (cell.empty) {
    double speed = v.norm();
    if (speed <= 1e-9) return Vec::Zero(p_hat.size());
    return Vec(-acc_max / speed * v);
  }
  Vec g_star = project_point(cell.polytope(), goal);
  Vec to_target = g_star - p_hat;
  double dist = to_target.norm();
  if (dist <= 1e-9) return Vec::Zero(p_hat.size());
  return Vec(acc_max / dist * to_target);
}

UnicycleCommand differential_drive_control(const Vec& p_hat, double theta,
                                           const Vec& goal, const BUAVC& cell,
                                           double k, double v_max,
                                           double omega_max) {
  Vec heading = Vec(2);
  heading << std::cos(theta), std::sin(theta);
  Vec lateral = Vec(2);
  lateral << -std::sin(theta), std::cos(theta);

  auto turn_toward = [&](const Vec& target) {
    Vec d = target - p_hat;
    if (d.norm() <= 1e-9) return UnicycleCommand{0.0, 0.0};
    double omega = k * std::atan2(lateral.dot(d), heading.dot(d));
    return UnicycleCommand{0.0, clamp_mag(omega, omega_max)};
  };

  if (cell.empty) return turn_toward(goal);

  HPolytope region = cell.polytope();
  Vec g_star = project_point(region, goal);
  Vec to_goal = goal - p_hat;

  std::optional<Segment> line_v = clip_line(region, p_hat, heading);
  std::optional<Segment> line_w = to_goal.norm() > 1e-9
                                      ? clip_line(region, p_hat, to_goal)
                                      : std::nullopt;
  if (!line_v || !line_w) return turn_toward(goal);

  Vec gv = segment_closest(*line_v, goal);
  Vec gw = segment_closest(*line_w, goal);

  double v = k * heading.dot(gv - p_hat);
  v = std::min(std::max(v, 0.0), v_max);

  Vec mid = 0.5 * (g_star + gw) - p_hat;
  double f = heading.dot(mid);
  double l = lateral.dot(mid);
  double omega = (std::abs(f) <= 1e-12 && std::abs(l) <= 1e-12)
                     ? 0.0
                     : k * std::atan2(l, f);
  return {v, clamp_mag(omega, omega_max)};
}

void DeadlockState::update(double progress, bool at_goal) {
  window_.push_back(progress);
  sum_ += progress;
  while (int(window_.size()) > cfg_.n_dead) {
    sum_ -= window_.front();
    window_.pop_front();
  }
  if (at_goal) {
    stuck_ = false;
    return;
  }
  if (int(window_.size()) < cfg_.n_dead) return;
  if (!stuck_ && sum_ <= cfg_.dp_min) stuck_ = true;
  if (stuck_ && sum_ > 2.0 * cfg_.dp_min) stuck_ = false;
}

void DeadlockState::reset() {
  window_.clear();
  sum_ = 0.0;
  stuck_ = false;
}

Vec resolve_deadlock_one_step(const BUAVC& cell, const Vec& p_hat,
                              const Vec& goal, int robot_id, double step_len,
                              const Vec* keep_dir) {
  if (cell.empty) return p_hat;
  HPolytope region = cell.polytope();
  Vec g_star = project_point(region, goal);

  // Face blocking the goal: active at g_star and most aligned with the
  // remaining goal direction.
  Vec to_goal = goal - g_star;
  const Hyperplane* blocking = nullptr;
  double best_align = -1e300;
  for (const Hyperplane& h : region.faces) {
    if (std::abs(h.normal.dot(g_star) - h.offset) > 1e-7) continue;
    double align = h.normal.dot(to_goal);
    if (align > best_align) {
      best_align = align;
      blocking = &h;
    }
  }
  if (!blocking) return g_star;

  const Vec& a = blocking->normal;
  Vec tangent = to_goal - to_goal.dot(a) * a;
  if (tangent.norm() <= 1e-9) {
    // Symmetric standoff. The parity rotation acts on a sign-canonicalized
    // normal; using the raw normal would cancel the parity for mirror-image
    // robots, whose blocking normals point opposite ways.
    Vec canon = a;
    for (int c = 0; c < canon.size(); ++c) {
      if (std::abs(canon[c]) > 1e-12) {
        if (canon[c] < 0.0) canon = -canon;
        break;
      }
    }
    if (a.size() == 2) {
      tangent = Vec(2);
      if (robot_id % 2 == 0) {
        tangent << -canon[1], canon[0];
      } else {
        tangent << canon[1], -canon[0];
      }
    } else {
      Vec up = Vec::Zero(3);
      up[2] = 1.0;
      tangent = cross(up, canon);
      if (tangent.norm() <= 1e-9) {
        up.setZero();
        up[0] = 1.0;
        tangent = cross(up, canon);
      }
      if (robot_id % 2 != 0) tangent = -tangent;
    }
  }
  tangent /= tangent.norm();
  if (keep_dir != nullptr && tangent.dot(*keep_dir) < 0.0) {
    tangent = -tangent;
  }
  // Slide from the robot's own footprint on the face rather than from
  // g_star: once the robot has moved more than step_len along the boundary
  // the goal projection stops leading and would pin it in place.
  Vec anchor = p_hat - (a.dot(p_hat) - blocking->offset) * a;
  Vec target = project_point(region, Vec(anchor + step_len * tangent));
  if ((target - g_star).norm() < 0.05 * step_len) {
    // The slide ran straight into an adjacent face (vertex standoff) and
    // collapsed back onto the projected goal; the opposite direction along
    // the same face is then the open one.
    Vec back = project_point(region, Vec(anchor - step_len * tangent));
    if ((back - g_star).norm() > (target - g_star).norm()) target = back;
  }
  return target;
}

Vec resolve_deadlock_rotate_goal(const Vec& p_hat, const Vec& goal) {
  Vec rel = goal - p_hat;
  Vec rotated = rel;
  rotated[0] = rel[1];
  rotated[1] = -rel[0];
  return Vec(p_hat + rotated);
}

}  // namespace buavc
