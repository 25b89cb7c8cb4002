#pragma once

#include <deque>
#include <limits>

#include "buavc/cells.hpp"

namespace buavc {

struct UnicycleCommand {
  double v = 0.0;
  double omega = 0.0;
};

/// Move-to-projected-goal velocity command. Speed is the maximum, clamped
/// to cover the remaining distance in one step so the robot settles instead
/// of limit-cycling around the goal. Empty cell commands zero velocity.
Vec single_integrator_control(const Vec& p_hat, const Vec& goal,
                              const BUAVC& cell, double v_max, double dt);

/// Full-magnitude acceleration toward the projected goal; the cell is
/// expected to carry the stopping retraction. Empty cell brakes along the
/// current velocity.
Vec double_integrator_control(const Vec& p_hat, const Vec& v, const Vec& goal,
                              const BUAVC& cell, double acc_max);

/// Forward-ray / goal-ray projected-goal steering for a unicycle. Linear
/// velocity is forward-only; angular rate steers toward the midpoint of the
/// projected goal and the goal-ray target. Degenerate geometry (empty cell
/// or empty ray clips) stops and turns in place toward the goal bearing.
UnicycleCommand differential_drive_control(
    const Vec& p_hat, double theta, const Vec& goal, const BUAVC& cell,
    double k, double v_max = std::numeric_limits<double>::infinity(),
    double omega_max = std::numeric_limits<double>::infinity());

struct DeadlockConfig {
  int n_dead = 20;
  double dp_min = 0.05;
};

/// Windowed progress monitor: a robot whose progress summed over the last
/// n_dead steps is at most dp_min without being at its goal is stuck.
/// Recovery needs the window sum to rise above 2 dp_min (hysteresis against
/// flapping). Negative progress entries (moving away) are allowed.
class DeadlockState {
 public:
  explicit DeadlockState(DeadlockConfig cfg = {}) : cfg_(cfg) {}

  void update(double progress, bool at_goal);
  bool stuck() const { return stuck_; }
  double window_sum() const { return sum_; }
  void reset();

 private:
  DeadlockConfig cfg_;
  std::deque<double> window_;
  double sum_ = 0.0;
  bool stuck_ = false;
};

/// Sidestep target for the one-step controllers: a point a short way along
/// the blocking cell face, in the tangential direction that reduces goal
/// distance; symmetric standoffs are broken by id parity (even ids rotate
/// the sign-canonicalized face normal counter-clockwise, odd ids clockwise,
/// so mirror-image robots sidestep in opposite world directions). A caller
/// re-resolving mid-episode can pass keep_dir to keep sliding the same way
/// instead of greedily flip-flopping.
Vec resolve_deadlock_one_step(const BUAVC& cell, const Vec& p_hat,
                              const Vec& goal, int robot_id,
                              double step_len = 0.5,
                              const Vec* keep_dir = nullptr);

/// Temporary goal for the receding-horizon family: the goal rotated 90
/// degrees clockwise about the vertical axis through the robot.
Vec resolve_deadlock_rotate_goal(const Vec& p_hat, const Vec& goal);

}  // namespace buavc
