#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <vector>

#include "buavc/cells.hpp"
#include "buavc/control.hpp"
#include "buavc/estimation.hpp"
#include "buavc/mpc.hpp"

namespace buavc {

enum class RobotDynamics { Single, Double, DiffDrive, MpcDouble, MpcQuadrotor };
enum class EstimationMode { Inject, Kalman };
enum class CellMethod { BUAVC, BVC };
enum class RobotStatus { Active, AtGoal, Collided };

struct RobotSpec {
  RobotDynamics dynamics = RobotDynamics::Single;
  double r_s = 0.2;
  double v_max = 0.4;
  double acc_max = 1.0;
  double sensing_range = 2.0;
  double k_gain = 1.0;    // differential drive proportional gain
  double omega_max = 2.0;
  double theta0 = 0.0;    // initial heading, differential drive
  Vec start;
  Vec goal;
  Mat own_cov;     // injected localization covariance
  Mat others_cov;  // injected covariance others are seen with
};

struct DeadlockParams {
  int n_dead = 20;
  double dp_min = 0.05;
};

struct KalmanParams {
  double q = 0.5;   // process noise density
  double r = 0.06;  // measurement noise std per axis
};

struct EstimationParams {
  EstimationMode mode = EstimationMode::Inject;
  double inflation_factor = 1.0;  // applied to others in Kalman mode
  KalmanParams kf;
};

/// Full simulation description. The BVC baseline ignores covariances and
/// retracts midplanes by r_s * (1 + bvc_margin) instead.
struct Scenario {
  int version = 1;
  int dimension = 2;
  Vec workspace_lo;
  Vec workspace_hi;
  double dt = 0.1;
  int max_steps = 800;
  double delta = 0.05;
  double goal_tolerance = 0.1;
  uint64_t seed = 0;
  CellMethod method = CellMethod::BUAVC;
  double bvc_margin = 0.0;
  bool stopping_buffer = false;
  int mpc_stages = 20;
  std::vector<RobotSpec> robots;
  std::vector<UncertainObstacle> obstacles;
  DeadlockParams deadlock;
  EstimationParams estimation;
};

/// Throws std::invalid_argument describing the first violated constraint.
void validate(const Scenario& s);

HPolytope workspace_polytope(const Scenario& s);

struct RobotRecord {
  Vec true_pos;
  Vec est_mean;
  Mat est_cov;
  VecX command;  // length depends on the dynamics, zero when frozen
  int cell_faces = 0;
  bool cell_empty = false;
  bool deadlock = false;  // resolution active when this command was chosen
  RobotStatus status = RobotStatus::Active;
};

struct StepRecord {
  int step = 0;  // 1-based
  std::vector<RobotRecord> robots;
};

/// min_* distances are -1 when undefined (fewer than 2 robots, no
/// obstacles). avg_travelled_distance and completion_time cover robots that
/// reached their goal; both are 0 when none did.
struct Metrics {
  double collision_rate = 0.0;
  double min_inter_robot_distance = -1.0;
  double min_robot_obstacle_distance = -1.0;
  double avg_travelled_distance = 0.0;
  double completion_time = 0.0;
  int deadlock_count = 0;
  int empty_cell_steps = 0;
  int steps = 0;
};

/// Synchronous simulation. Each step: estimates are drawn from the previous
/// ground-truth snapshot, every robot builds its cell from that same
/// snapshot, commands are computed, then ground truth integrates one dt and
/// goal/collision bookkeeping runs on true positions. Robots freeze at their
/// goal or on collision and remain visible to the others.
class World {
 public:
  explicit World(const Scenario& scenario);

  bool done() const;
  const StepRecord& step();
  Metrics run();

  const Scenario& scenario() const { return scenario_; }
  const std::vector<StepRecord>& records() const { return records_; }
  Metrics metrics() const;
  Metrics recompute_metrics() const;
  const std::vector<VPolytope>& true_obstacles() const {
    return true_obstacles_;
  }
  RobotStatus status(int i) const { return robots_[i].status; }
  Vec true_position(int i) const;

 private:
  struct Robot {
    Eigen::VectorXd x;  // dynamics state, position first
    RobotStatus status = RobotStatus::Active;
    Rng rng;
    DeadlockState deadlock;
    GaussianPosition own_est;
    GaussianPosition broadcast;
    FilterState filter;
    bool filter_ready = false;
    MPCWarmStart warm;
    bool warm_ready = false;
    // Deadlock episode: the temporary target is held (re-resolved with a
    // direction bias when reached) until the progress monitor recovers, so
    // a greedy per-step re-decision cannot limit-cycle around an obstacle.
    Vec resolve_target;
    Vec resolve_dir;
    bool resolving = false;
    std::unique_ptr<DynamicsModel> model;
    MPCConfig mpc_cfg;
    int arrival_step = -1;

    Robot(Rng stream, DeadlockConfig cfg) : rng(stream), deadlock(cfg) {}
  };

  struct Accumulator {
    double min_rr = std::numeric_limits<double>::infinity();
    double min_ro = std::numeric_limits<double>::infinity();
    std::vector<double> travelled;
    int empty_cell_steps = 0;
  };

  Vec position_of(const Robot& r) const;
  Vec velocity_of(const Robot& r) const;
  void estimate_phase();
  BUAVC build_cell(int i) const;
  VecX command_phase(int i, const BUAVC& cell);
  void integrate(int i, const VecX& cmd);
  void accumulate(Accumulator& acc, const std::vector<Vec>& prev,
                  const StepRecord& rec) const;
  Metrics finalize(const Accumulator& acc,
                   const std::vector<RobotStatus>& status,
                   const std::vector<int>& arrival, int steps) const;

  Scenario scenario_;
  HPolytope workspace_;
  std::vector<Robot> robots_;
  std::vector<VPolytope> true_obstacles_;
  std::vector<StepRecord> records_;
  std::vector<Vec> prev_true_;
  Accumulator acc_;
  int step_ = 0;
};

/// Robots equally spaced on a circle around the workspace center with
/// antipodal goals; robots[0] of the base (when present) is the template.
Scenario gen_antipodal_circle(int n, double radius, const Scenario& base);

/// Random starts in n angular sectors around the center, goals in the
/// opposite sector, rejection-sampled for spacing.
Scenario gen_asymmetric_swap(int n, uint64_t seed, const Scenario& base);

/// Random starts/goals with axis-aligned box obstacles covering close to
/// obstacle_density of the workspace area.
Scenario gen_random_moving(int n, double obstacle_density, uint64_t seed,
                           const Scenario& base);

}  // namespace buavc
