#include "buavc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "buavc/dynamics.hpp"

namespace buavc {
namespace {

int command_length(RobotDynamics dyn, int d) {
  switch (dyn) {
    case RobotDynamics::Single:
    case RobotDynamics::Double:
    case RobotDynamics::MpcDouble:
      return d;
    case RobotDynamics::DiffDrive:
      return 2;
    case RobotDynamics::MpcQuadrotor:
      return 4;
  }
  return d;
}

bool inside_box(const Vec& p, const Vec& lo, const Vec& hi) {
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] < lo[i] || p[i] > hi[i]) {
      return false;
    }
  }
  return true;
}

void require(bool ok, const std::string& what) {
  if (!ok) {
    throw std::invalid_argument("invalid scenario: " + what);
  }
}

VPolytope translate(const VPolytope& poly, const Vec& shift) {
  VPolytope out = poly;
  for (Vec& v : out.vertices) {
    v += shift;
  }
  return out;
}

Vec v2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

}  // namespace

void validate(const Scenario& s) {
  const int d = s.dimension;
  require(d == 2 || d == 3, "dimension must be 2 or 3");
  require(s.workspace_lo.size() == d && s.workspace_hi.size() == d,
          "workspace bounds must match the dimension");
  for (int i = 0; i < d; ++i) {
    require(s.workspace_lo[i] < s.workspace_hi[i],
            "workspace must have positive extent");
  }
  require(s.dt > 0.0, "dt must be positive");
  require(s.max_steps >= 1, "max_steps must be at least 1");
  require(s.delta > 0.0 && s.delta < 0.75, "delta must lie in (0, 0.75)");
  require(s.goal_tolerance > 0.0, "goal_tolerance must be positive");
  require(!s.robots.empty(), "at least one robot is required");
  require(s.bvc_margin >= 0.0, "bvc_margin must be nonnegative");
  require(s.mpc_stages >= 1, "mpc_stages must be at least 1");
  require(s.estimation.inflation_factor >= 1.0,
          "inflation_factor must be at least 1");
  require(s.estimation.kf.q > 0.0, "kalman q must be positive");
  require(s.estimation.kf.r >= 0.0, "kalman r must be nonnegative");
  require(s.deadlock.n_dead >= 1, "n_dead must be at least 1");
  require(s.deadlock.dp_min > 0.0, "dp_min must be positive");

  for (std::size_t i = 0; i < s.robots.size(); ++i) {
    const RobotSpec& r = s.robots[i];
    const std::string tag = "robot " + std::to_string(i) + ": ";
    require(r.start.size() == d && r.goal.size() == d,
            tag + "start/goal must match the dimension");
    require(inside_box(r.start, s.workspace_lo, s.workspace_hi),
            tag + "start outside the workspace");
    require(inside_box(r.goal, s.workspace_lo, s.workspace_hi),
            tag + "goal outside the workspace");
    require(r.r_s > 0.0, tag + "r_s must be positive");
    require(r.v_max > 0.0, tag + "v_max must be positive");
    require(r.acc_max >= 0.0, tag + "acc_max must be nonnegative");
    require(r.sensing_range > 0.0, tag + "sensing_range must be positive");
    require(r.own_cov.rows() == d && r.own_cov.cols() == d,
            tag + "own_cov must be d x d");
    require(r.others_cov.rows() == d && r.others_cov.cols() == d,
            tag + "others_cov must be d x d");
    if (r.dynamics == RobotDynamics::MpcQuadrotor) {
      require(d == 3, tag + "quadrotor dynamics needs dimension 3");
    }
    if (r.dynamics == RobotDynamics::DiffDrive) {
      require(d == 2, tag + "differential drive needs dimension 2");
    }
  }
  for (std::size_t i = 0; i < s.robots.size(); ++i) {
    for (std::size_t j = i + 1; j < s.robots.size(); ++j) {
      const double gap = (s.robots[i].start - s.robots[j].start).norm();
      require(gap >= s.robots[i].r_s + s.robots[j].r_s,
              "robots " + std::to_string(i) + " and " + std::to_string(j) +
                  " start in contact");
    }
  }
  for (std::size_t k = 0; k < s.obstacles.size(); ++k) {
    const UncertainObstacle& o = s.obstacles[k];
    const std::string tag = "obstacle " + std::to_string(k) + ": ";
    require(!o.nominal.vertices.empty(), tag + "no vertices");
    for (const Vec& v : o.nominal.vertices) {
      require(v.size() == d, tag + "vertex dimension mismatch");
    }
    require(o.translation_cov.rows() == d && o.translation_cov.cols() == d,
            tag + "translation_cov must be d x d");
  }
}

HPolytope workspace_polytope(const Scenario& s) {
  return box_faces(s.workspace_lo, s.workspace_hi);
}

World::World(const Scenario& scenario) : scenario_(scenario) {
  validate(scenario_);
  workspace_ = workspace_polytope(scenario_);
  const int d = scenario_.dimension;

  robots_.reserve(scenario_.robots.size());
  for (std::size_t i = 0; i < scenario_.robots.size(); ++i) {
    const RobotSpec& spec = scenario_.robots[i];
    Robot r(Rng::stream(scenario_.seed, i),
            DeadlockConfig{scenario_.deadlock.n_dead, scenario_.deadlock.dp_min});
    switch (spec.dynamics) {
      case RobotDynamics::Single:
        r.x = Eigen::VectorXd(spec.start);
        break;
      case RobotDynamics::Double:
      case RobotDynamics::MpcDouble:
        r.x = Eigen::VectorXd::Zero(2 * d);
        r.x.head(d) = spec.start;
        if (spec.dynamics == RobotDynamics::MpcDouble) {
          r.model = std::make_unique<DoubleIntegratorModel>(d, spec.acc_max);
          r.mpc_cfg = make_mpc_config(*r.model, scenario_.mpc_stages, scenario_.dt);
        }
        break;
      case RobotDynamics::DiffDrive:
        r.x = Eigen::VectorXd::Zero(3);
        r.x.head(2) = spec.start;
        r.x[2] = spec.theta0;
        r.model = std::make_unique<UnicycleModel>(spec.v_max, spec.omega_max);
        break;
      case RobotDynamics::MpcQuadrotor:
        r.x = Eigen::VectorXd::Zero(9);
        r.x.head(3) = spec.start;
        r.model = std::make_unique<QuadrotorModel>();
        r.mpc_cfg = make_mpc_config(*r.model, scenario_.mpc_stages, scenario_.dt);
        break;
    }
    robots_.push_back(std::move(r));
    prev_true_.push_back(spec.start);
  }

  true_obstacles_.reserve(scenario_.obstacles.size());
  for (std::size_t k = 0; k < scenario_.obstacles.size(); ++k) {
    Rng orng = Rng::stream(scenario_.seed, 100000 + k);
    const Vec shift = sample_gaussian(Vec::Zero(d),
                                      scenario_.obstacles[k].translation_cov,
                                      orng);
    true_obstacles_.push_back(translate(scenario_.obstacles[k].nominal, shift));
  }

  acc_.travelled.assign(robots_.size(), 0.0);
}

Vec World::position_of(const Robot& r) const {
  return Vec(r.x.head(scenario_.dimension));
}

Vec World::velocity_of(const Robot& r) const {
  const int d = scenario_.dimension;
  const RobotSpec& spec = scenario_.robots[&r - robots_.data()];
  switch (spec.dynamics) {
    case RobotDynamics::Double:
    case RobotDynamics::MpcDouble:
      return Vec(r.x.tail(d));
    case RobotDynamics::MpcQuadrotor:
      return Vec(r.x.segment(3, 3));
    default:
      return Vec::Zero(d);
  }
}

Vec World::true_position(int i) const { return position_of(robots_[i]); }

void World::estimate_phase() {
  const int d = scenario_.dimension;
  for (std::size_t j = 0; j < robots_.size(); ++j) {
    Robot& r = robots_[j];
    const RobotSpec& spec = scenario_.robots[j];
    const Vec truth = position_of(r);
    if (scenario_.estimation.mode == EstimationMode::Inject) {
      r.own_est.mean = measure(truth, spec.own_cov, r.rng);
      r.own_est.cov = spec.own_cov;
      r.broadcast.mean = measure(truth, spec.others_cov, r.rng);
      r.broadcast.cov = spec.others_cov;
    } else {
      const Mat rm = sq(scenario_.estimation.kf.r) * Mat::Identity(d, d);
      const Vec z = measure(truth, rm, r.rng);
      if (!r.filter_ready) {
        r.filter = kf_init(z, rm, scenario_.estimation.kf.q);
        r.filter_ready = true;
        r.own_est.mean = z;
        r.own_est.cov = rm;
      } else {
        r.own_est = kf_predict_update(r.filter, z, scenario_.dt);
      }
      r.broadcast = r.own_est;
    }
  }
}

BUAVC World::build_cell(int i) const {
  const RobotSpec& spec = scenario_.robots[i];
  const Robot& r = robots_[i];

  std::vector<NeighborEstimate> others;
  others.reserve(robots_.size() - 1);
  for (std::size_t j = 0; j < robots_.size(); ++j) {
    if (static_cast<int>(j) == i) {
      continue;
    }
    GaussianPosition seen;
    if (scenario_.estimation.mode == EstimationMode::Inject) {
      seen.mean = robots_[j].broadcast.mean;
      seen.cov = spec.others_cov;
    } else {
      seen = inflate(robots_[j].broadcast,
                     {scenario_.estimation.inflation_factor});
    }
    others.push_back({static_cast<int>(j), seen});
  }

  if (scenario_.method == CellMethod::BUAVC) {
    CellOptions opt;
    opt.delta = scenario_.delta;
    opt.sensing_range = spec.sensing_range;
    opt.stopping_buffer = scenario_.stopping_buffer;
    opt.workspace = workspace_;
    RobotSnapshot self{r.own_est, velocity_of(r), spec.r_s, spec.acc_max};
    return build_buavc(i, self, others, scenario_.obstacles, opt);
  }

  // BVC baseline: deterministic midplanes from the noisy means, retracted by
  // the physical radius plus the heuristic margin.
  BUAVC cell;
  cell.owner = i;
  std::vector<Vec> means;
  for (const NeighborEstimate& o : others) {
    if ((o.position.mean - r.own_est.mean).norm() <= spec.sensing_range) {
      means.push_back(o.position.mean);
    }
  }
  bool degenerate = false;
  try {
    const HPolytope faces =
        build_bvc(r.own_est.mean, means, spec.r_s * (1.0 + scenario_.bvc_margin));
    for (const Hyperplane& h : faces.faces) {
      BufferedFace f;
      f.base = h;
      f.source = FaceSource::Robot;
      cell.faces.push_back(f);
    }
  } catch (const CoincidentMeans&) {
    degenerate = true;
  }
  for (const Hyperplane& h : workspace_.faces) {
    BufferedFace f;
    f.base = normalize(h);
    f.beta_r = spec.r_s;
    f.source = FaceSource::Workspace;
    cell.faces.push_back(f);
  }
  const ChebyshevResult ball = chebyshev_center(cell.polytope());
  cell.center = ball.center;
  cell.radius = ball.radius;
  cell.empty = degenerate || ball.radius < 0.0;
  return cell;
}

VecX World::command_phase(int i, const BUAVC& cell) {
  const RobotSpec& spec = scenario_.robots[i];
  Robot& r = robots_[i];
  const Vec p_hat = r.own_est.mean;

  Vec goal = spec.goal;
  if (r.deadlock.stuck()) {
    const bool mpc_family = spec.dynamics == RobotDynamics::MpcDouble ||
                            spec.dynamics == RobotDynamics::MpcQuadrotor;
    if (mpc_family) {
      if (!r.resolving) {
        r.resolve_target = resolve_deadlock_rotate_goal(p_hat, spec.goal);
        r.resolving = true;
      }
    } else {
      // Re-resolve each step so the target tracks the evolving cell, but
      // bias the tangent toward the episode's direction to keep the slide
      // from flip-flopping.
      const Vec* bias = r.resolving ? &r.resolve_dir : nullptr;
      r.resolve_target =
          resolve_deadlock_one_step(cell, p_hat, spec.goal, i, 0.5, bias);
      const Vec leg = r.resolve_target - p_hat;
      if (leg.norm() > 1e-9) {
        r.resolve_dir = leg.normalized();
      }
      r.resolving = true;
    }
    goal = r.resolve_target;
  } else {
    r.resolving = false;
  }

  switch (spec.dynamics) {
    case RobotDynamics::Single:
      return VecX(single_integrator_control(p_hat, goal, cell, spec.v_max,
                                            scenario_.dt));
    case RobotDynamics::Double:
      return VecX(double_integrator_control(p_hat, velocity_of(r), goal, cell,
                                            spec.acc_max));
    case RobotDynamics::DiffDrive: {
      const UnicycleCommand uc = differential_drive_control(
          p_hat, r.x[2], goal, cell, spec.k_gain, spec.v_max, spec.omega_max);
      VecX cmd(2);
      cmd << uc.v, uc.omega;
      return cmd;
    }
    case RobotDynamics::MpcDouble:
    case RobotDynamics::MpcQuadrotor: {
      Eigen::VectorXd x0 = r.x;
      x0.head(scenario_.dimension) = p_hat;
      const PlannedTrajectory traj =
          plan(x0, goal, cell, *r.model, r.mpc_cfg,
               r.warm_ready ? &r.warm : nullptr);
      r.warm = shift_warm_start(traj);
      r.warm_ready = true;
      return VecX(traj.inputs.front());
    }
  }
  return VecX::Zero(command_length(spec.dynamics, scenario_.dimension));
}

void World::integrate(int i, const VecX& cmd) {
  const RobotSpec& spec = scenario_.robots[i];
  Robot& r = robots_[i];
  const int d = scenario_.dimension;
  const double dt = scenario_.dt;
  try {
    switch (spec.dynamics) {
      case RobotDynamics::Single:
        r.x.head(d) += dt * Eigen::VectorXd(cmd);
        break;
      case RobotDynamics::Double:
      case RobotDynamics::MpcDouble: {
        const Eigen::VectorXd a(cmd);
        r.x.head(d) += dt * r.x.tail(d) + 0.5 * dt * dt * a;
        r.x.tail(d) += dt * a;
        break;
      }
      case RobotDynamics::DiffDrive:
      case RobotDynamics::MpcQuadrotor:
        r.x = rk4_step(*r.model, r.x, Eigen::VectorXd(cmd), dt);
        break;
    }
    if (!r.x.allFinite()) {
      throw std::runtime_error("non-finite state");
    }
  } catch (const std::exception& e) {
    throw std::runtime_error("robot " + std::to_string(i) + " diverged at step " +
                             std::to_string(step_) + ": " + e.what());
  }
}

bool World::done() const {
  if (step_ >= scenario_.max_steps) {
    return true;
  }
  for (const Robot& r : robots_) {
    if (r.status == RobotStatus::Active) {
      return false;
    }
  }
  return true;
}

const StepRecord& World::step() {
  ++step_;
  const int n = static_cast<int>(robots_.size());
  const int d = scenario_.dimension;

  estimate_phase();

  std::vector<BUAVC> cells(n);
  std::vector<VecX> cmds(n);
  std::vector<bool> used_stuck(n, false);
  for (int i = 0; i < n; ++i) {
    if (robots_[i].status == RobotStatus::Active) {
      cells[i] = build_cell(i);
      used_stuck[i] = robots_[i].deadlock.stuck();
      cmds[i] = command_phase(i, cells[i]);
    } else {
      cmds[i] =
          VecX::Zero(command_length(scenario_.robots[i].dynamics, d));
    }
  }

  for (int i = 0; i < n; ++i) {
    if (robots_[i].status == RobotStatus::Active) {
      integrate(i, cmds[i]);
    }
  }

  std::vector<Vec> pos(n);
  for (int i = 0; i < n; ++i) {
    pos[i] = position_of(robots_[i]);
  }
  for (int i = 0; i < n; ++i) {
    Robot& r = robots_[i];
    if (r.status == RobotStatus::Active &&
        (pos[i] - scenario_.robots[i].goal).norm() <=
            scenario_.goal_tolerance) {
      r.status = RobotStatus::AtGoal;
      r.arrival_step = step_;
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if ((pos[i] - pos[j]).norm() <
          scenario_.robots[i].r_s + scenario_.robots[j].r_s) {
        robots_[i].status = RobotStatus::Collided;
        robots_[j].status = RobotStatus::Collided;
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    for (const VPolytope& obs : true_obstacles_) {
      if (distance(obs, pos[i]) < scenario_.robots[i].r_s) {
        robots_[i].status = RobotStatus::Collided;
      }
    }
  }

  // Progress is the reduction in true goal distance: a robot pinned at a
  // face still jitters at full speed chasing its noisy estimate, so path
  // length cannot tell blocked from moving.
  for (int i = 0; i < n; ++i) {
    const double before = (prev_true_[i] - scenario_.robots[i].goal).norm();
    const double after = (pos[i] - scenario_.robots[i].goal).norm();
    robots_[i].deadlock.update(before - after,
                               after <= scenario_.goal_tolerance);
  }

  StepRecord rec;
  rec.step = step_;
  rec.robots.resize(n);
  for (int i = 0; i < n; ++i) {
    RobotRecord& rr = rec.robots[i];
    rr.true_pos = pos[i];
    rr.est_mean = robots_[i].own_est.mean;
    rr.est_cov = robots_[i].own_est.cov;
    rr.command = cmds[i];
    rr.cell_faces = static_cast<int>(cells[i].faces.size());
    rr.cell_empty = cells[i].empty;
    rr.deadlock = used_stuck[i];
    rr.status = robots_[i].status;
  }
  records_.push_back(std::move(rec));

  accumulate(acc_, prev_true_, records_.back());
  prev_true_ = pos;
  return records_.back();
}

Metrics World::run() {
  while (!done()) {
    step();
  }
  return metrics();
}

void World::accumulate(Accumulator& acc, const std::vector<Vec>& prev,
                       const StepRecord& rec) const {
  const int n = static_cast<int>(rec.robots.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      acc.min_rr = std::min(
          acc.min_rr, (rec.robots[i].true_pos - rec.robots[j].true_pos).norm());
    }
  }
  for (int i = 0; i < n; ++i) {
    for (const VPolytope& obs : true_obstacles_) {
      acc.min_ro = std::min(acc.min_ro, distance(obs, rec.robots[i].true_pos));
    }
  }
  for (int i = 0; i < n; ++i) {
    acc.travelled[i] += (rec.robots[i].true_pos - prev[i]).norm();
    if (rec.robots[i].cell_empty) {
      ++acc.empty_cell_steps;
    }
  }
}

Metrics World::finalize(const Accumulator& acc,
                        const std::vector<RobotStatus>& status,
                        const std::vector<int>& arrival, int steps) const {
  const int n = static_cast<int>(status.size());
  Metrics m;
  m.steps = steps;
  int collided = 0, active = 0;
  for (int i = 0; i < n; ++i) {
    collided += status[i] == RobotStatus::Collided ? 1 : 0;
    active += status[i] == RobotStatus::Active ? 1 : 0;
  }
  m.collision_rate = n > 0 ? static_cast<double>(collided) / n : 0.0;
  m.deadlock_count = active;
  m.empty_cell_steps = acc.empty_cell_steps;
  if (n >= 2 && steps > 0) {
    m.min_inter_robot_distance = acc.min_rr;
  }
  if (!true_obstacles_.empty() && steps > 0) {
    m.min_robot_obstacle_distance = acc.min_ro;
  }
  double travelled_sum = 0.0;
  int successes = 0;
  int last_arrival = 0;
  for (int i = 0; i < n; ++i) {
    if (arrival[i] >= 0) {
      ++successes;
      travelled_sum += acc.travelled[i];
      last_arrival = std::max(last_arrival, arrival[i]);
    }
  }
  if (successes > 0) {
    m.avg_travelled_distance = travelled_sum / successes;
    m.completion_time = last_arrival * scenario_.dt;
  }
  return m;
}

Metrics World::metrics() const {
  std::vector<RobotStatus> status;
  std::vector<int> arrival;
  for (const Robot& r : robots_) {
    status.push_back(r.status);
    arrival.push_back(r.arrival_step);
  }
  return finalize(acc_, status, arrival, step_);
}

Metrics World::recompute_metrics() const {
  const int n = static_cast<int>(robots_.size());
  Accumulator acc;
  acc.travelled.assign(n, 0.0);
  std::vector<Vec> prev;
  for (const RobotSpec& spec : scenario_.robots) {
    prev.push_back(spec.start);
  }
  std::vector<RobotStatus> status(n, RobotStatus::Active);
  std::vector<int> arrival(n, -1);
  for (const StepRecord& rec : records_) {
    accumulate(acc, prev, rec);
    for (int i = 0; i < n; ++i) {
      if (arrival[i] < 0 && rec.robots[i].status == RobotStatus::AtGoal) {
        arrival[i] = rec.step;
      }
      status[i] = rec.robots[i].status;
      prev[i] = rec.robots[i].true_pos;
    }
  }
  return finalize(acc, status, arrival, static_cast<int>(records_.size()));
}

namespace {

RobotSpec template_robot(const Scenario& base) {
  RobotSpec tmpl;
  if (!base.robots.empty()) {
    tmpl = base.robots[0];
  }
  const int d = base.dimension;
  if (tmpl.own_cov.rows() != d) {
    tmpl.own_cov = sq(0.04) * Mat::Identity(d, d);
  }
  if (tmpl.others_cov.rows() != d) {
    tmpl.others_cov = sq(0.06) * Mat::Identity(d, d);
  }
  return tmpl;
}

Vec box_center(const Scenario& s) {
  return Vec(0.5 * (s.workspace_lo + s.workspace_hi));
}

void aim_heading(RobotSpec& r) {
  if (r.dynamics == RobotDynamics::DiffDrive) {
    r.theta0 = std::atan2(r.goal[1] - r.start[1], r.goal[0] - r.start[0]);
  }
}

}  // namespace

Scenario gen_antipodal_circle(int n, double radius, const Scenario& base) {
  if (n < 2) {
    throw std::invalid_argument("antipodal circle needs at least 2 robots");
  }
  Scenario s = base;
  const RobotSpec tmpl = template_robot(base);
  const double chord = 2.0 * radius * std::sin(M_PI / n);
  if (chord < 2.0 * tmpl.r_s) {
    throw std::invalid_argument("robots on the circle would start in contact");
  }
  const Vec center = box_center(s);
  s.robots.clear();
  for (int k = 0; k < n; ++k) {
    const double ang = 2.0 * M_PI * k / n;
    RobotSpec r = tmpl;
    r.start = center;
    r.goal = center;
    r.start[0] += radius * std::cos(ang);
    r.start[1] += radius * std::sin(ang);
    r.goal[0] -= radius * std::cos(ang);
    r.goal[1] -= radius * std::sin(ang);
    aim_heading(r);
    s.robots.push_back(r);
  }
  validate(s);
  return s;
}

Scenario gen_asymmetric_swap(int n, uint64_t seed, const Scenario& base) {
  if (n < 2) {
    throw std::invalid_argument("asymmetric swap needs at least 2 robots");
  }
  Scenario s = base;
  const RobotSpec tmpl = template_robot(base);
  const Vec center = box_center(s);
  const double extent =
      0.5 * (s.workspace_hi - s.workspace_lo).head(2).minCoeff();
  const double r_out = extent - 2.0 * tmpl.r_s;
  const double r_in = 0.3 * r_out;
  Rng rng(seed);

  auto sample_in_sector = [&](int sector, const std::vector<Vec>& placed) {
    for (int attempt = 0; attempt < 10000; ++attempt) {
      const double ang = 2.0 * M_PI * (sector + rng.uniform()) / n;
      const double rho = rng.uniform(r_in, r_out);
      Vec p = center;
      p[0] += rho * std::cos(ang);
      p[1] += rho * std::sin(ang);
      bool ok = true;
      for (const Vec& q : placed) {
        if ((p - q).norm() < 2.0 * tmpl.r_s) {
          ok = false;
          break;
        }
      }
      if (ok) {
        return p;
      }
    }
    throw std::runtime_error("asymmetric swap sampling exhausted");
  };

  std::vector<Vec> starts, goals;
  for (int k = 0; k < n; ++k) {
    starts.push_back(sample_in_sector(k, starts));
  }
  for (int k = 0; k < n; ++k) {
    goals.push_back(sample_in_sector((k + n / 2) % n, goals));
  }

  s.robots.clear();
  for (int k = 0; k < n; ++k) {
    RobotSpec r = tmpl;
    r.start = starts[k];
    r.goal = goals[k];
    aim_heading(r);
    s.robots.push_back(r);
  }
  validate(s);
  return s;
}

Scenario gen_random_moving(int n, double obstacle_density, uint64_t seed,
                           const Scenario& base) {
  if (base.dimension != 2) {
    throw std::invalid_argument("random moving scenarios are two-dimensional");
  }
  if (obstacle_density < 0.0 || obstacle_density > 0.3) {
    throw std::invalid_argument("obstacle density must lie in [0, 0.3]");
  }
  Scenario s = base;
  const RobotSpec tmpl = template_robot(base);
  Rng rng(seed);
  const Vec lo = s.workspace_lo, hi = s.workspace_hi;
  const double area = (hi[0] - lo[0]) * (hi[1] - lo[1]);
  const double target = obstacle_density * area;

  Mat obs_cov = sq(0.02) * Mat::Identity(2, 2);
  if (!base.obstacles.empty()) {
    obs_cov = base.obstacles[0].translation_cov;
  }

  s.obstacles.clear();
  double covered = 0.0;
  int attempts = 0;
  std::vector<Eigen::Vector4d> boxes;  // x0 y0 x1 y1
  while (covered < 0.9 * target) {
    if (++attempts > 10000) {
      throw std::runtime_error("obstacle placement exhausted");
    }
    const double w = rng.uniform(0.6, 1.4);
    const double h = rng.uniform(0.6, 1.4);
    if (covered + w * h > 1.1 * target) {
      continue;
    }
    const double x0 = rng.uniform(lo[0] + 0.2, hi[0] - 0.2 - w);
    const double y0 = rng.uniform(lo[1] + 0.2, hi[1] - 0.2 - h);
    bool overlaps = false;
    for (const Eigen::Vector4d& b : boxes) {
      if (x0 < b[2] + 0.2 && b[0] < x0 + w + 0.2 && y0 < b[3] + 0.2 &&
          b[1] < y0 + h + 0.2) {
        overlaps = true;
        break;
      }
    }
    if (overlaps) {
      continue;
    }
    boxes.emplace_back(x0, y0, x0 + w, y0 + h);
    covered += w * h;
    UncertainObstacle o;
    o.nominal.vertices = {v2(x0, y0), v2(x0 + w, y0), v2(x0 + w, y0 + h),
                          v2(x0, y0 + h)};
    o.translation_cov = obs_cov;
    s.obstacles.push_back(o);
  }

  auto clear_of_obstacles = [&](const Vec& p) {
    for (const UncertainObstacle& o : s.obstacles) {
      if (distance(o.nominal, p) < tmpl.r_s + 0.05) {
        return false;
      }
    }
    return true;
  };
  auto sample_point = [&](const std::vector<Vec>& placed) {
    for (int attempt = 0; attempt < 10000; ++attempt) {
      Vec p(2);
      p[0] = rng.uniform(lo[0] + tmpl.r_s, hi[0] - tmpl.r_s);
      p[1] = rng.uniform(lo[1] + tmpl.r_s, hi[1] - tmpl.r_s);
      if (!clear_of_obstacles(p)) {
        continue;
      }
      bool ok = true;
      for (const Vec& q : placed) {
        if ((p - q).norm() < 2.0 * tmpl.r_s) {
          ok = false;
          break;
        }
      }
      if (ok) {
        return p;
      }
    }
    throw std::runtime_error("robot placement exhausted");
  };

  std::vector<Vec> starts, goals;
  for (int k = 0; k < n; ++k) {
    starts.push_back(sample_point(starts));
  }
  for (int k = 0; k < n; ++k) {
    goals.push_back(sample_point(goals));
  }
  s.robots.clear();
  for (int k = 0; k < n; ++k) {
    RobotSpec r = tmpl;
    r.start = starts[k];
    r.goal = goals[k];
    aim_heading(r);
    s.robots.push_back(r);
  }
  validate(s);
  return s;
}

}  // namespace buavc
