#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "buavc/mpc.hpp"
#include "test_support.hpp"

using namespace buavc;
using testsupport::vec2;
using testsupport::vec3;

namespace {

BUAVC cell_from(const HPolytope& p) {
  BUAVC cell;
  for (const Hyperplane& h : p.faces) {
    BufferedFace f;
    f.base = normalize(h);
    cell.faces.push_back(f);
  }
  ChebyshevResult ball = chebyshev_center(cell.polytope());
  cell.center = ball.center;
  cell.radius = ball.radius;
  cell.empty = ball.radius < 0.0;
  return cell;
}

BUAVC empty_cell(int d) {
  BUAVC cell;
  cell.empty = true;
  cell.radius = -1.0;
  cell.center = Vec::Zero(d);
  return cell;
}

Eigen::VectorXd di_state(const Vec& p, const Vec& v) {
  Eigen::VectorXd x(2 * p.size());
  x.head(p.size()) = p;
  x.tail(p.size()) = v;
  return x;
}

bool stages_inside(const PlannedTrajectory& traj, const BUAVC& cell, int d,
                   double tol) {
  for (const Eigen::VectorXd& x : traj.states) {
    if (!contains(cell.polytope(), Vec(x.head(d)), tol)) {
      return false;
    }
  }
  return true;
}

bool inputs_within(const PlannedTrajectory& traj, const DynamicsModel& model) {
  const Eigen::VectorXd lo = model.input_lo();
  const Eigen::VectorXd hi = model.input_hi();
  for (const Eigen::VectorXd& u : traj.inputs) {
    if ((u.array() < lo.array()).any() || (u.array() > hi.array()).any()) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("default config sizes and weights follow the model") {
  QuadrotorModel quad;
  MPCConfig cfg = make_mpc_config(quad, 20, 0.05);
  CHECK(cfg.n_stages == 20);
  CHECK(cfg.input_cost.rows() == 4);
  CHECK(cfg.input_cost(2, 2) == 0.1);
  CHECK(cfg.terminal_cost.rows() == 3);
  CHECK(cfg.terminal_cost(1, 1) == 10.0);
  CHECK(cfg.max_iters == 100);
  CHECK(cfg.tol == 1e-8);
}

TEST_CASE("rollout is the composition of single steps") {
  DoubleIntegratorModel model(2, 2.0);
  const Eigen::VectorXd x0 = di_state(vec2(0, 0), vec2(0.3, -0.1));
  std::vector<Eigen::VectorXd> inputs(4, Eigen::VectorXd::Zero(2));
  inputs[1] = Eigen::Vector2d(1.0, 0.5);
  const auto states = rollout(model, x0, inputs, 0.1);
  REQUIRE(states.size() == 4);
  Eigen::VectorXd x = x0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    x = rk4_step(model, x, inputs[k], 0.1);
    CHECK((states[k] - x).norm() == 0.0);
  }
}

TEST_CASE("warm-start shift drops the head and duplicates the tail") {
  PlannedTrajectory prev;
  for (int k = 0; k < 4; ++k) {
    prev.inputs.push_back(Eigen::Vector2d(k, -k));
    prev.states.push_back(Eigen::Vector2d(10 + k, 0));
  }
  MPCWarmStart ws = shift_warm_start(prev);
  REQUIRE(ws.inputs.size() == 4);
  CHECK(ws.inputs[0][0] == 1.0);
  CHECK(ws.inputs[2][0] == 3.0);
  CHECK(ws.inputs[3][0] == 3.0);  // duplicated tail
  CHECK(ws.states[3][0] == 13.0);

  PlannedTrajectory one;
  one.inputs.push_back(Eigen::Vector2d(5, 5));
  one.states.push_back(Eigen::Vector2d(1, 2));
  MPCWarmStart single = shift_warm_start(one);
  REQUIRE(single.inputs.size() == 1);
  CHECK(single.inputs[0][0] == 5.0);
  CHECK(single.states[0][1] == 2.0);
}

TEST_CASE("shifted braking plan stays feasible when re-integrated") {
  DoubleIntegratorModel model(2, 2.0);
  BUAVC cell = cell_from(box_faces(vec2(-1, -1), vec2(1, 1)));
  MPCConfig cfg = make_mpc_config(model, 20, 0.05);
  const Eigen::VectorXd x0 = di_state(vec2(0, 0), vec2(0.8, 0));
  PlannedTrajectory brake = braking_trajectory(model, x0, vec2(0, 0), cell, cfg);
  REQUIRE(brake.max_violation <= 1e-9);

  MPCWarmStart ws = shift_warm_start(brake);
  Eigen::VectorXd x = brake.states.front();
  for (const Eigen::VectorXd& u : ws.inputs) {
    x = rk4_step(model, x, u, cfg.dt);
    CHECK(contains(cell.polytope(), Vec(x.head(2)), 1e-9));
  }
}

TEST_CASE("goal at the current position yields a near-zero plan") {
  DoubleIntegratorModel model(2, 2.0);
  BUAVC cell = cell_from(box_faces(vec2(-5, -5), vec2(5, 5)));
  MPCConfig cfg = make_mpc_config(model, 20, 0.05);
  PlannedTrajectory traj =
      plan(di_state(vec2(1, 1), vec2(0, 0)), vec2(1, 1), cell, model, cfg);
  CHECK_FALSE(traj.degraded);
  CHECK(traj.cost <= 1e-10);
  for (const Eigen::VectorXd& u : traj.inputs) {
    CHECK(u.norm() <= 1e-6);
  }
}

TEST_CASE("double integrator closes in on a goal two meters ahead") {
  DoubleIntegratorModel model(2, 2.0);
  BUAVC cell = cell_from(box_faces(vec2(-10, -10), vec2(10, 10)));
  MPCConfig cfg = make_mpc_config(model, 20, 0.05);
  const Vec goal = vec2(2, 0);

  Eigen::VectorXd x = di_state(vec2(0, 0), vec2(0, 0));
  PlannedTrajectory traj = plan(x, goal, cell, model, cfg);
  CHECK_FALSE(traj.degraded);
  CHECK(traj.max_violation <= 1e-6);
  CHECK(traj.defect_norm <= 1e-12);
  CHECK(inputs_within(traj, model));
  CHECK((Vec(traj.states.back().head(2)) - goal).norm() <
        (Vec(x.head(2)) - goal).norm());

  double prev_dist = (Vec(x.head(2)) - goal).norm();
  for (int step = 0; step < 5; ++step) {
    x = rk4_step(model, x, traj.inputs.front(), cfg.dt);
    const double dist = (Vec(x.head(2)) - goal).norm();
    CHECK(dist < prev_dist);
    prev_dist = dist;
    MPCWarmStart ws = shift_warm_start(traj);
    traj = plan(x, goal, cell, model, cfg, &ws);
    CHECK_FALSE(traj.degraded);
  }
}

TEST_CASE("penalized cost trace is non-increasing") {
  DoubleIntegratorModel model(2, 2.0);
  BUAVC cell = cell_from(box_faces(vec2(-10, -10), vec2(10, 10)));
  MPCConfig cfg = make_mpc_config(model, 20, 0.05);
  PlannedTrajectory traj =
      plan(di_state(vec2(0, 0), vec2(0.3, 0.2)), vec2(2, 1), cell, model, cfg);
  REQUIRE(traj.cost_trace.size() >= 2);
  for (std::size_t i = 1; i < traj.cost_trace.size(); ++i) {
    CHECK(traj.cost_trace[i] <= traj.cost_trace[i - 1] + 1e-9);
  }
}

TEST_CASE("accepted plan never costs more than braking") {
  DoubleIntegratorModel model(2, 2.0);
  BUAVC cell = cell_from(box_faces(vec2(-10, -10), vec2(10, 10)));
  MPCConfig cfg = make_mpc_config(model, 20, 0.05);
  const Eigen::VectorXd x0 = di_state(vec2(0, 0), vec2(0.5, 0));
  const Vec goal = vec2(2, 0);
  PlannedTrajectory traj = plan(x0, goal, cell, model, cfg);
  PlannedTrajectory brake = braking_trajectory(model, x0, goal, cell, cfg);
  CHECK_FALSE(traj.degraded);
  CHECK(traj.cost <= brake.cost + 1e-9);
}

TEST_CASE("stage positions respect a tight cell") {
  DoubleIntegratorModel model(2, 2.0);
  BUAVC cell = cell_from(box_faces(vec2(-0.5, -0.5), vec2(0.5, 0.5)));
  MPCConfig cfg = make_mpc_config(model, 20, 0.05);
  PlannedTrajectory traj =
      plan(di_state(vec2(0, 0), vec2(0, 0)), vec2(5, 0), cell, model, cfg);
  CHECK_FALSE(traj.degraded);
  CHECK(traj.max_violation <= 1e-6);
  CHECK(stages_inside(traj, cell, 2, 1e-6));
  CHECK(traj.states.back()[0] >= 0.35);  // rides up to the facing boundary
}

TEST_CASE("empty cell and hopeless braking degrade to the fallback") {
  DoubleIntegratorModel model(2, 1.0);
  MPCConfig cfg = make_mpc_config(model, 20, 0.05);
  const Eigen::VectorXd x0 = di_state(vec2(0, 0), vec2(0.5, 0));
  PlannedTrajectory traj = plan(x0, vec2(2, 0), empty_cell(2), model, cfg);
  CHECK(traj.degraded);
  PlannedTrajectory brake =
      braking_trajectory(model, x0, vec2(2, 0), empty_cell(2), cfg);
  REQUIRE(traj.inputs.size() == brake.inputs.size());
  for (std::size_t k = 0; k < traj.inputs.size(); ++k) {
    CHECK((traj.inputs[k] - brake.inputs[k]).norm() == 0.0);
  }

  // Too fast to stop inside a 0.1 m box: even the anchor violates, and the
  // planner reports the degradation instead of hiding it.
  BUAVC tiny = cell_from(box_faces(vec2(-0.1, -0.1), vec2(0.1, 0.1)));
  PlannedTrajectory hopeless =
      plan(di_state(vec2(0, 0), vec2(5, 0)), vec2(2, 0), tiny, model, cfg);
  CHECK(hopeless.degraded);
  CHECK(hopeless.max_violation > 1e-6);
}

TEST_CASE("saturated inputs sit exactly on the box") {
  DoubleIntegratorModel model(2, 2.0);
  BUAVC cell = cell_from(box_faces(vec2(-100, -100), vec2(100, 100)));
  MPCConfig cfg = make_mpc_config(model, 20, 0.05);
  PlannedTrajectory traj =
      plan(di_state(vec2(0, 0), vec2(0, 0)), vec2(10, 0), cell, model, cfg);
  CHECK_FALSE(traj.degraded);
  CHECK(inputs_within(traj, model));
  CHECK(traj.inputs.front()[0] == 2.0);
}

TEST_CASE("horizon of one still moves toward the goal") {
  DoubleIntegratorModel model(2, 2.0);
  BUAVC cell = cell_from(box_faces(vec2(-5, -5), vec2(5, 5)));
  MPCConfig cfg = make_mpc_config(model, 1, 0.05);
  PlannedTrajectory traj =
      plan(di_state(vec2(0, 0), vec2(0, 0)), vec2(1, 0), cell, model, cfg);
  REQUIRE(traj.inputs.size() == 1);
  REQUIRE(traj.states.size() == 1);
  CHECK_FALSE(traj.degraded);
  // One stage moves the position by u dt^2 / 2, so the quadratic objective
  // has the closed-form minimizer below rather than a saturated input.
  const double dt2 = 0.5 * 0.05 * 0.05;
  const double expected = 10.0 * dt2 / (0.1 + 10.0 * dt2 * dt2);
  CHECK(traj.inputs.front()[0] == doctest::Approx(expected).epsilon(1e-6));
  CHECK(traj.states.front()[0] > 0.0);
}

TEST_CASE("quadrotor plan advances toward the goal inside a room") {
  QuadrotorModel model;
  BUAVC cell = cell_from(box_faces(vec3(-3, -3, 0), vec3(3, 3, 2)));
  MPCConfig cfg = make_mpc_config(model, 20, 0.05);
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(9);
  x0[2] = 1.0;
  const Vec goal = vec3(1.5, 0, 1);

  PlannedTrajectory traj = plan(x0, goal, cell, model, cfg);
  CHECK_FALSE(traj.degraded);
  CHECK(traj.max_violation <= 1e-6);
  CHECK(inputs_within(traj, model));
  const double d0 = (Vec(x0.head(3)) - goal).norm();
  CHECK((Vec(traj.states.back().head(3)) - goal).norm() < d0 - 0.2);
}

TEST_CASE("quadrotor receding-horizon loop reaches the goal region") {
  QuadrotorModel model;
  BUAVC cell = cell_from(box_faces(vec3(-3, -3, 0), vec3(3, 3, 2)));
  MPCConfig cfg = make_mpc_config(model, 20, 0.05);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(9);
  x[2] = 1.0;
  const Vec goal = vec3(1.5, 0, 1);

  PlannedTrajectory traj = plan(x, goal, cell, model, cfg);
  for (int step = 0; step < 40; ++step) {
    x = rk4_step(model, x, traj.inputs.front(), cfg.dt);
    MPCWarmStart ws = shift_warm_start(traj);
    traj = plan(x, goal, cell, model, cfg, &ws);
    CHECK_FALSE(traj.degraded);
  }
  CHECK((Vec(x.head(3)) - goal).norm() < 0.4);
}
