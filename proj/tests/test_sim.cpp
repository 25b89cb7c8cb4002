#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "buavc/sim.hpp"

using namespace buavc;

namespace {

Vec v2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

Scenario base10x10() {
  Scenario s;
  s.workspace_lo = v2(-5.0, -5.0);
  s.workspace_hi = v2(5.0, 5.0);
  return s;
}

RobotSpec si_robot(const Vec& start, const Vec& goal, double own_std,
                   double others_std) {
  RobotSpec r;
  r.start = start;
  r.goal = goal;
  r.own_cov = sq(own_std) * Mat::Identity(2, 2);
  r.others_cov = sq(others_std) * Mat::Identity(2, 2);
  return r;
}

}  // namespace

TEST_CASE("single robot crosses an empty workspace at full speed") {
  Scenario s = base10x10();
  s.robots.push_back(si_robot(v2(-4.0, 0.0), v2(4.0, 0.0), 0.0, 0.0));
  World w(s);
  const Metrics m = w.run();

  // 8 m at 0.04 m per step, arriving once within the 0.1 m tolerance.
  CHECK(w.status(0) == RobotStatus::AtGoal);
  CHECK(m.steps == 198);
  CHECK(m.completion_time == doctest::Approx(19.8).epsilon(1e-12));
  CHECK(m.collision_rate == 0.0);
  CHECK(m.deadlock_count == 0);
  CHECK(m.empty_cell_steps == 0);
  CHECK(m.avg_travelled_distance == doctest::Approx(7.92).epsilon(1e-9));
  CHECK(m.min_inter_robot_distance == -1.0);
  CHECK(m.min_robot_obstacle_distance == -1.0);

  const auto& recs = w.records();
  REQUIRE(int(recs.size()) == 198);
  Vec prev = s.robots[0].start;
  for (int k = 0; k < 197; ++k) {
    const Vec p = recs[k].robots[0].true_pos;
    CHECK((p - prev).norm() == doctest::Approx(0.04).epsilon(1e-12));
    CHECK(p[1] == 0.0);
    prev = p;
  }
}

TEST_CASE("robot starting on its goal freezes with zero commands") {
  Scenario s = base10x10();
  s.robots.push_back(si_robot(v2(-4.0, 0.0), v2(4.0, 0.0), 0.0, 0.0));
  s.robots.push_back(si_robot(v2(4.0, 3.0), v2(4.0, 3.0), 0.0, 0.0));
  World w(s);
  w.run();

  CHECK(w.status(0) == RobotStatus::AtGoal);
  CHECK(w.status(1) == RobotStatus::AtGoal);
  const auto& recs = w.records();
  CHECK(recs[0].robots[1].status == RobotStatus::AtGoal);
  for (const StepRecord& rec : recs) {
    CHECK(rec.robots[1].true_pos[0] == 4.0);
    CHECK(rec.robots[1].true_pos[1] == 3.0);
    if (rec.step > 1) {
      CHECK(rec.robots[1].command.norm() == 0.0);
    }
  }
  CHECK(w.metrics().completion_time ==
        doctest::Approx(19.8).epsilon(1e-12));
}

TEST_CASE("same seed reproduces the run bit for bit") {
  Scenario s = base10x10();
  s.seed = 7;
  s.robots.push_back(si_robot(v2(-3.0, 0.2), v2(3.0, 0.2), 0.04, 0.06));
  s.robots.push_back(si_robot(v2(3.0, -0.2), v2(-3.0, -0.2), 0.04, 0.06));
  s.robots.push_back(si_robot(v2(0.0, 3.0), v2(0.0, -3.0), 0.04, 0.06));

  World a(s), b(s);
  const Metrics ma = a.run(), mb = b.run();
  REQUIRE(a.records().size() == b.records().size());
  for (std::size_t k = 0; k < a.records().size(); ++k) {
    const StepRecord& ra = a.records()[k];
    const StepRecord& rb = b.records()[k];
    for (int i = 0; i < 3; ++i) {
      CHECK((ra.robots[i].true_pos - rb.robots[i].true_pos).norm() == 0.0);
      CHECK((ra.robots[i].est_mean - rb.robots[i].est_mean).norm() == 0.0);
      CHECK((ra.robots[i].command - rb.robots[i].command).norm() == 0.0);
      CHECK(ra.robots[i].status == rb.robots[i].status);
    }
  }
  CHECK(ma.collision_rate == mb.collision_rate);
  CHECK(ma.min_inter_robot_distance == mb.min_inter_robot_distance);
  CHECK(ma.avg_travelled_distance == mb.avg_travelled_distance);
  CHECK(ma.completion_time == mb.completion_time);
}

TEST_CASE("swapping robot order permutes noise-free trajectories exactly") {
  Scenario s = base10x10();
  s.robots.push_back(si_robot(v2(-2.0, 0.5), v2(2.0, 0.5), 0.0, 0.0));
  s.robots.push_back(si_robot(v2(2.0, -0.5), v2(-2.0, -0.5), 0.0, 0.0));
  Scenario t = s;
  std::swap(t.robots[0], t.robots[1]);

  World a(s), b(t);
  a.run();
  b.run();
  REQUIRE(a.records().size() == b.records().size());
  for (std::size_t k = 0; k < a.records().size(); ++k) {
    const StepRecord& ra = a.records()[k];
    const StepRecord& rb = b.records()[k];
    CHECK((ra.robots[0].true_pos - rb.robots[1].true_pos).norm() == 0.0);
    CHECK((ra.robots[1].true_pos - rb.robots[0].true_pos).norm() == 0.0);
  }
  CHECK(a.status(0) == b.status(1));
  CHECK(a.status(1) == b.status(0));
}

TEST_CASE("head-on pair with noise swaps without ever touching") {
  // Estimate noise perturbs the separating plane enough that the pair forms
  // passing lanes on its own; no deadlock is declared along the way.
  Scenario s = base10x10();
  s.seed = 3;
  s.robots.push_back(si_robot(v2(-2.0, 0.0), v2(2.0, 0.0), 0.04, 0.06));
  s.robots.push_back(si_robot(v2(2.0, 0.0), v2(-2.0, 0.0), 0.04, 0.06));
  World w(s);
  const Metrics m = w.run();

  CHECK(w.status(0) == RobotStatus::AtGoal);
  CHECK(w.status(1) == RobotStatus::AtGoal);
  CHECK(m.collision_rate == 0.0);
  CHECK(m.min_inter_robot_distance >= 0.4);
}

TEST_CASE("robot blocked by an obstacle declares deadlock and rounds it") {
  // Noise-free run straight at a box: the robot pins against the retracted
  // shadow face, the progress monitor fires, and the tangential slide takes
  // it around the corner and on to the goal.
  Scenario s = base10x10();
  s.seed = 1;
  s.robots.push_back(si_robot(v2(-3.0, 0.0), v2(3.0, 0.0), 0.0, 0.0));
  UncertainObstacle o;
  o.nominal.vertices = {v2(-0.5, -0.6), v2(0.5, -0.6), v2(0.5, 0.6),
                        v2(-0.5, 0.6)};
  o.translation_cov = sq(1e-4) * Mat::Identity(2, 2);
  s.obstacles.push_back(o);
  World w(s);
  const Metrics m = w.run();

  CHECK(w.status(0) == RobotStatus::AtGoal);
  CHECK(m.collision_rate == 0.0);
  CHECK(m.min_robot_obstacle_distance >= 0.19);
  bool declared = false;
  for (const StepRecord& rec : w.records()) {
    declared = declared || rec.robots[0].deadlock;
  }
  CHECK(declared);
  // The detour is strictly longer than the 6 m straight line.
  CHECK(m.avg_travelled_distance > 6.3);
  CHECK(m.steps < s.max_steps);
}

TEST_CASE("streaming metrics equal metrics recomputed from the records") {
  Scenario s = base10x10();
  s.seed = 11;
  s.max_steps = 300;
  s.robots.push_back(si_robot(v2(-3.0, 0.3), v2(3.0, -0.3), 0.04, 0.06));
  s.robots.push_back(si_robot(v2(3.0, 0.3), v2(-3.0, -0.3), 0.04, 0.06));
  s.robots.push_back(si_robot(v2(0.0, -3.0), v2(0.0, 3.0), 0.04, 0.06));
  UncertainObstacle o;
  o.nominal.vertices = {v2(-0.5, 1.5), v2(0.5, 1.5), v2(0.5, 2.5),
                        v2(-0.5, 2.5)};
  o.translation_cov = sq(0.02) * Mat::Identity(2, 2);
  s.obstacles.push_back(o);

  World w(s);
  const Metrics live = w.run();
  const Metrics replay = w.recompute_metrics();
  CHECK(live.collision_rate == replay.collision_rate);
  CHECK(live.min_inter_robot_distance == replay.min_inter_robot_distance);
  CHECK(live.min_robot_obstacle_distance ==
        replay.min_robot_obstacle_distance);
  CHECK(live.avg_travelled_distance == replay.avg_travelled_distance);
  CHECK(live.completion_time == replay.completion_time);
  CHECK(live.deadlock_count == replay.deadlock_count);
  CHECK(live.empty_cell_steps == replay.empty_cell_steps);
  CHECK(live.steps == replay.steps);
}

TEST_CASE("scenario validation rejects malformed inputs") {
  Scenario s = base10x10();
  s.robots.push_back(si_robot(v2(0.0, 0.0), v2(1.0, 0.0), 0.0, 0.0));

  Scenario bad = s;
  bad.delta = 0.9;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);

  bad = s;
  bad.robots.push_back(si_robot(v2(0.1, 0.0), v2(-1.0, 0.0), 0.0, 0.0));
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);  // starts in contact

  bad = s;
  bad.robots[0].goal = v2(9.0, 0.0);
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);  // outside workspace

  bad = s;
  bad.robots[0].dynamics = RobotDynamics::MpcQuadrotor;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);  // needs 3 dimensions

  bad = s;
  bad.estimation.inflation_factor = 0.5;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
}

TEST_CASE("antipodal circle generator places the textbook pair") {
  Scenario g = gen_antipodal_circle(2, 4.0, base10x10());
  REQUIRE(int(g.robots.size()) == 2);
  CHECK((g.robots[0].start - v2(4.0, 0.0)).norm() < 1e-12);
  CHECK((g.robots[0].goal - v2(-4.0, 0.0)).norm() < 1e-12);
  CHECK((g.robots[1].start - v2(-4.0, 0.0)).norm() < 1e-12);
  CHECK((g.robots[1].goal - v2(4.0, 0.0)).norm() < 1e-12);
}

TEST_CASE("antipodal circle spacing follows the chord formula") {
  Scenario g = gen_antipodal_circle(32, 4.0, base10x10());
  REQUIRE(int(g.robots.size()) == 32);
  const double chord = (g.robots[1].start - g.robots[0].start).norm();
  CHECK(chord == doctest::Approx(2.0 * 4.0 * std::sin(M_PI / 32)).epsilon(1e-12));
  CHECK(chord > 0.4);
  for (const RobotSpec& r : g.robots) {
    CHECK((r.start + r.goal).norm() < 1e-12);  // antipodal about the center
  }
  // 80 robots on the same circle would start closer than two radii.
  CHECK_THROWS_AS(gen_antipodal_circle(80, 4.0, base10x10()),
                  std::invalid_argument);
}

TEST_CASE("asymmetric swap generator fills sectors and opposite goals") {
  const int n = 8;
  Scenario g = gen_asymmetric_swap(n, 42, base10x10());
  REQUIRE(int(g.robots.size()) == n);
  auto sector_of = [&](const Vec& p) {
    double ang = std::atan2(p[1], p[0]);
    if (ang < 0.0) ang += 2.0 * M_PI;
    return int(ang / (2.0 * M_PI / n));
  };
  for (int k = 0; k < n; ++k) {
    CHECK(sector_of(g.robots[k].start) == k);
    CHECK(sector_of(g.robots[k].goal) == (k + n / 2) % n);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      CHECK((g.robots[i].start - g.robots[j].start).norm() >= 0.4);
    }
  }
  Scenario h = gen_asymmetric_swap(n, 42, base10x10());
  for (int k = 0; k < n; ++k) {
    CHECK((g.robots[k].start - h.robots[k].start).norm() == 0.0);
    CHECK((g.robots[k].goal - h.robots[k].goal).norm() == 0.0);
  }
  Scenario other = gen_asymmetric_swap(n, 43, base10x10());
  double moved = 0.0;
  for (int k = 0; k < n; ++k) {
    moved += (g.robots[k].start - other.robots[k].start).norm();
  }
  CHECK(moved > 0.0);
}

TEST_CASE("random scenario hits the requested obstacle density") {
  Scenario g = gen_random_moving(4, 0.10, 5, base10x10());
  double covered = 0.0;
  for (const UncertainObstacle& o : g.obstacles) {
    REQUIRE(int(o.nominal.vertices.size()) == 4);
    const double w = o.nominal.vertices[1][0] - o.nominal.vertices[0][0];
    const double h = o.nominal.vertices[2][1] - o.nominal.vertices[1][1];
    CHECK(w > 0.0);
    CHECK(h > 0.0);
    covered += w * h;
  }
  CHECK(covered >= 0.09 * 100.0);
  CHECK(covered <= 0.11 * 100.0);
  for (const RobotSpec& r : g.robots) {
    for (const UncertainObstacle& o : g.obstacles) {
      CHECK(distance(o.nominal, r.start) >= r.r_s);
      CHECK(distance(o.nominal, r.goal) >= r.r_s);
    }
  }

  Scenario empty = gen_random_moving(4, 0.0, 5, base10x10());
  CHECK(empty.obstacles.empty());

  Scenario again = gen_random_moving(4, 0.10, 5, base10x10());
  REQUIRE(again.obstacles.size() == g.obstacles.size());
  for (std::size_t k = 0; k < g.robots.size(); ++k) {
    CHECK((g.robots[k].start - again.robots[k].start).norm() == 0.0);
  }
}

TEST_CASE("baseline cells carry the margin-retracted midplane") {
  Scenario s = base10x10();
  s.method = CellMethod::BVC;
  s.bvc_margin = 0.1;
  s.max_steps = 1;
  s.robots.push_back(si_robot(v2(-1.0, 0.0), v2(-1.0, 0.0), 0.0, 0.0));
  s.robots.push_back(si_robot(v2(1.0, 0.0), v2(1.0, 0.0), 0.0, 0.0));
  World w(s);
  const StepRecord& rec = w.step();

  // One midplane face plus the four workspace walls.
  CHECK(rec.robots[0].cell_faces == 5);
  CHECK_FALSE(rec.robots[0].cell_empty);
}

TEST_CASE("a robot blind to an obstacle collides with its sampled pose") {
  Scenario s = base10x10();
  s.method = CellMethod::BVC;  // baseline ignores obstacles entirely
  s.robots.push_back(si_robot(v2(-3.0, 0.0), v2(3.0, 0.0), 0.0, 0.0));
  UncertainObstacle o;
  o.nominal.vertices = {v2(-0.5, -0.5), v2(0.5, -0.5), v2(0.5, 0.5),
                        v2(-0.5, 0.5)};
  o.translation_cov = Mat::Zero(2, 2);
  s.obstacles.push_back(o);

  World w(s);
  const Metrics m = w.run();
  CHECK(w.status(0) == RobotStatus::Collided);
  CHECK(m.collision_rate == 1.0);
  CHECK(m.min_robot_obstacle_distance < 0.2);
  CHECK(m.steps < 200);

  // Zero translation covariance pins the sampled pose to the nominal one.
  CHECK((w.true_obstacles()[0].vertices[0] - o.nominal.vertices[0]).norm() ==
        0.0);
}

TEST_CASE("obstacle ground truth is one draw from the declared stream") {
  Scenario s = base10x10();
  s.seed = 21;
  s.max_steps = 1;
  s.robots.push_back(si_robot(v2(-4.0, -4.0), v2(-4.0, -4.0), 0.0, 0.0));
  UncertainObstacle o;
  o.nominal.vertices = {v2(1.0, 1.0), v2(2.0, 1.0), v2(2.0, 2.0),
                        v2(1.0, 2.0)};
  o.translation_cov = sq(0.05) * Mat::Identity(2, 2);
  s.obstacles.push_back(o);

  World w(s);
  Rng mirror = Rng::stream(s.seed, 100000);
  const Vec shift =
      sample_gaussian(Vec::Zero(2), o.translation_cov, mirror);
  for (int k = 0; k < 4; ++k) {
    CHECK((w.true_obstacles()[0].vertices[k] -
           (o.nominal.vertices[k] + shift))
              .norm() == 0.0);
  }
  CHECK(shift.norm() > 0.0);

  // Fixed per run: a second world with the same seed samples the same pose.
  World w2(s);
  CHECK((w.true_obstacles()[0].vertices[0] -
         w2.true_obstacles()[0].vertices[0])
            .norm() == 0.0);
}

TEST_CASE("kalman mode tracks and reaches the goal") {
  Scenario s = base10x10();
  s.seed = 9;
  s.estimation.mode = EstimationMode::Kalman;
  s.estimation.inflation_factor = 1.2;
  s.robots.push_back(si_robot(v2(-3.0, 1.0), v2(3.0, 1.0), 0.0, 0.0));
  s.robots.push_back(si_robot(v2(3.0, -1.0), v2(-3.0, -1.0), 0.0, 0.0));
  World w(s);
  const Metrics m = w.run();

  CHECK(w.status(0) == RobotStatus::AtGoal);
  CHECK(w.status(1) == RobotStatus::AtGoal);
  CHECK(m.collision_rate == 0.0);
  const StepRecord& last = w.records().back();
  // Posterior position std settles near the constant-velocity fixed point.
  const double stdev = std::sqrt(last.robots[0].est_cov(0, 0));
  CHECK(stdev > 0.02);
  CHECK(stdev < 0.07);
}

TEST_CASE("differential drive robot arrives facing its goal") {
  Scenario s = base10x10();
  s.robots.push_back(si_robot(v2(-3.0, 0.0), v2(3.0, 0.0), 0.0, 0.0));
  s.robots[0].dynamics = RobotDynamics::DiffDrive;
  s.robots[0].theta0 = 0.0;
  s.robots[0].k_gain = 2.0;
  World w(s);
  w.run();
  CHECK(w.status(0) == RobotStatus::AtGoal);
}

TEST_CASE("planned double integrator crosses and stops at the goal") {
  Scenario s = base10x10();
  s.dt = 0.05;
  s.max_steps = 400;
  s.robots.push_back(si_robot(v2(-2.0, 0.0), v2(2.0, 0.0), 0.0, 0.0));
  s.robots[0].dynamics = RobotDynamics::MpcDouble;
  s.robots[0].acc_max = 1.0;
  World w(s);
  const Metrics m = w.run();
  CHECK(w.status(0) == RobotStatus::AtGoal);
  CHECK(m.completion_time > 0.0);
}
