#pragma once

#include <vector>

#include <Eigen/Dense>

#include "buavc/cells.hpp"
#include "buavc/dynamics.hpp"
#include "buavc/mathkit.hpp"

namespace buavc {

struct MPCConfig {
  int n_stages = 20;
  double dt = 0.05;
  Eigen::MatrixXd input_cost;     // n_u x n_u, PSD
  Eigen::MatrixXd terminal_cost;  // d x d, PSD
  int max_iters = 100;
  double tol = 1e-8;
};

/// Config with the default weights 0.1*I on inputs and 10*I on the terminal
/// position error, sized for the model.
MPCConfig make_mpc_config(const DynamicsModel& model, int n_stages, double dt);

struct PlannedTrajectory {
  std::vector<Eigen::VectorXd> states;  // x^1 .. x^N
  std::vector<Eigen::VectorXd> inputs;  // u^0 .. u^{N-1}
  double cost = 0.0;                    // input + terminal objective
  double max_violation = 0.0;           // worst cell-face overshoot, any stage
  double defect_norm = 0.0;             // re-integration residual
  bool degraded = false;                // braking fallback in effect
  std::vector<double> cost_trace;       // per accepted iterate, final penalty
};

struct MPCWarmStart {
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::VectorXd> inputs;
};

/// Integrate the input sequence from x0, returning x^1 .. x^N.
std::vector<Eigen::VectorXd> rollout(const DynamicsModel& model,
                                     const Eigen::VectorXd& x0,
                                     const std::vector<Eigen::VectorXd>& inputs,
                                     double dt);

/// Trajectory obtained by applying the model's braking input at every stage.
PlannedTrajectory braking_trajectory(const DynamicsModel& model,
                                     const Eigen::VectorXd& x0, const Vec& goal,
                                     const BUAVC& cell, const MPCConfig& config);

/// Receding-horizon plan keeping every stage position inside the cell. Inputs
/// respect the model's box bounds exactly; face constraints are enforced by an
/// escalating penalty and accepted only when the worst violation is at most
/// 1e-6, otherwise the braking trajectory is returned with degraded set.
PlannedTrajectory plan(const Eigen::VectorXd& x0, const Vec& goal,
                       const BUAVC& cell, const DynamicsModel& model,
                       const MPCConfig& config,
                       const MPCWarmStart* warm_start = nullptr);

/// Shift one stage for the next solve; the last stage is duplicated.
MPCWarmStart shift_warm_start(const PlannedTrajectory& prev);

}  // namespace buavc
