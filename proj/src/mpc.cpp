#include "buavc/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace buavc {
namespace {

struct FaceList {
  std::vector<Vec> normals;
  std::vector<double> offsets;
};

FaceList effective_faces(const BUAVC& cell) {
  FaceList out;
  out.normals.reserve(cell.faces.size());
  out.offsets.reserve(cell.faces.size());
  for (const BufferedFace& f : cell.faces) {
    const Hyperplane h = f.effective();
    out.normals.push_back(h.normal);
    out.offsets.push_back(h.offset);
  }
  return out;
}

double stage_violation(const FaceList& faces, const Vec& p) {
  double worst = 0.0;
  for (std::size_t i = 0; i < faces.normals.size(); ++i) {
    worst = std::max(worst, faces.normals[i].dot(p) - faces.offsets[i]);
  }
  return worst;
}

struct Evaluation {
  std::vector<Eigen::VectorXd> states;
  double true_cost = 0.0;
  double penalized = 0.0;
  double max_violation = 0.0;
};

Evaluation evaluate(const DynamicsModel& model, const Eigen::VectorXd& x0,
                    const std::vector<Eigen::VectorXd>& inputs,
                    const Vec& goal, const FaceList& faces,
                    const MPCConfig& cfg, double mu) {
  const int d = model.space_dim();
  Evaluation ev;
  ev.states.reserve(inputs.size());
  Eigen::VectorXd x = x0;
  double penalty = 0.0;
  for (const Eigen::VectorXd& u : inputs) {
    x = rk4_step(model, x, u, cfg.dt);
    ev.states.push_back(x);
    ev.true_cost += u.dot(cfg.input_cost * u);
    const double v = stage_violation(faces, Vec(x.head(d)));
    ev.max_violation = std::max(ev.max_violation, v);
    penalty += v * v;
  }
  const Vec err = Vec(ev.states.back().head(d)) - goal;
  ev.true_cost += err.dot(cfg.terminal_cost * err);
  ev.penalized = ev.true_cost + mu * penalty;
  return ev;
}

/// Gradient of the penalized objective w.r.t. each input, by the adjoint
/// recursion through the discrete RK4 sensitivities.
std::vector<Eigen::VectorXd> gradient(const DynamicsModel& model,
                                      const Eigen::VectorXd& x0,
                                      const std::vector<Eigen::VectorXd>& inputs,
                                      const Vec& goal, const FaceList& faces,
                                      const MPCConfig& cfg, double mu) {
  const int n = model.state_dim();
  const int m = model.input_dim();
  const int d = model.space_dim();
  const int big_n = static_cast<int>(inputs.size());

  std::vector<Eigen::MatrixXd> ad(big_n), bd(big_n);
  std::vector<Eigen::VectorXd> states(big_n);
  Eigen::VectorXd x = x0;
  for (int k = 0; k < big_n; ++k) {
    ad[k].resize(n, n);
    bd[k].resize(n, m);
    x = rk4_step_jac(model, x, inputs[k], cfg.dt, ad[k], bd[k]);
    states[k] = x;
  }

  auto face_grad = [&](const Eigen::VectorXd& xk) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
    const Vec p(xk.head(d));
    for (std::size_t i = 0; i < faces.normals.size(); ++i) {
      const double v = faces.normals[i].dot(p) - faces.offsets[i];
      if (v > 0.0) {
        g.head(d) += 2.0 * mu * v * faces.normals[i];
      }
    }
    return g;
  };

  Eigen::VectorXd lambda = face_grad(states.back());
  const Vec err = Vec(states.back().head(d)) - goal;
  lambda.head(d) += 2.0 * (cfg.terminal_cost * err);

  std::vector<Eigen::VectorXd> grad(big_n);
  for (int k = big_n - 1; k >= 0; --k) {
    grad[k] = bd[k].transpose() * lambda + 2.0 * (cfg.input_cost * inputs[k]);
    if (k > 0) {
      lambda = ad[k].transpose() * lambda + face_grad(states[k - 1]);
    }
  }
  return grad;
}

double dot(const std::vector<Eigen::VectorXd>& a,
           const std::vector<Eigen::VectorXd>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    s += a[k].dot(b[k]);
  }
  return s;
}

std::vector<Eigen::VectorXd> clamp_all(const DynamicsModel& model,
                                       std::vector<Eigen::VectorXd> u) {
  for (Eigen::VectorXd& uk : u) {
    uk = model.clamp_input(uk);
  }
  return u;
}

std::vector<Eigen::VectorXd> braking_inputs(const DynamicsModel& model,
                                            const Eigen::VectorXd& x0,
                                            const MPCConfig& cfg) {
  std::vector<Eigen::VectorXd> u;
  u.reserve(cfg.n_stages);
  Eigen::VectorXd x = x0;
  for (int k = 0; k < cfg.n_stages; ++k) {
    const Eigen::VectorXd uk = model.clamp_input(model.braking_input(x));
    u.push_back(uk);
    x = rk4_step(model, x, uk, cfg.dt);
  }
  return u;
}

PlannedTrajectory pack(const DynamicsModel& model, const Eigen::VectorXd& x0,
                       std::vector<Eigen::VectorXd> inputs, const Vec& goal,
                       const FaceList& faces, const MPCConfig& cfg,
                       bool degraded) {
  const Evaluation ev = evaluate(model, x0, inputs, goal, faces, cfg, 0.0);
  PlannedTrajectory out;
  out.states = ev.states;
  out.inputs = std::move(inputs);
  out.cost = ev.true_cost;
  out.max_violation = ev.max_violation;
  out.degraded = degraded;

  double defect = 0.0;
  Eigen::VectorXd x = x0;
  for (std::size_t k = 0; k < out.inputs.size(); ++k) {
    x = rk4_step(model, x, out.inputs[k], cfg.dt);
    defect = std::max(defect, (x - out.states[k]).cwiseAbs().maxCoeff());
  }
  out.defect_norm = defect;
  return out;
}

}  // namespace

MPCConfig make_mpc_config(const DynamicsModel& model, int n_stages, double dt) {
  MPCConfig cfg;
  cfg.n_stages = n_stages;
  cfg.dt = dt;
  cfg.input_cost =
      0.1 * Eigen::MatrixXd::Identity(model.input_dim(), model.input_dim());
  cfg.terminal_cost =
      10.0 * Eigen::MatrixXd::Identity(model.space_dim(), model.space_dim());
  return cfg;
}

std::vector<Eigen::VectorXd> rollout(const DynamicsModel& model,
                                     const Eigen::VectorXd& x0,
                                     const std::vector<Eigen::VectorXd>& inputs,
                                     double dt) {
  std::vector<Eigen::VectorXd> states;
  states.reserve(inputs.size());
  Eigen::VectorXd x = x0;
  for (const Eigen::VectorXd& u : inputs) {
    x = rk4_step(model, x, u, dt);
    states.push_back(x);
  }
  return states;
}

PlannedTrajectory braking_trajectory(const DynamicsModel& model,
                                     const Eigen::VectorXd& x0, const Vec& goal,
                                     const BUAVC& cell,
                                     const MPCConfig& config) {
  const FaceList faces = effective_faces(cell);
  return pack(model, x0, braking_inputs(model, x0, config), goal, faces, config,
              false);
}

PlannedTrajectory plan(const Eigen::VectorXd& x0, const Vec& goal,
                       const BUAVC& cell, const DynamicsModel& model,
                       const MPCConfig& config,
                       const MPCWarmStart* warm_start) {
  const FaceList faces = effective_faces(cell);
  const std::vector<Eigen::VectorXd> brake =
      braking_inputs(model, x0, config);
  if (cell.empty) {
    return pack(model, x0, brake, goal, faces, config, true);
  }

  std::vector<Eigen::VectorXd> u = brake;
  if (warm_start != nullptr &&
      static_cast<int>(warm_start->inputs.size()) == config.n_stages) {
    u = clamp_all(model, warm_start->inputs);
  }

  constexpr double kFeasible = 1e-6;
  const double mu_levels[] = {1e4, 1e5, 1e6, 1e7, 1e8, 1e9};
  std::vector<double> trace;
  double final_violation = std::numeric_limits<double>::infinity();

  for (double mu : mu_levels) {
    Evaluation ev = evaluate(model, x0, u, goal, faces, config, mu);
    const Evaluation ev_brake =
        evaluate(model, x0, brake, goal, faces, config, mu);
    if (ev_brake.penalized < ev.penalized) {
      u = brake;
      ev = ev_brake;
    }

    trace.clear();
    trace.push_back(ev.penalized);
    std::vector<Eigen::VectorXd> g =
        gradient(model, x0, u, goal, faces, config, mu);
    double alpha = 1.0 / (1.0 + std::sqrt(dot(g, g)));

    for (int iter = 0; iter < config.max_iters; ++iter) {
      std::vector<Eigen::VectorXd> cand;
      Evaluation ev_cand;
      bool accepted = false;
      double step = alpha;
      for (int bt = 0; bt < 40; ++bt) {
        cand = u;
        for (int k = 0; k < config.n_stages; ++k) {
          cand[k] = model.clamp_input(u[k] - step * g[k]);
        }
        ev_cand = evaluate(model, x0, cand, goal, faces, config, mu);
        double decrease = 0.0;
        for (int k = 0; k < config.n_stages; ++k) {
          decrease += g[k].dot(u[k] - cand[k]);
        }
        if (ev_cand.penalized <= ev.penalized - 1e-4 * decrease) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) {
        break;
      }

      double step_norm = 0.0;
      std::vector<Eigen::VectorXd> s(config.n_stages);
      for (int k = 0; k < config.n_stages; ++k) {
        s[k] = cand[k] - u[k];
        step_norm = std::max(step_norm, s[k].cwiseAbs().maxCoeff());
      }
      const std::vector<Eigen::VectorXd> g_new =
          gradient(model, x0, cand, goal, faces, config, mu);
      std::vector<Eigen::VectorXd> y(config.n_stages);
      for (int k = 0; k < config.n_stages; ++k) {
        y[k] = g_new[k] - g[k];
      }
      const double sy = dot(s, y);
      const double ss = dot(s, s);
      alpha = (sy > 1e-300) ? std::clamp(ss / sy, 1e-10, 1e3) : 1.0;

      u = std::move(cand);
      ev = ev_cand;
      g = g_new;
      trace.push_back(ev.penalized);
      if (step_norm < config.tol) {
        break;
      }
    }

    final_violation = ev.max_violation;
    if (final_violation <= 0.1 * kFeasible) {
      break;
    }
  }

  if (final_violation > kFeasible) {
    PlannedTrajectory fb = pack(model, x0, brake, goal, faces, config, true);
    fb.cost_trace = trace;
    return fb;
  }
  PlannedTrajectory out =
      pack(model, x0, std::move(u), goal, faces, config, false);
  out.cost_trace = trace;
  return out;
}

MPCWarmStart shift_warm_start(const PlannedTrajectory& prev) {
  MPCWarmStart ws;
  ws.states = prev.states;
  ws.inputs = prev.inputs;
  if (!ws.inputs.empty()) {
    ws.inputs.erase(ws.inputs.begin());
    ws.inputs.push_back(ws.inputs.empty() ? prev.inputs.back()
                                          : ws.inputs.back());
  }
  if (!ws.states.empty()) {
    ws.states.erase(ws.states.begin());
    ws.states.push_back(ws.states.empty() ? prev.states.back()
                                          : ws.states.back());
  }
  return ws;
}

}  // namespace buavc
