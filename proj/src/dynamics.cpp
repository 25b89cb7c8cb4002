#include "buavc/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace buavc {

Eigen::VectorXd rk4_step(const DynamicsModel& model, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u, double dt) {
  const Eigen::VectorXd k1 = model.deriv(x, u);
  const Eigen::VectorXd k2 = model.deriv(x + 0.5 * dt * k1, u);
  const Eigen::VectorXd k3 = model.deriv(x + 0.5 * dt * k2, u);
  const Eigen::VectorXd k4 = model.deriv(x + dt * k3, u);
  Eigen::VectorXd next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!next.allFinite()) {
    throw std::runtime_error("rk4_step produced a non-finite state");
  }
  return next;
}

Eigen::VectorXd rk4_step_jac(const DynamicsModel& model,
                             const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                             double dt, Eigen::MatrixXd& ad,
                             Eigen::MatrixXd& bd) {
  const int n = model.state_dim();
  const int m = model.input_dim();
  Eigen::MatrixXd a1(n, n), a2(n, n), a3(n, n), a4(n, n);
  Eigen::MatrixXd b1(n, m), b2(n, m), b3(n, m), b4(n, m);

  const Eigen::VectorXd k1 = model.deriv(x, u);
  model.jac(x, u, a1, b1);
  const Eigen::VectorXd x2 = x + 0.5 * dt * k1;
  const Eigen::VectorXd k2 = model.deriv(x2, u);
  model.jac(x2, u, a2, b2);
  const Eigen::VectorXd x3 = x + 0.5 * dt * k2;
  const Eigen::VectorXd k3 = model.deriv(x3, u);
  model.jac(x3, u, a3, b3);
  const Eigen::VectorXd x4 = x + dt * k3;
  const Eigen::VectorXd k4 = model.deriv(x4, u);
  model.jac(x4, u, a4, b4);

  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd dk1 = a1;
  const Eigen::MatrixXd dk2 = a2 * (id + 0.5 * dt * dk1);
  const Eigen::MatrixXd dk3 = a3 * (id + 0.5 * dt * dk2);
  const Eigen::MatrixXd dk4 = a4 * (id + dt * dk3);
  ad = id + (dt / 6.0) * (dk1 + 2.0 * dk2 + 2.0 * dk3 + dk4);

  const Eigen::MatrixXd du1 = b1;
  const Eigen::MatrixXd du2 = b2 + a2 * (0.5 * dt * du1);
  const Eigen::MatrixXd du3 = b3 + a3 * (0.5 * dt * du2);
  const Eigen::MatrixXd du4 = b4 + a4 * (dt * du3);
  bd = (dt / 6.0) * (du1 + 2.0 * du2 + 2.0 * du3 + du4);

  Eigen::VectorXd next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!next.allFinite()) {
    throw std::runtime_error("rk4_step produced a non-finite state");
  }
  return next;
}

Eigen::VectorXd SingleIntegratorModel::deriv(const Eigen::VectorXd&,
                                             const Eigen::VectorXd& u) const {
  return u;
}

void SingleIntegratorModel::jac(const Eigen::VectorXd&, const Eigen::VectorXd&,
                                Eigen::MatrixXd& a, Eigen::MatrixXd& b) const {
  a = Eigen::MatrixXd::Zero(d_, d_);
  b = Eigen::MatrixXd::Identity(d_, d_);
}

Eigen::VectorXd SingleIntegratorModel::input_lo() const {
  return Eigen::VectorXd::Constant(d_, -v_max_);
}

Eigen::VectorXd SingleIntegratorModel::input_hi() const {
  return Eigen::VectorXd::Constant(d_, v_max_);
}

Eigen::VectorXd SingleIntegratorModel::braking_input(
    const Eigen::VectorXd&) const {
  return Eigen::VectorXd::Zero(d_);
}

Eigen::VectorXd DoubleIntegratorModel::deriv(const Eigen::VectorXd& x,
                                             const Eigen::VectorXd& u) const {
  Eigen::VectorXd dx(2 * d_);
  dx.head(d_) = x.tail(d_);
  dx.tail(d_) = u;
  return dx;
}

void DoubleIntegratorModel::jac(const Eigen::VectorXd&, const Eigen::VectorXd&,
                                Eigen::MatrixXd& a, Eigen::MatrixXd& b) const {
  a = Eigen::MatrixXd::Zero(2 * d_, 2 * d_);
  a.topRightCorner(d_, d_) = Eigen::MatrixXd::Identity(d_, d_);
  b = Eigen::MatrixXd::Zero(2 * d_, d_);
  b.bottomRows(d_) = Eigen::MatrixXd::Identity(d_, d_);
}

Eigen::VectorXd DoubleIntegratorModel::input_lo() const {
  return Eigen::VectorXd::Constant(d_, -acc_max_);
}

Eigen::VectorXd DoubleIntegratorModel::input_hi() const {
  return Eigen::VectorXd::Constant(d_, acc_max_);
}

Eigen::VectorXd DoubleIntegratorModel::braking_input(
    const Eigen::VectorXd& x) const {
  const Eigen::VectorXd v = x.tail(d_);
  const double speed = v.norm();
  if (speed <= 1e-12) {
    return Eigen::VectorXd::Zero(d_);
  }
  return clamp_input(-acc_max_ * v / speed);
}

Eigen::VectorXd UnicycleModel::deriv(const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& u) const {
  Eigen::VectorXd dx(3);
  dx << u[0] * std::cos(x[2]), u[0] * std::sin(x[2]), u[1];
  return dx;
}

void UnicycleModel::jac(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                        Eigen::MatrixXd& a, Eigen::MatrixXd& b) const {
  a = Eigen::MatrixXd::Zero(3, 3);
  a(0, 2) = -u[0] * std::sin(x[2]);
  a(1, 2) = u[0] * std::cos(x[2]);
  b = Eigen::MatrixXd::Zero(3, 2);
  b(0, 0) = std::cos(x[2]);
  b(1, 0) = std::sin(x[2]);
  b(2, 1) = 1.0;
}

Eigen::VectorXd UnicycleModel::input_lo() const {
  Eigen::VectorXd lo(2);
  lo << 0.0, -omega_max_;
  return lo;
}

Eigen::VectorXd UnicycleModel::input_hi() const {
  Eigen::VectorXd hi(2);
  hi << v_max_, omega_max_;
  return hi;
}

Eigen::VectorXd UnicycleModel::braking_input(const Eigen::VectorXd&) const {
  return Eigen::VectorXd::Zero(2);
}

Eigen::VectorXd QuadrotorModel::deriv(const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& u) const {
  const double vx = x[3], vy = x[4], vz = x[5];
  const double phi = x[6], theta = x[7], psi = x[8];
  const double cpsi = std::cos(psi), spsi = std::sin(psi);
  const double g = p_.gravity;

  Eigen::VectorXd dx(9);
  dx.head(3) = x.segment(3, 3);
  dx[3] = g * (cpsi * std::tan(theta) + spsi * std::tan(phi)) - p_.k_dx * vx;
  dx[4] = g * (spsi * std::tan(theta) - cpsi * std::tan(phi)) - p_.k_dy * vy;
  dx[5] = (p_.k_vz * u[2] - vz) / p_.tau_vz;
  dx[6] = (p_.k_phi * u[0] - phi) / p_.tau_phi;
  dx[7] = (p_.k_theta * u[1] - theta) / p_.tau_theta;
  dx[8] = u[3];
  return dx;
}

void QuadrotorModel::jac(const Eigen::VectorXd& x, const Eigen::VectorXd&,
                         Eigen::MatrixXd& a, Eigen::MatrixXd& b) const {
  const double phi = x[6], theta = x[7], psi = x[8];
  const double cpsi = std::cos(psi), spsi = std::sin(psi);
  const double sec2phi = 1.0 / (std::cos(phi) * std::cos(phi));
  const double sec2theta = 1.0 / (std::cos(theta) * std::cos(theta));
  const double g = p_.gravity;

  a = Eigen::MatrixXd::Zero(9, 9);
  a.block(0, 3, 3, 3) = Eigen::Matrix3d::Identity();
  a(3, 3) = -p_.k_dx;
  a(3, 6) = g * spsi * sec2phi;
  a(3, 7) = g * cpsi * sec2theta;
  a(3, 8) = g * (-spsi * std::tan(theta) + cpsi * std::tan(phi));
  a(4, 4) = -p_.k_dy;
  a(4, 6) = -g * cpsi * sec2phi;
  a(4, 7) = g * spsi * sec2theta;
  a(4, 8) = g * (cpsi * std::tan(theta) + spsi * std::tan(phi));
  a(5, 5) = -1.0 / p_.tau_vz;
  a(6, 6) = -1.0 / p_.tau_phi;
  a(7, 7) = -1.0 / p_.tau_theta;

  b = Eigen::MatrixXd::Zero(9, 4);
  b(5, 2) = p_.k_vz / p_.tau_vz;
  b(6, 0) = p_.k_phi / p_.tau_phi;
  b(7, 1) = p_.k_theta / p_.tau_theta;
  b(8, 3) = 1.0;
}

Eigen::VectorXd QuadrotorModel::input_lo() const {
  Eigen::VectorXd lo(4);
  lo << -p_.attitude_max, -p_.attitude_max, -p_.vz_max, -p_.yawrate_max;
  return lo;
}

Eigen::VectorXd QuadrotorModel::input_hi() const {
  Eigen::VectorXd hi(4);
  hi << p_.attitude_max, p_.attitude_max, p_.vz_max, p_.yawrate_max;
  return hi;
}

Eigen::VectorXd QuadrotorModel::braking_input(const Eigen::VectorXd&) const {
  return Eigen::VectorXd::Zero(4);
}

}  // namespace buavc
