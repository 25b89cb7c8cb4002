#pragma once

#include <Eigen/Dense>

#include "buavc/mathkit.hpp"

namespace buavc {

/// Continuous-time robot model. States put the workspace position in the
/// leading space_dim entries so planners can read and constrain it with a
/// fixed linear extractor.
class DynamicsModel {
 public:
  virtual ~DynamicsModel() = default;

  virtual int state_dim() const = 0;
  virtual int input_dim() const = 0;
  virtual int space_dim() const = 0;

  virtual Eigen::VectorXd deriv(const Eigen::VectorXd& x,
                                const Eigen::VectorXd& u) const = 0;

  /// Continuous Jacobians A = df/dx, B = df/du.
  virtual void jac(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                   Eigen::MatrixXd& a, Eigen::MatrixXd& b) const = 0;

  virtual Eigen::VectorXd input_lo() const = 0;
  virtual Eigen::VectorXd input_hi() const = 0;

  /// Safe anchor input: maximal deceleration for integrators, hover for the
  /// quadrotor.
  virtual Eigen::VectorXd braking_input(const Eigen::VectorXd& x) const = 0;

  Vec position(const Eigen::VectorXd& x) const {
    return Vec(x.head(space_dim()));
  }
  Eigen::VectorXd clamp_input(const Eigen::VectorXd& u) const {
    return u.cwiseMax(input_lo()).cwiseMin(input_hi());
  }
};

/// Classical 4th-order step. Exact for the linear integrator models.
/// Throws on a non-finite result.
Eigen::VectorXd rk4_step(const DynamicsModel& model, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u, double dt);

/// Step together with the discrete sensitivities of the result w.r.t. the
/// state and input, chained through the four stages.
Eigen::VectorXd rk4_step_jac(const DynamicsModel& model,
                             const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                             double dt, Eigen::MatrixXd& ad,
                             Eigen::MatrixXd& bd);

/// dp/dt = u, |u_i| <= v_max componentwise.
class SingleIntegratorModel : public DynamicsModel {
 public:
  SingleIntegratorModel(int d, double v_max) : d_(d), v_max_(v_max) {}
  int state_dim() const override { return d_; }
  int input_dim() const override { return d_; }
  int space_dim() const override { return d_; }
  Eigen::VectorXd deriv(const Eigen::VectorXd&,
                        const Eigen::VectorXd& u) const override;
  void jac(const Eigen::VectorXd&, const Eigen::VectorXd&, Eigen::MatrixXd& a,
           Eigen::MatrixXd& b) const override;
  Eigen::VectorXd input_lo() const override;
  Eigen::VectorXd input_hi() const override;
  Eigen::VectorXd braking_input(const Eigen::VectorXd&) const override;

 private:
  int d_;
  double v_max_;
};

/// State [p; v], input acceleration, |u_i| <= acc_max componentwise.
class DoubleIntegratorModel : public DynamicsModel {
 public:
  DoubleIntegratorModel(int d, double acc_max) : d_(d), acc_max_(acc_max) {}
  int state_dim() const override { return 2 * d_; }
  int input_dim() const override { return d_; }
  int space_dim() const override { return d_; }
  Eigen::VectorXd deriv(const Eigen::VectorXd& x,
                        const Eigen::VectorXd& u) const override;
  void jac(const Eigen::VectorXd&, const Eigen::VectorXd&, Eigen::MatrixXd& a,
           Eigen::MatrixXd& b) const override;
  Eigen::VectorXd input_lo() const override;
  Eigen::VectorXd input_hi() const override;
  Eigen::VectorXd braking_input(const Eigen::VectorXd& x) const override;

 private:
  int d_;
  double acc_max_;
};

/// State [x, y, theta], input [v, omega].
class UnicycleModel : public DynamicsModel {
 public:
  UnicycleModel(double v_max, double omega_max)
      : v_max_(v_max), omega_max_(omega_max) {}
  int state_dim() const override { return 3; }
  int input_dim() const override { return 2; }
  int space_dim() const override { return 2; }
  Eigen::VectorXd deriv(const Eigen::VectorXd& x,
                        const Eigen::VectorXd& u) const override;
  void jac(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
           Eigen::MatrixXd& a, Eigen::MatrixXd& b) const override;
  Eigen::VectorXd input_lo() const override;
  Eigen::VectorXd input_hi() const override;
  Eigen::VectorXd braking_input(const Eigen::VectorXd&) const override;

 private:
  double v_max_;
  double omega_max_;
};

/// Identified closed-loop quadrotor parameters.
struct QuadrotorParams {
  double k_dx = 0.25;
  double k_dy = 0.33;
  double k_vz = 1.2270;
  double tau_vz = 0.3367;
  double k_phi = 1.1260;
  double tau_phi = 0.2368;
  double k_theta = 1.1075;
  double tau_theta = 0.2318;
  double gravity = 9.81;
  double attitude_max = 0.26179938779914946;  // 15 degrees
  double vz_max = 1.0;
  double yawrate_max = 1.5707963267948966;
};

/// State [p(3), v(3), roll, pitch, yaw], input [roll_c, pitch_c, vz_c,
/// yawrate_c]. Attitude loops are first-order lags; horizontal acceleration
/// comes from the tilted thrust direction minus linear drag.
class QuadrotorModel : public DynamicsModel {
 public:
  explicit QuadrotorModel(QuadrotorParams params = {}) : p_(params) {}
  int state_dim() const override { return 9; }
  int input_dim() const override { return 4; }
  int space_dim() const override { return 3; }
  Eigen::VectorXd deriv(const Eigen::VectorXd& x,
                        const Eigen::VectorXd& u) const override;
  void jac(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
           Eigen::MatrixXd& a, Eigen::MatrixXd& b) const override;
  Eigen::VectorXd input_lo() const override;
  Eigen::VectorXd input_hi() const override;
  Eigen::VectorXd braking_input(const Eigen::VectorXd&) const override;
  const QuadrotorParams& params() const { return p_; }

 private:
  QuadrotorParams p_;
};

}  // namespace buavc
