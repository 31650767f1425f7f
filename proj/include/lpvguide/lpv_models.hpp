#pragma once

// LPV representations of the vehicle: the kinematic tracking-error model and
// the augmented 6-state dynamic model, plus bounding-box vertex enumeration.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "vehicle.hpp"

namespace lpvguide {

struct KinematicError {
  double x_e = 0.0;
  double y_e = 0.0;
  double theta_e = 0.0;

  Eigen::Vector3d vector() const { return {x_e, y_e, theta_e}; }
};

struct SchedulingVariable {
  std::string name;
  double lower = 0.0;
  double upper = 0.0;

  bool operator==(const SchedulingVariable&) const = default;
};

/// Ordered scheduling intervals. The order fixes the canonical vertex order.
struct SchedulingBounds {
  std::vector<SchedulingVariable> variables;

  std::size_t size() const { return variables.size(); }
  std::size_t vertex_count() const { return std::size_t{1} << variables.size(); }

  void validate() const {
    if (variables.empty()) throw std::invalid_argument("SchedulingBounds: no variables");
    for (const auto& var : variables) {
      if (!(var.lower < var.upper) || !std::isfinite(var.lower) || !std::isfinite(var.upper)) {
        throw std::invalid_argument("SchedulingBounds: degenerate interval for '" + var.name + "'");
      }
    }
  }

  bool operator==(const SchedulingBounds&) const = default;

  /// {v: [1, 18], sigma: [0.0873, 0.9599]}
  static SchedulingBounds dynamic_default() {
    return {{{"v", 1.0, 18.0}, {"sigma", 0.0873, 0.9599}}};
  }

  /// {v_d: [1, 18], omega: [-1.417, 1.417], theta_e: [-0.139, 0.139]}
  static SchedulingBounds kinematic_default() {
    return {{{"v_d", 1.0, 18.0}, {"omega", -1.417, 1.417}, {"theta_e", -0.139, 0.139}}};
  }
};

/// Scheduling-variable values in the same order as the bounds they refer to.
using SchedulingPoint = Eigen::VectorXd;

enum class SteeringEvaluation { Sigma, Delta };
enum class SlipRow { Derived, Literal };

struct LpvConfig {
  double epsilon = 0.5236;     // delta -> sigma shift [rad]
  double filter_gain = 50.0;   // gamma_f [1/s]
  double steering_max = 0.4363;
  SteeringEvaluation steering_evaluation = SteeringEvaluation::Sigma;
  SlipRow slip_row = SlipRow::Derived;

  void validate() const {
    if (!(filter_gain > 0.0)) throw std::invalid_argument("LpvConfig: filter_gain must be positive");
    if (!(steering_max > 0.0)) throw std::invalid_argument("LpvConfig: steering_max must be positive");
    if (!(epsilon > steering_max)) {
      throw std::invalid_argument("LpvConfig: epsilon must exceed the steering bound");
    }
  }

  bool operator==(const LpvConfig&) const = default;
};

struct LpvMatrices {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd C;
  Eigen::VectorXd r;  // kinematic only; empty for the dynamic model
};

/// sin(x)/x, with a Taylor expansion near zero.
inline double sinc(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0 - x2 * x2 * x2 / 5040.0;
  }
  return std::sin(x) / x;
}

/// World-frame error rotated into the vehicle body frame.
inline KinematicError pose_error_body(const Pose& pose, const Pose& ref) {
  const double dx = ref.x - pose.x;
  const double dy = ref.y - pose.y;
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  return {c * dx + s * dy, -s * dx + c * dy, normalize_angle(ref.theta - pose.theta)};
}

/// Nonlinear open-loop error dynamics. u = (v, omega), ref = (v_d, omega_d).
inline Eigen::Vector3d kinematic_error_derivatives(const KinematicError& err,
                                                   const Eigen::Vector2d& u,
                                                   const Eigen::Vector2d& ref) {
  const double v = u(0), omega = u(1);
  const double v_d = ref(0), omega_d = ref(1);
  return {omega * err.y_e + v_d * std::cos(err.theta_e) - v,
          -omega * err.x_e + v_d * std::sin(err.theta_e), omega_d - omega};
}

inline Eigen::MatrixXd kinematic_input_matrix() {
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(3, 2);
  B(0, 0) = -1.0;
  B(2, 1) = -1.0;
  return B;
}

/// x_e' = A x_e + B u - B r, exact for the nonlinear error model.
inline LpvMatrices kinematic_lpv_matrices(double v_d, double omega, double theta_e,
                                          double omega_d = 0.0) {
  LpvMatrices m;
  m.A = Eigen::MatrixXd::Zero(3, 3);
  m.A(0, 1) = omega;
  m.A(1, 0) = -omega;
  m.A(1, 2) = v_d * sinc(theta_e);
  m.B = kinematic_input_matrix();
  m.C = Eigen::MatrixXd::Identity(3, 3);
  m.r = Eigen::Vector2d(v_d * std::cos(theta_e), omega_d);
  return m;
}

/// Point ordered as SchedulingBounds::kinematic_default(): (v_d, omega, theta_e).
inline LpvMatrices kinematic_lpv_matrices(const SchedulingPoint& sv, double omega_d = 0.0) {
  if (sv.size() != 3) throw std::invalid_argument("kinematic_lpv_matrices: expected 3 scheduling values");
  return kinematic_lpv_matrices(sv(0), sv(1), sv(2), omega_d);
}

inline Eigen::MatrixXd dynamic_input_matrix(const LpvConfig& cfg) {
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(6, 2);
  B(3, 0) = cfg.filter_gain;
  B(4, 1) = cfg.filter_gain;
  return B;
}

/// Selects (v, omega) from the 5-state (integral-free) dynamic sub-system.
inline Eigen::MatrixXd dynamic_output_selector() {
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(2, 5);
  C(0, 0) = 1.0;
  C(1, 2) = 1.0;
  return C;
}

/// Augmented model with state (v, alpha, omega, F_xR_f, delta_f, i_p) and
/// filter inputs (F_cmd, delta_cmd).
inline LpvMatrices dynamic_lpv_matrices(double v, double sigma, const VehicleParams& p,
                                        const LpvConfig& cfg) {
  if (!(v > 0.0)) throw std::domain_error("dynamic_lpv_matrices: speed must be positive");
  const double steer =
      cfg.steering_evaluation == SteeringEvaluation::Sigma ? sigma : sigma - cfg.epsilon;
  const double s = std::sin(steer);
  const double c = std::cos(steer);
  const double cx = p.tire_stiffness;
  const double mass = p.mass;
  const double inertia = p.inertia;

  LpvMatrices m;
  Eigen::MatrixXd& A = m.A;
  A = Eigen::MatrixXd::Zero(6, 6);
  A(0, 0) = -resistive_force(v, p) / (mass * v);
  A(0, 1) = cx * s / mass;
  A(0, 2) = cx * p.a * s / (mass * v);
  A(0, 3) = 1.0 / mass;
  A(0, 4) = -cx * s / mass;

  if (cfg.slip_row == SlipRow::Literal) {
    A(1, 1) = (cx * c - cx) / (mass * v);
    A(1, 2) = (cx * p.a * c - cx * p.b) / (mass * v * v) - 1.0;
    A(1, 4) = -cx * c / (mass * v);
  } else {
    A(1, 1) = (-cx * c - cx) / (mass * v);
    A(1, 2) = (-cx * p.a * c + cx * p.b) / (mass * v * v) - 1.0;
    A(1, 4) = cx * c / (mass * v);
  }

  A(2, 1) = (cx * p.b - cx * p.a * c) / inertia;
  A(2, 2) = -(cx * p.b * p.b + cx * p.a * p.a * c) / (inertia * v);
  A(2, 4) = cx * p.a * c / inertia;

  A(3, 3) = -cfg.filter_gain;
  A(4, 4) = -cfg.filter_gain;
  A(5, 2) = -1.0;

  m.B = dynamic_input_matrix(cfg);
  m.C = Eigen::MatrixXd::Zero(2, 6);
  m.C(0, 0) = 1.0;
  m.C(1, 2) = 1.0;
  return m;
}

/// Point ordered as SchedulingBounds::dynamic_default(): (v, sigma).
inline LpvMatrices dynamic_lpv_matrices(const SchedulingPoint& sv, const VehicleParams& p,
                                        const LpvConfig& cfg) {
  if (sv.size() != 2) throw std::invalid_argument("dynamic_lpv_matrices: expected 2 scheduling values");
  return dynamic_lpv_matrices(sv(0), sv(1), p, cfg);
}

/// Corners of the box in binary counting order, last variable fastest;
/// bit value 1 selects the upper bound.
inline std::vector<SchedulingPoint> enumerate_vertices(const SchedulingBounds& bounds) {
  bounds.validate();
  const std::size_t n = bounds.size();
  std::vector<SchedulingPoint> vertices;
  vertices.reserve(bounds.vertex_count());
  for (std::size_t idx = 0; idx < bounds.vertex_count(); ++idx) {
    SchedulingPoint point(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) {
      const bool upper = (idx >> (n - 1 - k)) & 1U;
      const auto& var = bounds.variables[k];
      point(static_cast<Eigen::Index>(k)) = upper ? var.upper : var.lower;
    }
    vertices.push_back(std::move(point));
  }
  return vertices;
}

inline std::vector<Eigen::MatrixXd> dynamic_vertex_matrices(const SchedulingBounds& bounds,
                                                            const VehicleParams& p,
                                                            const LpvConfig& cfg) {
  std::vector<Eigen::MatrixXd> out;
  for (const auto& vertex : enumerate_vertices(bounds)) {
    out.push_back(dynamic_lpv_matrices(vertex, p, cfg).A);
  }
  return out;
}

inline std::vector<Eigen::MatrixXd> kinematic_vertex_matrices(const SchedulingBounds& bounds) {
  std::vector<Eigen::MatrixXd> out;
  for (const auto& vertex : enumerate_vertices(bounds)) {
    out.push_back(kinematic_lpv_matrices(vertex).A);
  }
  return out;
}

}  // namespace lpvguide
