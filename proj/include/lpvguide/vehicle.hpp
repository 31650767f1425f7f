#pragma once

// Nonlinear bicycle-model plant: kinematic pose propagation, the dynamic
// (v, alpha, omega) model with linear tires, drag and rolling friction.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

namespace lpvguide {

/// Physical constants of the test vehicle. Defaults are the values used
/// throughout the project (683 kg urban car).
struct VehicleParams {
  double a = 0.758;                 // CoG to front axle [m]
  double b = 1.036;                 // CoG to rear axle [m]
  double mass = 683.0;              // [kg]
  double inertia = 560.94;          // yaw inertia [kg m^2]
  double drag_coefficient = 0.36;   // [-]
  double frontal_area = 1.91;       // [m^2]
  double air_density = 1.184;       // [kg/m^3]
  double friction = 0.09;           // rolling friction coefficient [-]
  double tire_stiffness = 25000.0;  // [N/rad]
  double gravity = 9.81;            // [m/s^2]

  void validate() const {
    const double values[] = {a,           b,          mass,           inertia,
                             drag_coefficient, frontal_area, air_density,
                             friction,    tire_stiffness, gravity};
    for (double value : values) {
      if (!(value > 0.0) || !std::isfinite(value)) {
        throw std::invalid_argument("VehicleParams: all parameters must be strictly positive");
      }
    }
  }

  bool operator==(const VehicleParams&) const = default;
};

/// World-frame pose. theta is kept unwrapped; use normalize_angle to wrap.
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

/// Body-frame dynamic state.
struct DynamicState {
  double v = 0.0;      // linear speed [m/s]
  double alpha = 0.0;  // slip angle [rad]
  double omega = 0.0;  // yaw rate [rad/s]
};

struct ActuatorInput {
  double force = 0.0;     // rear longitudinal force F_xR [N]
  double steering = 0.0;  // front steering angle delta [rad]
};

struct ActuatorLimits {
  double force_max = 6000.0;    // [N]
  double steering_max = 0.4363; // [rad], 25 deg

  void validate() const {
    if (!(force_max > 0.0) || !(steering_max > 0.0)) {
      throw std::invalid_argument("ActuatorLimits: limits must be positive");
    }
  }

  bool operator==(const ActuatorLimits&) const = default;
};

struct LateralForces {
  double front = 0.0;  // F_yF [N]
  double rear = 0.0;   // F_yR [N]
};

/// Wraps an angle into (-pi, pi].
inline double normalize_angle(double angle) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double wrapped = std::fmod(angle + std::numbers::pi, two_pi);
  if (wrapped <= 0.0) wrapped += two_pi;
  return wrapped - std::numbers::pi;
}

/// (x_dot, y_dot, theta_dot) of the unicycle kinematics.
inline Eigen::Vector3d kinematic_derivatives(const Pose& pose, double v, double omega) {
  return {v * std::cos(pose.theta), v * std::sin(pose.theta), omega};
}

inline LateralForces tire_forces(const DynamicState& state, double steering,
                                 const VehicleParams& params) {
  if (!(state.v > 0.0)) {
    throw std::domain_error("tire_forces: speed must be positive");
  }
  const double c = params.tire_stiffness;
  return {c * (steering - state.alpha - params.a * state.omega / state.v),
          c * (-state.alpha + params.b * state.omega / state.v)};
}

/// Aerodynamic drag plus rolling friction, F_df.
inline double resistive_force(double v, const VehicleParams& params) {
  return 0.5 * params.drag_coefficient * params.air_density * params.frontal_area * v * v +
         params.friction * params.mass * params.gravity;
}

/// (v_dot, alpha_dot, omega_dot) of the dynamic bicycle model.
inline Eigen::Vector3d dynamic_derivatives(const DynamicState& state, const ActuatorInput& input,
                                           const VehicleParams& params) {
  if (!(state.v > 0.0)) {
    throw std::domain_error("dynamic_derivatives: speed must be positive");
  }
  const auto [f_yf, f_yr] = tire_forces(state, input.steering, params);
  const double f_df = resistive_force(state.v, params);
  const double alpha = state.alpha;
  const double delta = input.steering;
  const double f_xr = input.force;

  const double v_dot = (f_xr * std::cos(alpha) + f_yf * std::sin(alpha - delta) +
                        f_yr * std::sin(alpha) - f_df) /
                       params.mass;
  const double alpha_dot = (-f_xr * std::sin(alpha) + f_yf * std::cos(alpha - delta) +
                            f_yr * std::cos(alpha)) /
                               (params.mass * state.v) -
                           state.omega;
  const double omega_dot = (f_yf * params.a * std::cos(delta) - f_yr * params.b) / params.inertia;
  return {v_dot, alpha_dot, omega_dot};
}

/// Componentwise clamp. The force floor is zero: the vehicle has no brake
/// actuator and decelerates by applying null force.
inline ActuatorInput saturate_inputs(const ActuatorInput& input, const ActuatorLimits& limits) {
  return {std::clamp(input.force, 0.0, limits.force_max),
          std::clamp(input.steering, -limits.steering_max, limits.steering_max)};
}

}  // namespace lpvguide
