#pragma once

// Two-rate cascade closed loop: kinematic loop at Ts_kin, dynamic loop with
// actuator filters at Ts_dyn, nonlinear plant in between. Telemetry and
// RMSE metrics.

#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "lpv_models.hpp"
#include "planner.hpp"
#include "rk4.hpp"
#include "scheduler.hpp"
#include "vehicle.hpp"

namespace lpvguide {

struct Scenario {
  ReferenceTrajectory trajectory;
  std::optional<Pose> initial_pose;            // default: first reference sample
  std::optional<DynamicState> initial_state;   // default: v = max(v_d(0), 1), alpha = omega = 0
  VehicleParams params;
  ActuatorLimits limits;
  LpvConfig lpv;
  VertexGainSet dynamic_gains;
  VertexGainSet kinematic_gains;
  double ts_kin = 0.1;
  double ts_dyn = 0.01;
  int substeps = 20;                // RK4 steps per dynamic period
  double v_floor = 0.05;
  std::optional<double> horizon;    // default: trajectory duration

  /// Number of kinematic-to-dynamic steps; throws if Ts_kin is not a multiple of Ts_dyn.
  int rate_ratio() const {
    if (!(ts_dyn > 0.0) || !(ts_kin > 0.0)) throw std::invalid_argument("Scenario: sample periods must be positive");
    const double ratio = ts_kin / ts_dyn;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * ratio) {
      throw std::invalid_argument("Scenario: Ts_kin must be an integer multiple of Ts_dyn");
    }
    return static_cast<int>(rounded);
  }

  std::size_t step_count() const {
    const double h = horizon.value_or(trajectory.duration());
    if (!(h > 0.0)) throw std::invalid_argument("Scenario: horizon must be positive");
    if (h > trajectory.duration() + ts_dyn + 1e-9) {
      throw std::invalid_argument("Scenario: horizon " + std::to_string(h) + " s exceeds the trajectory (" +
                                  std::to_string(trajectory.duration()) + " s)");
    }
    return static_cast<std::size_t>(std::round(h / ts_dyn));
  }
};

struct TelemetryRow {
  double t = 0.0;
  double x = 0.0, y = 0.0, theta = 0.0, v = 0.0, alpha = 0.0, omega = 0.0;
  double x_d = 0.0, y_d = 0.0, theta_d = 0.0, v_d = 0.0, omega_d = 0.0;
  double x_e = 0.0, y_e = 0.0, theta_e = 0.0;
  double force = 0.0, steering = 0.0;
  double uc_v = 0.0, uc_w = 0.0;
  double uf_force = 0.0, uf_steering = 0.0;

  static constexpr std::size_t kColumns = 21;

  std::array<double, kColumns> values() const {
    return {t,   x,   y,       theta, v,     alpha,    omega, x_d,  y_d,      theta_d,    v_d,
            omega_d, x_e, y_e, theta_e, force, steering, uc_v,  uc_w, uf_force, uf_steering};
  }

  static TelemetryRow from_values(const std::array<double, kColumns>& c) {
    return {c[0],  c[1],  c[2],  c[3],  c[4],  c[5],  c[6],  c[7],  c[8],  c[9],  c[10],
            c[11], c[12], c[13], c[14], c[15], c[16], c[17], c[18], c[19], c[20]};
  }
};

using Telemetry = std::vector<TelemetryRow>;

inline constexpr const char* kTelemetryHeader =
    "t,x,y,theta,v,alpha,omega,x_d,y_d,theta_d,v_d,omega_d,x_e,y_e,theta_e,F_xR,delta,uC_v,uC_w,uF_F,uF_d";

class SimulationAbort : public std::runtime_error {
 public:
  SimulationAbort(const std::string& what, double t, Telemetry partial)
      : std::runtime_error(what), time_(t), partial_(std::move(partial)) {}
  double time() const { return time_; }
  const Telemetry& partial() const { return partial_; }

 private:
  double time_;
  Telemetry partial_;
};

struct Metrics {
  double rmse_v = 0.0;
  double rmse_w = 0.0;
  double rmse_y = 0.0;
  double max_ev = 0.0;
  double max_ey = 0.0;
};

namespace detail {

// Integrated state: pose (3), dynamic state (3), filters (2), integral.
using SimState = Eigen::Matrix<double, 9, 1>;

}  // namespace detail

/// Deterministic cascade run. Each dynamic period holds u_C, the interpolated
/// K_D and N_ff; the affine law u_f = K_D x_D + N_ff u_C is applied
/// continuously while the plant, the filters and i_p are integrated together.
inline Telemetry run_simulation(const Scenario& sc) {
  const int ratio = sc.rate_ratio();
  const std::size_t steps = sc.step_count();
  if (sc.substeps < 1) throw std::invalid_argument("Scenario: substeps must be >= 1");
  if (!(sc.v_floor > 0.0)) throw std::invalid_argument("Scenario: v_floor must be positive");
  sc.params.validate();
  sc.limits.validate();
  const GainScheduler scheduler(sc.dynamic_gains, sc.kinematic_gains, sc.params, sc.lpv);

  const ReferencePoint first = sc.trajectory.points.front();
  const Pose pose0 = sc.initial_pose.value_or(Pose{first.x_d, first.y_d, first.theta_d});
  const DynamicState dyn0 = sc.initial_state.value_or(DynamicState{std::max(first.v_d, 1.0), 0.0, 0.0});
  detail::SimState z;
  z << pose0.x, pose0.y, pose0.theta, dyn0.v, dyn0.alpha, dyn0.omega, resistive_force(dyn0.v, sc.params), 0.0, 0.0;

  const double gf = sc.lpv.filter_gain;
  const double h = sc.ts_dyn / sc.substeps;
  Eigen::Vector2d u_c = Eigen::Vector2d::Zero();
  KinematicError err;
  Telemetry log;
  log.reserve(steps);

  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * sc.ts_dyn;
    const ReferencePoint ref = sample_reference(sc.trajectory, t);
    const Pose pose{z(0), z(1), z(2)};
    err = pose_error_body(pose, Pose{ref.x_d, ref.y_d, ref.theta_d});
    if (k % static_cast<std::size_t>(ratio) == 0) {
      const Eigen::MatrixXd K_C = scheduler.kinematic_gain(ref.v_d, z(5), err.theta_e);
      u_c = kinematic_control(err, Eigen::Vector2d(ref.v_d * std::cos(err.theta_e), ref.omega_d), K_C);
    }

    const double v_sched = z(3);
    const double sigma = z(7) + sc.lpv.epsilon;
    Eigen::MatrixXd K_D, N_ff;
    try {
      K_D = scheduler.dynamic_gain(v_sched, sigma);
      N_ff = scheduler.feedforward(v_sched, sigma, K_D);
    } catch (const std::domain_error& e) {
      throw SimulationAbort(std::string("feedforward failed: ") + e.what(), t, log);
    }
    const Eigen::Vector2d ff = N_ff * u_c;

    const auto control = [&](const detail::SimState& s) -> Eigen::Vector2d {
      Eigen::Matrix<double, 6, 1> x_d;
      x_d << s(3), s(4), s(5), s(6), s(7), s(8);
      return K_D * x_d + ff;
    };
    const auto field = [&](const detail::SimState& s) -> detail::SimState {
      const ActuatorInput act = saturate_inputs({s(6), s(7)}, sc.limits);
      const Pose p{s(0), s(1), s(2)};
      const DynamicState d{s(3), s(4), s(5)};
      const Eigen::Vector3d kin = kinematic_derivatives(p, d.v, d.omega);
      const Eigen::Vector3d dyn = dynamic_derivatives(d, act, sc.params);
      // The filters are driven by the saturated command, so their states stay
      // inside the actuator range (force-floor aware, no windup).
      const Eigen::Vector2d u = control(s);
      const ActuatorInput cmd = saturate_inputs({u(0), u(1)}, sc.limits);
      detail::SimState ds;
      ds << kin, dyn, gf * (cmd.force - s(6)), gf * (cmd.steering - s(7)), u_c(1) - s(5);
      return ds;
    };

    const Eigen::Vector2d u_f = control(z);
    const ActuatorInput applied = saturate_inputs({z(6), z(7)}, sc.limits);
    TelemetryRow row;
    row.t = t;
    row.x = z(0);
    row.y = z(1);
    row.theta = z(2);
    row.v = z(3);
    row.alpha = z(4);
    row.omega = z(5);
    row.x_d = ref.x_d;
    row.y_d = ref.y_d;
    row.theta_d = ref.theta_d;
    row.v_d = ref.v_d;
    row.omega_d = ref.omega_d;
    row.x_e = err.x_e;
    row.y_e = err.y_e;
    row.theta_e = err.theta_e;
    row.force = applied.force;
    row.steering = applied.steering;
    row.uc_v = u_c(0);
    row.uc_w = u_c(1);
    row.uf_force = u_f(0);
    row.uf_steering = u_f(1);
    log.push_back(row);

    try {
      for (int j = 0; j < sc.substeps; ++j) z = step_rk4(field, z, h);
    } catch (const std::domain_error& e) {
      throw SimulationAbort(std::string("plant left its domain: ") + e.what(), t, log);
    }
    if (!z.allFinite()) throw SimulationAbort("non-finite state", t + sc.ts_dyn, log);
    if (z(3) < sc.v_floor) {
      std::ostringstream msg;
      msg << "speed " << z(3) << " m/s fell below the floor " << sc.v_floor << " m/s";
      throw SimulationAbort(msg.str(), t + sc.ts_dyn, log);
    }
  }
  return log;
}

inline Metrics compute_metrics(const Telemetry& telemetry) {
  if (telemetry.empty()) throw std::invalid_argument("compute_metrics: empty telemetry");
  Metrics m;
  double sv = 0.0, sw = 0.0, sy = 0.0;
  for (const auto& row : telemetry) {
    const double ev = row.v - row.v_d;
    const double ew = row.omega - row.omega_d;
    sv += ev * ev;
    sw += ew * ew;
    sy += row.y_e * row.y_e;
    m.max_ev = std::max(m.max_ev, std::abs(ev));
    m.max_ey = std::max(m.max_ey, std::abs(row.y_e));
  }
  const auto n = static_cast<double>(telemetry.size());
  m.rmse_v = std::sqrt(sv / n);
  m.rmse_w = std::sqrt(sw / n);
  m.rmse_y = std::sqrt(sy / n);
  return m;
}

inline void write_telemetry(const Telemetry& telemetry, std::ostream& out) {
  out << kTelemetryHeader << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& row : telemetry) {
    const auto values = row.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) out << ',';
      out << values[i];
    }
    out << '\n';
  }
}

inline void write_telemetry(const Telemetry& telemetry, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write telemetry to " + path);
  write_telemetry(telemetry, out);
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline Telemetry read_telemetry(std::istream& in, const std::string& source = "telemetry") {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(source + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTelemetryHeader) throw std::runtime_error(source + ": unexpected header");
  Telemetry out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::array<double, TelemetryRow::kColumns> values{};
    std::istringstream fields(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(fields, cell, ',')) {
      if (col >= values.size()) throw std::runtime_error(source + ":" + std::to_string(lineno) + ": too many columns");
      std::size_t used = 0;
      try {
        values[col] = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != cell.size()) {
        throw std::runtime_error(source + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
      ++col;
    }
    if (col != values.size()) throw std::runtime_error(source + ":" + std::to_string(lineno) + ": too few columns");
    out.push_back(TelemetryRow::from_values(values));
  }
  return out;
}

inline Telemetry read_telemetry(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read telemetry " + path);
  return read_telemetry(in, path);
}

inline nlohmann::json to_json(const Metrics& m) {
  return {{"rmse_v", m.rmse_v}, {"rmse_w", m.rmse_w}, {"rmse_y", m.rmse_y}, {"max_ev", m.max_ev},
          {"max_ey", m.max_ey}};
}

inline void write_metrics(const Metrics& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write metrics to " + path);
  out << to_json(m).dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace lpvguide
