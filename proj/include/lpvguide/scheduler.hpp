#pragma once

// Runtime side of the polytopic controllers: scheduling-point clamping,
// multilinear interpolation weights, gain blending, feedforward and the two
// control laws of the cascade.

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lpv_models.hpp"
#include "synthesis.hpp"

namespace lpvguide {

/// Per-variable interpolation factors. `lower` is M_lower =
/// (p - p_lo) / (p_hi - p_lo), which is 1 at the upper bound; `upper` = 1 - lower.
struct NormalizedCoord {
  double lower = 0.0;
  double upper = 1.0;
};

struct ControllerState {
  double i_p = 0.0;           // integral of (omega_ref - omega)
  double force_filter = 0.0;  // F_xR_f [N]
  double sigma_filter = 0.0;  // sigma_f = delta_f + epsilon [rad]
};

/// Clamps each component into its interval. With a lower speed bound of
/// 1 m/s this is also the low-speed translation: slower points use the 1 m/s
/// controller.
inline SchedulingPoint schedule_point(const SchedulingPoint& raw, const SchedulingBounds& bounds) {
  if (static_cast<std::size_t>(raw.size()) != bounds.size()) {
    throw std::invalid_argument("schedule_point: dimension does not match the bounds");
  }
  SchedulingPoint out(raw.size());
  for (Eigen::Index k = 0; k < raw.size(); ++k) {
    const auto& var = bounds.variables[static_cast<std::size_t>(k)];
    out(k) = std::clamp(raw(k), var.lower, var.upper);
  }
  return out;
}

inline std::vector<NormalizedCoord> normalized_coords(const SchedulingPoint& sv,
                                                      const SchedulingBounds& bounds) {
  if (static_cast<std::size_t>(sv.size()) != bounds.size()) {
    throw std::invalid_argument("normalized_coords: dimension does not match the bounds");
  }
  std::vector<NormalizedCoord> coords;
  coords.reserve(bounds.size());
  for (std::size_t k = 0; k < bounds.size(); ++k) {
    const auto& var = bounds.variables[k];
    const double m = (sv(static_cast<Eigen::Index>(k)) - var.lower) / (var.upper - var.lower);
    coords.push_back({m, 1.0 - m});
  }
  return coords;
}

/// Multilinear weights in canonical vertex order: weight j equals 1 exactly
/// when the point sits on vertex j.
inline Eigen::VectorXd interpolation_weights(const std::vector<NormalizedCoord>& coords) {
  const std::size_t n = coords.size();
  if (n == 0) throw std::invalid_argument("interpolation_weights: no coordinates");
  const std::size_t count = std::size_t{1} << n;
  Eigen::VectorXd mu(static_cast<Eigen::Index>(count));
  for (std::size_t idx = 0; idx < count; ++idx) {
    double w = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
      const bool upper = (idx >> (n - 1 - k)) & 1U;
      w *= upper ? coords[k].lower : coords[k].upper;
    }
    mu(static_cast<Eigen::Index>(idx)) = w;
  }
  return mu;
}

inline Eigen::MatrixXd interpolate_gain(const VertexGainSet& gains, const Eigen::VectorXd& mu) {
  if (gains.gains.empty() || static_cast<std::size_t>(mu.size()) != gains.gains.size()) {
    throw std::invalid_argument("interpolate_gain: weight count does not match the gain count");
  }
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(gains.gains.front().rows(), gains.gains.front().cols());
  for (std::size_t i = 0; i < gains.gains.size(); ++i) K += mu(static_cast<Eigen::Index>(i)) * gains.gains[i];
  return K;
}

/// Convenience: clamp, weight and blend in one call.
inline Eigen::MatrixXd scheduled_gain(const VertexGainSet& gains, const SchedulingPoint& raw) {
  const SchedulingPoint sv = schedule_point(raw, gains.bounds);
  return interpolate_gain(gains, interpolation_weights(normalized_coords(sv, gains.bounds)));
}

/// N_ff = [C (-B K - A)^-1 B]^-1, unit DC gain from references to C x.
inline Eigen::MatrixXd feedforward_matrix(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                          const Eigen::MatrixXd& K, const Eigen::MatrixXd& C) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || B.rows() != n || K.rows() != B.cols() || K.cols() != n || C.cols() != n ||
      C.rows() != B.cols()) {
    throw std::invalid_argument("feedforward_matrix: dimension mismatch");
  }
  const Eigen::MatrixXd M = -B * K - A;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  if (!lu.isInvertible()) throw std::domain_error("feedforward_matrix: -B K - A is singular");
  const Eigen::MatrixXd dc = C * lu.solve(B);
  Eigen::FullPivLU<Eigen::MatrixXd> lu_dc(dc);
  if (!lu_dc.isInvertible()) throw std::domain_error("feedforward_matrix: DC gain is singular");
  return lu_dc.inverse();
}

/// u_f = K_D x_D + N_ff r_D
inline Eigen::VectorXd dynamic_control(const Eigen::VectorXd& x_D, const Eigen::VectorXd& r_D,
                                       const Eigen::MatrixXd& K_D, const Eigen::MatrixXd& N_ff) {
  if (K_D.cols() != x_D.size() || N_ff.cols() != r_D.size() || K_D.rows() != N_ff.rows()) {
    throw std::invalid_argument("dynamic_control: dimension mismatch");
  }
  return K_D * x_D + N_ff * r_D;
}

/// u_C = K_C x_C + r_C, with r_C = (v_d cos(theta_e), omega_d).
inline Eigen::Vector2d kinematic_control(const KinematicError& x_C, const Eigen::Vector2d& r_C,
                                         const Eigen::MatrixXd& K_C) {
  if (K_C.rows() != 2 || K_C.cols() != 3) throw std::invalid_argument("kinematic_control: K_C must be 2x3");
  return K_C * x_C.vector() + r_C;
}

/// Binds the two gain sets to the vehicle model they were designed for.
class GainScheduler {
 public:
  GainScheduler(VertexGainSet dynamic, VertexGainSet kinematic, VehicleParams params, LpvConfig lpv)
      : dynamic_(std::move(dynamic)), kinematic_(std::move(kinematic)), params_(params), lpv_(lpv) {
    dynamic_.validate();
    kinematic_.validate();
    lpv_.validate();
    if (dynamic_.bounds.size() != 2 || dynamic_.gains.front().rows() != 2 || dynamic_.gains.front().cols() != 6) {
      throw std::invalid_argument("GainScheduler: dynamic gains must be 2x6 over (v, sigma)");
    }
    if (kinematic_.bounds.size() != 3 || kinematic_.gains.front().rows() != 2 ||
        kinematic_.gains.front().cols() != 3) {
      throw std::invalid_argument("GainScheduler: kinematic gains must be 2x3 over (v_d, omega, theta_e)");
    }
  }

  const VertexGainSet& dynamic_gains() const { return dynamic_; }
  const VertexGainSet& kinematic_gains() const { return kinematic_; }
  const LpvConfig& lpv() const { return lpv_; }

  SchedulingPoint dynamic_point(double v, double sigma) const {
    return schedule_point(Eigen::Vector2d(v, sigma), dynamic_.bounds);
  }

  Eigen::MatrixXd dynamic_gain(double v, double sigma) const {
    return scheduled_gain(dynamic_, Eigen::Vector2d(v, sigma));
  }

  Eigen::MatrixXd kinematic_gain(double v_d, double omega, double theta_e) const {
    return scheduled_gain(kinematic_, Eigen::Vector3d(v_d, omega, theta_e));
  }

  /// Feedforward of the 5-state sub-system (integral state dropped) at the
  /// clamped operating point, for the given interpolated 2x6 gain.
  Eigen::MatrixXd feedforward(double v, double sigma, const Eigen::MatrixXd& K_D) const {
    const SchedulingPoint sv = dynamic_point(v, sigma);
    const LpvMatrices model = dynamic_lpv_matrices(sv, params_, lpv_);
    return feedforward_matrix(model.A.topLeftCorner(5, 5), model.B.topRows(5), K_D.leftCols(5),
                              dynamic_output_selector());
  }

 private:
  VertexGainSet dynamic_;
  VertexGainSet kinematic_;
  VehicleParams params_;
  LpvConfig lpv_;
};

}  // namespace lpvguide
