#pragma once

// Offline reference generation: C2 piecewise-quintic path through waypoints,
// curvature-aware speed profile under an acceleration bound, and uniform
// time sampling of (x_d, y_d, theta_d, v_d, omega_d).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lpvguide {

struct Waypoint {
  double x = 0.0;
  double y = 0.0;
  std::optional<double> speed = std::nullopt;  // cap from this waypoint until the next one that sets a speed

  bool operator==(const Waypoint&) const = default;
};

struct PlannerConstraints {
  double a_max = 1.0;        // [m/s^2]
  double decel_max = 0.5;    // [m/s^2], the vehicle has no brake: slowing down is coasting
  double v_max = 10.0;       // [m/s]
  double v_min = 1.0;        // [m/s]
  double a_lat_max = 2.0;    // [m/s^2]
  double omega_max = 1.417;  // [rad/s], kinematic scheduling bound
  double sample_period = 0.1;
  double grid_step = 0.05;   // arc-length resolution of the speed profile [m]

  void validate() const {
    if (!(v_min > 0.0) || !(v_min <= v_max) || !(v_max <= 18.0)) {
      throw std::invalid_argument("PlannerConstraints: need 0 < v_min <= v_max <= 18");
    }
    if (!(a_max > 0.0) || !(decel_max > 0.0) || !(a_lat_max > 0.0) || !(omega_max > 0.0) || !(sample_period > 0.0) ||
        !(grid_step > 0.0)) {
      throw std::invalid_argument("PlannerConstraints: limits must be positive");
    }
  }

  bool operator==(const PlannerConstraints&) const = default;
};

struct PathPoint {
  double s = 0.0;
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  // unwrapped
  double kappa = 0.0;
};

/// Piecewise quintic Hermite curve, parameterized per segment by an arc-length
/// estimate u in [0, h_i]. Endpoint first and second derivatives are shared
/// between neighbouring segments, which makes position, tangent and curvature
/// continuous.
class QuinticPath {
 public:
  struct Segment {
    double length = 0.0;                   // parameter length h
    Eigen::Matrix<double, 6, 2> coeffs;    // x(u), y(u) power-basis coefficients
    double s_start = 0.0;                  // arc length at u = 0
  };

  QuinticPath(const std::vector<Waypoint>& waypoints, bool closed) : closed_(closed) {
    std::vector<Eigen::Vector2d> pts;
    for (const auto& wp : waypoints) pts.emplace_back(wp.x, wp.y);
    if (closed && pts.size() >= 2 && (pts.front() - pts.back()).norm() < 1e-9) pts.pop_back();
    if (pts.size() < 2) throw std::invalid_argument("plan_path: at least 2 distinct waypoints are required");
    if (closed && pts.size() < 3) throw std::invalid_argument("plan_path: a closed path needs 3 waypoints");
    const std::size_t n = pts.size();
    const std::size_t segs = closed ? n : n - 1;
    std::vector<double> h(segs);
    for (std::size_t i = 0; i < segs; ++i) {
      h[i] = (pts[(i + 1) % n] - pts[i]).norm();
      if (!(h[i] > 1e-9)) throw std::invalid_argument("plan_path: consecutive waypoints coincide");
    }

    // Node curvature from the circle through the node and its neighbours
    // (exact on arcs); open ends reuse the adjacent triple.
    std::vector<double> kappa(n, 0.0);
    if (n >= 3) {
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = closed ? i : std::clamp<std::size_t>(i, 1, n - 2);
        kappa[i] = menger_curvature(pts[(j + n - 1) % n], pts[j], pts[(j + 1) % n]);
      }
    }
    // Chords stretched to the arc length of a circle with the mean end curvature.
    for (std::size_t i = 0; i < segs; ++i) {
      const double k = 0.5 * std::abs(kappa[i] + kappa[(i + 1) % n]);
      const double half = 0.5 * h[i] * k;
      if (half > 1e-8 && half < 1.0) h[i] = 2.0 * std::asin(half) / k;
    }

    // Unit tangents. With five or more nodes: the polynomial through five
    // neighbours, whose fourth-order accuracy keeps the joined quintics free
    // of per-segment ripple. Short paths use the tangent of the node circle.
    std::vector<Eigen::Vector2d> d1(n), d2(n);
    const std::size_t m = 5;
    const std::size_t half = m / 2;
    for (std::size_t i = 0; i < n; ++i) {
      if (n < m) {
        d1[i] = n == 2 ? Eigen::Vector2d((pts[1] - pts[0]).normalized()) : circle_tangent(pts, i, closed);
        d2[i] = kappa[i] * Eigen::Vector2d(-d1[i].y(), d1[i].x());
        continue;
      }
      std::vector<std::size_t> idx(m);
      std::vector<double> t(m);
      if (closed) {
        for (std::size_t k = 0; k < m; ++k) idx[k] = (i + n + k - half) % n;
        t[half] = 0.0;
        for (std::size_t k = half; k + 1 < m; ++k) t[k + 1] = t[k] + h[idx[k]];
        for (std::size_t k = half; k > 0; --k) t[k - 1] = t[k] - h[idx[k - 1]];
      } else {
        const std::size_t first = std::min(i >= half ? i - half : 0, n - m);
        for (std::size_t k = 0; k < m; ++k) idx[k] = first + k;
        t[0] = 0.0;
        for (std::size_t k = 0; k + 1 < m; ++k) t[k + 1] = t[k] + h[first + k];
        const double origin = t[i - first];
        for (auto& tk : t) tk -= origin;
      }
      Eigen::MatrixXd V(m, m);
      Eigen::MatrixXd P(m, 2);
      for (std::size_t k = 0; k < m; ++k) {
        double pw = 1.0;
        for (std::size_t j = 0; j < m; ++j, pw *= t[k]) V(k, j) = pw;
        P.row(k) = pts[idx[k]].transpose();
      }
      const Eigen::MatrixXd c = V.fullPivLu().solve(P);
      d1[i] = c.row(1).transpose().normalized();
      d2[i] = kappa[i] * Eigen::Vector2d(-d1[i].y(), d1[i].x());
    }

    double s = 0.0;
    for (std::size_t i = 0; i < segs; ++i) {
      const std::size_t j = (i + 1) % n;
      Segment seg;
      seg.length = h[i];
      seg.s_start = s;
      seg.coeffs = hermite(pts[i], d1[i], d2[i], pts[j], d1[j], d2[j], h[i]);
      segments_.push_back(seg);
      s += tabulate(segments_.size() - 1);
    }
    length_ = s;
  }

  double length() const { return length_; }
  bool closed() const { return closed_; }
  const std::vector<Segment>& segments() const { return segments_; }

  /// Point at arc length s (clamped to [0, length]).
  PathPoint at(double s) const {
    s = std::clamp(s, 0.0, length_);
    auto it = std::upper_bound(table_s_.begin(), table_s_.end(), s);
    std::size_t k = static_cast<std::size_t>(std::distance(table_s_.begin(), it));
    k = std::clamp<std::size_t>(k, 1, table_s_.size() - 1);
    const double s0 = table_s_[k - 1], s1 = table_s_[k];
    const double w = s1 > s0 ? (s - s0) / (s1 - s0) : 0.0;
    std::size_t seg = table_seg_[k];
    double u0 = table_u_[k - 1], u1 = table_u_[k];
    if (table_seg_[k - 1] != seg) u0 = 0.0;
    const double u = u0 + w * (u1 - u0);
    PathPoint p = evaluate(seg, u);
    p.s = s;
    p.theta = unwrap_near(p.theta, table_theta_[k - 1]);
    return p;
  }

  /// Samples at (roughly) uniform arc-length spacing, including both ends.
  std::vector<PathPoint> sample(double ds) const {
    const std::size_t count = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(length_ / ds)) + 1);
    std::vector<PathPoint> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      out.push_back(at(length_ * static_cast<double>(i) / static_cast<double>(count - 1)));
    }
    return out;
  }

  PathPoint evaluate(std::size_t seg, double u) const {
    const auto& c = segments_.at(seg).coeffs;
    Eigen::Vector2d p = Eigen::Vector2d::Zero(), d = Eigen::Vector2d::Zero(), dd = Eigen::Vector2d::Zero();
    for (int k = 5; k >= 0; --k) p = p * u + c.row(k).transpose();
    for (int k = 5; k >= 1; --k) d = d * u + k * c.row(k).transpose();
    for (int k = 5; k >= 2; --k) dd = dd * u + k * (k - 1) * c.row(k).transpose();
    const double speed = d.norm();
    PathPoint out;
    out.x = p.x();
    out.y = p.y();
    out.theta = std::atan2(d.y(), d.x());
    out.kappa = (d.x() * dd.y() - d.y() * dd.x()) / (speed * speed * speed);
    return out;
  }

 private:
  static Eigen::Matrix<double, 6, 2> hermite(const Eigen::Vector2d& p0, const Eigen::Vector2d& v0,
                                             const Eigen::Vector2d& a0, const Eigen::Vector2d& p1,
                                             const Eigen::Vector2d& v1, const Eigen::Vector2d& a1, double h) {
    Eigen::Matrix<double, 6, 2> c;
    const double h2 = h * h, h3 = h2 * h, h4 = h3 * h, h5 = h4 * h;
    c.row(0) = p0.transpose();
    c.row(1) = v0.transpose();
    c.row(2) = 0.5 * a0.transpose();
    c.row(3) = ((20.0 * (p1 - p0) - (8.0 * v1 + 12.0 * v0) * h - (3.0 * a0 - a1) * h2) / (2.0 * h3)).transpose();
    c.row(4) = ((30.0 * (p0 - p1) + (14.0 * v1 + 16.0 * v0) * h + (3.0 * a0 - 2.0 * a1) * h2) / (2.0 * h4)).transpose();
    c.row(5) = ((12.0 * (p1 - p0) - (6.0 * v1 + 6.0 * v0) * h - (a0 - a1) * h2) / (2.0 * h5)).transpose();
    return c;
  }

  // Signed curvature of the circle through three points (positive turning left).
  static double menger_curvature(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
    const Eigen::Vector2d ab = b - a, bc = c - b, ac = c - a;
    const double cross = ab.x() * bc.y() - ab.y() * bc.x();
    return 2.0 * cross / (ab.norm() * bc.norm() * ac.norm());
  }

  // Tangent at node i of the circle through the node triple used for its
  // curvature; the chord direction when the triple is collinear.
  static Eigen::Vector2d circle_tangent(const std::vector<Eigen::Vector2d>& pts, std::size_t i, bool closed) {
    const std::size_t n = pts.size();
    const std::size_t j = closed ? i : std::clamp<std::size_t>(i, 1, n - 2);
    const Eigen::Vector2d& a = pts[(j + n - 1) % n];
    const Eigen::Vector2d& b = pts[j];
    const Eigen::Vector2d& c = pts[(j + 1) % n];
    const Eigen::Vector2d ab = b - a, ac = c - a;
    const double det = 2.0 * (ab.x() * ac.y() - ab.y() * ac.x());
    if (std::abs(det) <= 1e-12 * ab.norm() * ac.norm()) {
      return ac.normalized();
    }
    const Eigen::Vector2d center =
        a + Eigen::Vector2d(ac.y() * ab.squaredNorm() - ab.y() * ac.squaredNorm(),
                            ab.x() * ac.squaredNorm() - ac.x() * ab.squaredNorm()) /
                det;
    const Eigen::Vector2d r = pts[i] - center;
    const double turn = det > 0.0 ? 1.0 : -1.0;
    return (turn * Eigen::Vector2d(-r.y(), r.x())).normalized();
  }

  static double unwrap_near(double angle, double reference) {
    return reference + std::remainder(angle - reference, 2.0 * std::numbers::pi);
  }

  // Appends the arc-length table of one segment (Simpson on a fine grid) and
  // returns its length.
  double tabulate(std::size_t seg) {
    const Segment& sg = segments_[seg];
    constexpr int kSteps = 64;
    const double du = sg.length / kSteps;
    const auto speed = [&](double u) {
      const auto& c = sg.coeffs;
      Eigen::Vector2d d = Eigen::Vector2d::Zero();
      for (int k = 5; k >= 1; --k) d = d * u + k * c.row(k).transpose();
      return d.norm();
    };
    if (table_s_.empty()) {
      table_s_.push_back(0.0);
      table_u_.push_back(0.0);
      table_seg_.push_back(seg);
      table_theta_.push_back(evaluate(seg, 0.0).theta);
    }
    double s = table_s_.back();
    const double start = s;
    for (int k = 0; k < kSteps; ++k) {
      const double u0 = k * du;
      s += du / 6.0 * (speed(u0) + 4.0 * speed(u0 + 0.5 * du) + speed(u0 + du));
      table_s_.push_back(s);
      table_u_.push_back(u0 + du);
      table_seg_.push_back(seg);
      table_theta_.push_back(unwrap_near(evaluate(seg, u0 + du).theta, table_theta_.back()));
    }
    return s - start;
  }

  bool closed_ = false;
  std::vector<Segment> segments_;
  double length_ = 0.0;
  std::vector<double> table_s_;
  std::vector<double> table_u_;
  std::vector<std::size_t> table_seg_;
  std::vector<double> table_theta_;
};

inline QuinticPath plan_path(const std::vector<Waypoint>& waypoints, bool closed = false) {
  return QuinticPath(waypoints, closed);
}

struct SpeedProfile {
  std::vector<double> s;
  std::vector<double> v;
  std::vector<double> t;  // time of arrival at each grid node
};

/// Forward/backward acceleration passes over the curvature- and target-limited
/// speed envelope. Starts at `start_speed` (default v_min) and ends at
/// `terminal_speed` when given.
inline SpeedProfile speed_profile(const QuinticPath& path, const PlannerConstraints& cons,
                                  const std::vector<Waypoint>& waypoints = {},
                                  std::optional<double> start_speed = std::nullopt,
                                  std::optional<double> terminal_speed = std::nullopt) {
  cons.validate();
  const auto grid = path.sample(cons.grid_step);
  const std::size_t n = grid.size();

  // Waypoint speed targets, mapped to the arc length of their waypoint.
  std::vector<std::pair<double, double>> targets;
  {
    double s_wp = 0.0;
    const auto& segs = path.segments();
    for (std::size_t i = 0; i < waypoints.size() && i <= segs.size(); ++i) {
      if (i < segs.size()) s_wp = segs[i].s_start;
      else s_wp = path.length();
      if (waypoints[i].speed) targets.emplace_back(s_wp, *waypoints[i].speed);
    }
  }

  SpeedProfile prof;
  prof.s.resize(n);
  prof.v.resize(n);
  std::vector<double> limit(n);
  std::size_t target_idx = 0;
  double target = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    prof.s[i] = grid[i].s;
    while (target_idx < targets.size() && targets[target_idx].first <= grid[i].s + 1e-9) {
      target = targets[target_idx].second;
      ++target_idx;
    }
    const double k = std::abs(grid[i].kappa);
    double lim = std::min(cons.v_max, target);
    if (k > 1e-12) {
      const double curve = std::sqrt(cons.a_lat_max / k);
      if (curve < cons.v_min) {
        throw std::domain_error("speed_profile: curvature at s = " + std::to_string(grid[i].s) +
                                " m forbids the minimum speed");
      }
      lim = std::min({lim, curve, cons.omega_max / k});
    }
    limit[i] = std::max(lim, cons.v_min);
  }

  prof.v[0] = std::clamp(start_speed.value_or(cons.v_min), cons.v_min, limit[0]);
  for (std::size_t i = 1; i < n; ++i) {
    const double ds = prof.s[i] - prof.s[i - 1];
    prof.v[i] = std::min(limit[i], std::sqrt(prof.v[i - 1] * prof.v[i - 1] + 2.0 * cons.a_max * ds));
  }
  if (terminal_speed) prof.v[n - 1] = std::min(prof.v[n - 1], std::max(*terminal_speed, cons.v_min));
  const double decel = std::min(cons.a_max, cons.decel_max);
  for (std::size_t i = n - 1; i-- > 0;) {
    const double ds = prof.s[i + 1] - prof.s[i];
    prof.v[i] = std::min(prof.v[i], std::sqrt(prof.v[i + 1] * prof.v[i + 1] + 2.0 * decel * ds));
  }

  prof.t.resize(n);
  prof.t[0] = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    prof.t[i] = prof.t[i - 1] + 2.0 * (prof.s[i] - prof.s[i - 1]) / (prof.v[i] + prof.v[i - 1]);
  }
  return prof;
}

struct ReferencePoint {
  double t = 0.0;
  double x_d = 0.0;
  double y_d = 0.0;
  double theta_d = 0.0;
  double v_d = 0.0;
  double omega_d = 0.0;
};

struct ReferenceTrajectory {
  double period = 0.1;
  std::vector<ReferencePoint> points;

  double duration() const { return points.empty() ? 0.0 : points.back().t; }
};

/// Resamples the profile at the constraint sample period; constant
/// acceleration between profile nodes.
inline ReferenceTrajectory build_reference(const QuinticPath& path, const SpeedProfile& prof,
                                           const PlannerConstraints& cons) {
  ReferenceTrajectory traj;
  traj.period = cons.sample_period;
  const double total = prof.t.back();
  const auto count = static_cast<std::size_t>(std::floor(total / cons.sample_period + 1e-9)) + 1;
  std::size_t j = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const double t = static_cast<double>(k) * cons.sample_period;
    while (j + 2 < prof.t.size() && prof.t[j + 1] <= t) ++j;
    const double ds = prof.s[j + 1] - prof.s[j];
    const double v0 = prof.v[j], v1 = prof.v[j + 1];
    const double a = (v1 * v1 - v0 * v0) / (2.0 * ds);
    const double tau = std::clamp(t - prof.t[j], 0.0, prof.t[j + 1] - prof.t[j]);
    const double v = std::max(v0 + a * tau, 0.0);
    const double s = prof.s[j] + v0 * tau + 0.5 * a * tau * tau;
    const PathPoint p = path.at(s);
    traj.points.push_back({t, p.x, p.y, p.theta, v, v * p.kappa});
  }
  return traj;
}

inline ReferenceTrajectory plan_trajectory(const std::vector<Waypoint>& waypoints, const PlannerConstraints& cons,
                                           bool closed, bool stop_at_end = true) {
  const QuinticPath path = plan_path(waypoints, closed);
  std::vector<Waypoint> targets = waypoints;
  if (closed && targets.size() >= 2) {
    const Waypoint& a = targets.front();
    const Waypoint& b = targets.back();
    if (std::hypot(a.x - b.x, a.y - b.y) < 1e-9) targets.pop_back();
  }
  const SpeedProfile prof = speed_profile(path, cons, targets, std::nullopt,
                                          stop_at_end ? std::optional<double>(cons.v_min) : std::nullopt);
  return build_reference(path, prof, cons);
}

/// Reference at time t; exact at stored samples, linear in between.
inline ReferencePoint sample_reference(const ReferenceTrajectory& traj, double t) {
  if (traj.points.empty()) throw std::out_of_range("sample_reference: empty trajectory");
  const double eps = 1e-9 * traj.period;
  if (t < -eps || t > traj.duration() + eps) {
    throw std::out_of_range("sample_reference: t = " + std::to_string(t) + " s is outside the horizon");
  }
  const double pos = std::max(t, 0.0) / traj.period;
  auto k = static_cast<std::size_t>(std::floor(pos + 1e-9));
  if (k >= traj.points.size() - 1 || std::abs(pos - static_cast<double>(k)) < 1e-9) {
    return traj.points[std::min(k, traj.points.size() - 1)];
  }
  const ReferencePoint& a = traj.points[k];
  const ReferencePoint& b = traj.points[k + 1];
  const double w = (t - a.t) / (b.t - a.t);
  const auto lerp = [w](double p, double q) { return p + w * (q - p); };
  return {t, lerp(a.x_d, b.x_d), lerp(a.y_d, b.y_d), lerp(a.theta_d, b.theta_d), lerp(a.v_d, b.v_d),
          lerp(a.omega_d, b.omega_d)};
}

namespace detail {

struct CurvatureRun {
  double length;
  double kappa_start;
  double kappa_end;
};

// Integrates a piecewise-linear curvature profile from the origin heading east.
inline std::vector<Eigen::Vector3d> integrate_runs(const std::vector<CurvatureRun>& runs, double ds) {
  std::vector<Eigen::Vector3d> out{{0.0, 0.0, 0.0}};  // (x, y, s)
  double x = 0.0, y = 0.0, heading = 0.0, s = 0.0;
  for (const auto& run : runs) {
    const int n = std::max(1, static_cast<int>(std::ceil(run.length / ds)));
    const double h = run.length / n;
    const double slope = (run.kappa_end - run.kappa_start) / run.length;
    for (int i = 0; i < n; ++i) {
      const double u = i * h;
      const auto theta = [&](double w) {
        return heading + run.kappa_start * (u + w) + 0.5 * slope * (u + w) * (u + w);
      };
      const double t0 = theta(0.0), tm = theta(0.5 * h), t1 = theta(h);
      x += h / 6.0 * (std::cos(t0) + 4.0 * std::cos(tm) + std::cos(t1));
      y += h / 6.0 * (std::sin(t0) + 4.0 * std::sin(tm) + std::sin(t1));
      s += h;
      out.emplace_back(x, y, s);
    }
    heading += 0.5 * (run.kappa_start + run.kappa_end) * run.length;
  }
  return out;
}

inline std::vector<CurvatureRun> circuit_runs(double first_straight, double hairpin_radius) {
  constexpr double pi = std::numbers::pi;
  const double k1 = 1.0 / 35.0, k2 = 1.0 / 20.0, k3 = -1.0 / 12.0, k4 = 1.0 / hairpin_radius;
  const double ramp = 15.0, reversal = 17.0;
  // Heading gained in the part of the reversal ramp before curvature crosses zero.
  const double cross = reversal * k2 / (k2 - k3);
  const double before = 0.5 * k2 * cross;
  const double after = 0.5 * k3 * (reversal - cross);
  return {
      {first_straight, 0.0, 0.0},
      {ramp, 0.0, k1},
      {(pi - k1 * ramp) / k1, k1, k1},
      {ramp, k1, 0.0},
      {80.0, 0.0, 0.0},
      {ramp, 0.0, k2},
      {(pi / 2.0 - 0.5 * k2 * ramp - before) / k2, k2, k2},
      {reversal, k2, k3},
      {(-pi / 2.0 - after - 0.5 * k3 * ramp) / k3, k3, k3},
      {ramp, k3, 0.0},
      {38.0, 0.0, 0.0},
      {ramp, 0.0, k4},
      {(pi - k4 * ramp) / k4, k4, k4},
      {ramp, k4, 0.0},
  };
}

}  // namespace detail

/// Closed stand-in circuit starting at the origin heading east: 150 m
/// straight, 180 deg left turn R = 35, 80 m straight, 90 deg left turn R = 20
/// into a 90 deg right turn R = 12, 38 m straight, 180 deg left hairpin R ~ 19.
/// Curvature changes linearly over short transitions (clothoids) so the
/// interpolated path has no curvature ringing. The hairpin radius and first
/// straight are trimmed so the course closes exactly.
inline std::vector<Waypoint> default_circuit(double spacing = 5.0) {
  constexpr double ds = 0.01;
  const auto end_of = [&](double straight, double radius) {
    const auto pts = detail::integrate_runs(detail::circuit_runs(straight, radius), ds);
    return pts.back();
  };
  // y closure depends only on the turns; secant on the hairpin radius.
  double r0 = 19.0, r1 = 19.5;
  double f0 = end_of(150.0, r0).y(), f1 = end_of(150.0, r1).y();
  for (int it = 0; it < 30 && std::abs(f1) > 1e-10; ++it) {
    const double r2 = r1 - f1 * (r1 - r0) / (f1 - f0);
    r0 = r1;
    f0 = f1;
    r1 = r2;
    f1 = end_of(150.0, r1).y();
  }
  const double straight = 150.0 - end_of(150.0, r1).x();
  const auto dense = detail::integrate_runs(detail::circuit_runs(straight, r1), ds);

  const double total = dense.back().z();
  const int count = std::max(3, static_cast<int>(std::round(total / spacing)));
  std::vector<Waypoint> pts;
  std::size_t j = 0;
  for (int i = 0; i < count; ++i) {
    const double target = total * i / count;
    while (j + 1 < dense.size() && dense[j + 1].z() <= target) ++j;
    const auto& a = dense[j];
    const auto& b = dense[std::min(j + 1, dense.size() - 1)];
    const double w = b.z() > a.z() ? (target - a.z()) / (b.z() - a.z()) : 0.0;
    pts.push_back({a.x() + w * (b.x() - a.x()), a.y() + w * (b.y() - a.y()), std::nullopt});
  }
  pts.push_back({0.0, 0.0, std::nullopt});
  return pts;
}

/// Plain-text waypoints: one `x y [speed]` per line; '#' starts a comment.
inline std::vector<Waypoint> read_waypoints(std::istream& in) {
  std::vector<Waypoint> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<double> vals;
    std::string tok;
    while (ls >> tok) {
      try {
        std::size_t used = 0;
        vals.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw std::runtime_error("waypoints: line " + std::to_string(lineno) + ": bad number '" + tok + "'");
      }
    }
    if (vals.empty()) continue;
    if (vals.size() != 2 && vals.size() != 3) {
      throw std::runtime_error("waypoints: line " + std::to_string(lineno) + ": expected `x y [speed]`");
    }
    Waypoint wp{vals[0], vals[1], std::nullopt};
    if (vals.size() == 3) wp.speed = vals[2];
    out.push_back(wp);
  }
  return out;
}

inline std::vector<Waypoint> read_waypoints_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("waypoints: cannot open " + path);
  return read_waypoints(in);
}

inline void write_trajectory_csv(const ReferenceTrajectory& traj, std::ostream& out) {
  out << "t,x_d,y_d,theta_d,v_d,omega_d\n";
  out << std::setprecision(12);
  for (const auto& p : traj.points) {
    out << p.t << ',' << p.x_d << ',' << p.y_d << ',' << p.theta_d << ',' << p.v_d << ',' << p.omega_d << '\n';
  }
}

}  // namespace lpvguide
