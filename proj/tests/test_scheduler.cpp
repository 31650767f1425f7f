#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include <lpvguide/scheduler.hpp>

#include "support.hpp"

using namespace lpvguide;

namespace {

const SynthesisResult& dynamic_design() {
  static const SynthesisResult r =
      synthesize(dynamic_vertex_matrices(SchedulingBounds::dynamic_default(), VehicleParams{}, LpvConfig{}),
                 dynamic_input_matrix(LpvConfig{}), SchedulingBounds::dynamic_default(),
                 SynthesisConfig::dynamic_default());
  return r;
}

const SynthesisResult& kinematic_design() {
  static const SynthesisResult r =
      synthesize(kinematic_vertex_matrices(SchedulingBounds::kinematic_default()), kinematic_input_matrix(),
                 SchedulingBounds::kinematic_default(), SynthesisConfig::kinematic_default());
  return r;
}

Eigen::MatrixXd scaled(std::initializer_list<double> row1, std::initializer_list<double> row2, double factor) {
  Eigen::MatrixXd K(2, static_cast<Eigen::Index>(row1.size()));
  Eigen::Index j = 0;
  for (double v : row1) K(0, j++) = v * factor;
  j = 0;
  for (double v : row2) K(1, j++) = v * factor;
  return K;
}

// Reference dynamic vertex gains, in vertex order.
VertexGainSet reference_dynamic_gains() {
  return {SchedulingBounds::dynamic_default(),
          {scaled({-0.7845, -0.1760, -0.0802, -0.0002, 0.0027, -0.3280},
                  {0.0000, 0.1073, -0.2441, 0.0000, -0.0107, 0.5575}, 1e4),
           scaled({-0.6129, -0.7835, -0.2095, -0.0000, 0.0010, -1.3048},
                  {0.0003, 0.1559, -0.2622, 0.0000, -0.0111, 0.6480}, 1e4),
           scaled({-1.7823, -0.1366, -0.1164, 0.0001, 0.0046, -0.3888},
                  {0.0003, 0.0988, -0.2684, 0.0000, -0.0111, 0.5564}, 1e4),
           scaled({-0.6104, -0.4180, -0.2686, -0.0000, 0.0044, -3.1728},
                  {0.0002, 0.1591, -0.2621, 0.0000, -0.0111, 0.6489}, 1e4)}};
}

Eigen::VectorXd random_point(const SchedulingBounds& b, std::mt19937& rng) {
  Eigen::VectorXd p(static_cast<Eigen::Index>(b.size()));
  for (std::size_t k = 0; k < b.size(); ++k) {
    std::uniform_real_distribution<double> d(b.variables[k].lower, b.variables[k].upper);
    p(static_cast<Eigen::Index>(k)) = d(rng);
  }
  return p;
}

bool truncated_loop_is_hurwitz(const Eigen::VectorXd& p, const Eigen::MatrixXd& K) {
  const LpvMatrices m = dynamic_lpv_matrices(p, VehicleParams{}, LpvConfig{});
  const Eigen::MatrixXd closed = m.A.topLeftCorner(5, 5) + m.B.topRows(5) * K.leftCols(5);
  return Eigen::EigenSolver<Eigen::MatrixXd>(closed, false).eigenvalues().real().maxCoeff() < 0.0;
}

}  // namespace

TEST(SchedulePoint, ClampsIntoBounds) {
  const auto dyn = SchedulingBounds::dynamic_default();
  EXPECT_EQ(schedule_point(Eigen::Vector2d(0.5, 0.3), dyn), Eigen::VectorXd(Eigen::Vector2d(1.0, 0.3)));
  EXPECT_EQ(schedule_point(Eigen::Vector2d(0.0, 0.3), dyn)(0), 1.0);
  const auto kin = SchedulingBounds::kinematic_default();
  EXPECT_EQ(schedule_point(Eigen::Vector3d(5, 0, 0.2), kin)(2), 0.139);
  EXPECT_EQ(schedule_point(Eigen::Vector3d(30, -2, -0.2), kin), Eigen::VectorXd(Eigen::Vector3d(18, -1.417, -0.139)));
  const Eigen::VectorXd inside = Eigen::Vector3d(7.3, 0.2, -0.01);
  EXPECT_EQ(schedule_point(inside, kin), inside);
  EXPECT_THROW(schedule_point(Eigen::Vector2d(1, 1), kin), std::invalid_argument);
}

TEST(NormalizedCoords, Examples) {
  const auto dyn = SchedulingBounds::dynamic_default();
  const auto lo = normalized_coords(Eigen::Vector2d(1.0, 0.0873), dyn);
  EXPECT_EQ(lo[0].lower, 0.0);
  EXPECT_EQ(lo[0].upper, 1.0);
  const auto mid = normalized_coords(Eigen::Vector2d(9.5, 0.5 * (0.0873 + 0.9599)), dyn);
  EXPECT_DOUBLE_EQ(mid[0].lower, 0.5);
  EXPECT_DOUBLE_EQ(mid[0].upper, 0.5);
  EXPECT_NEAR(mid[1].lower, 0.5, 1e-15);
}

TEST(InterpolationWeights, VertexRecovery) {
  for (const auto& bounds : {SchedulingBounds::dynamic_default(), SchedulingBounds::kinematic_default()}) {
    const auto vertices = enumerate_vertices(bounds);
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      const Eigen::VectorXd mu = interpolation_weights(normalized_coords(vertices[i], bounds));
      Eigen::VectorXd e = Eigen::VectorXd::Zero(mu.size());
      e(static_cast<Eigen::Index>(i)) = 1.0;
      EXPECT_EQ(mu, e) << i;
    }
  }
}

TEST(InterpolationWeights, CentersAreUniform) {
  const std::vector<NormalizedCoord> half{{0.5, 0.5}};
  EXPECT_EQ(interpolation_weights({half[0], half[0]}), Eigen::VectorXd::Constant(4, 0.25));
  EXPECT_EQ(interpolation_weights({half[0], half[0], half[0]}), Eigen::VectorXd::Constant(8, 0.125));
  EXPECT_THROW(interpolation_weights({}), std::invalid_argument);
}

TEST(InterpolationWeights, PartitionOfUnity) {
  std::mt19937 rng(17);
  const auto kin = SchedulingBounds::kinematic_default();
  const auto dyn = SchedulingBounds::dynamic_default();
  for (int i = 0; i < 10000; ++i) {
    const auto& b = (i % 2) ? kin : dyn;
    const Eigen::VectorXd mu = interpolation_weights(normalized_coords(random_point(b, rng), b));
    EXPECT_NEAR(mu.sum(), 1.0, 1e-12);
    EXPECT_GE(mu.minCoeff(), 0.0);
  }
}

TEST(InterpolateGain, Examples) {
  const VertexGainSet table = reference_dynamic_gains();
  Eigen::VectorXd e = Eigen::VectorXd::Zero(4);
  e(2) = 1.0;
  EXPECT_EQ(interpolate_gain(table, e), table.gains[2]);
  const Eigen::MatrixXd mean = interpolate_gain(table, Eigen::VectorXd::Constant(4, 0.25));
  EXPECT_NEAR(mean(0, 0), -9475.25, 1e-9);

  VertexGainSet same = table;
  for (auto& K : same.gains) K = table.gains[1];
  std::mt19937 rng(2);
  for (int i = 0; i < 20; ++i) {
    const Eigen::VectorXd mu = interpolation_weights(normalized_coords(random_point(same.bounds, rng), same.bounds));
    EXPECT_LE((interpolate_gain(same, mu) - table.gains[1]).cwiseAbs().maxCoeff(), 1e-9);
  }
  EXPECT_THROW(interpolate_gain(table, Eigen::VectorXd::Ones(3)), std::invalid_argument);
}

TEST(ScheduledGain, LipschitzOnTheBox) {
  const VertexGainSet& gains = kinematic_design().gains;
  double kmax = 0.0;
  for (const auto& K : gains.gains) kmax = std::max(kmax, K.norm());
  std::mt19937 rng(9);
  for (int i = 0; i < 2000; ++i) {
    const Eigen::VectorXd a = random_point(gains.bounds, rng);
    const Eigen::VectorXd b = random_point(gains.bounds, rng);
    double bound = 0.0;
    for (std::size_t k = 0; k < gains.bounds.size(); ++k) {
      const auto& var = gains.bounds.variables[k];
      bound += 2.0 * std::abs(a(static_cast<Eigen::Index>(k)) - b(static_cast<Eigen::Index>(k))) /
               (var.upper - var.lower);
    }
    EXPECT_LE((scheduled_gain(gains, a) - scheduled_gain(gains, b)).norm(), kmax * bound + 1e-12);
  }
}

TEST(FeedforwardMatrix, ScalarAndZeroGain) {
  const Eigen::MatrixXd one = Eigen::MatrixXd::Ones(1, 1);
  const Eigen::MatrixXd N = feedforward_matrix(-one, one, -one, one);
  EXPECT_NEAR(N(0, 0), 2.0, 1e-15);
  // x' = -2x + 2r settles at r.
  EXPECT_NEAR(testsupport::dc_gain(-one, one, -one, one, N)(0, 0), 1.0, 1e-15);

  Eigen::Matrix2d A;
  A << -1, 0.5, 0, -3;
  const Eigen::Matrix2d B = Eigen::Matrix2d::Identity();
  const Eigen::MatrixXd N0 = feedforward_matrix(A, B, Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Identity(2, 2));
  EXPECT_LE((N0 - (-A.inverse() * B).inverse()).norm(), 1e-12);

  EXPECT_THROW(feedforward_matrix(Eigen::MatrixXd::Zero(1, 1), one, Eigen::MatrixXd::Zero(1, 1), one),
               std::domain_error);
  EXPECT_THROW(feedforward_matrix(A, B, one, one), std::invalid_argument);
}

TEST(FeedforwardMatrix, UnitDcGainOfTheSynthesizedDesign) {
  const SynthesisResult& dyn = dynamic_design();
  const SynthesisResult& kin = kinematic_design();
  const GainScheduler sched(dyn.gains, kin.gains, VehicleParams{}, LpvConfig{});
  std::mt19937 rng(23);
  int checked = 0;
  while (checked < 50) {
    const Eigen::VectorXd p = random_point(dyn.gains.bounds, rng);
    const Eigen::MatrixXd K = sched.dynamic_gain(p(0), p(1));
    // Without the integrator the loop loses stability near the top of the
    // speed range; the DC identity is only claimed where it is Hurwitz.
    if (!truncated_loop_is_hurwitz(p, K)) continue;
    ++checked;
    const Eigen::MatrixXd N = sched.feedforward(p(0), p(1), K);
    const LpvMatrices m = dynamic_lpv_matrices(p, VehicleParams{}, LpvConfig{});
    const Eigen::MatrixXd dc = testsupport::dc_gain(m.A.topLeftCorner(5, 5), m.B.topRows(5), K.leftCols(5),
                                                    dynamic_output_selector(), N);
    EXPECT_LE((dc - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-8) << p.transpose();
  }
}

TEST(FeedforwardMatrix, TruncatedLoopIsHurwitzOverThePlannedSpeedRange) {
  const SynthesisResult& dyn = dynamic_design();
  for (double v = 1.0; v <= 12.0; v += 0.5) {
    for (double s = 0.0873; s <= 0.9599; s += 0.05) {
      const Eigen::VectorXd p = Eigen::Vector2d(v, s);
      EXPECT_TRUE(truncated_loop_is_hurwitz(p, scheduled_gain(dyn.gains, p))) << v << ' ' << s;
    }
  }
}

TEST(DynamicControl, Examples) {
  const Eigen::MatrixXd K = Eigen::MatrixXd::Constant(2, 6, 0.5);
  const Eigen::VectorXd r = Eigen::Vector2d(5, 0.1);
  EXPECT_EQ(dynamic_control(Eigen::VectorXd::Zero(6), r, K, Eigen::MatrixXd::Identity(2, 2)), r);
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(6, 1, 6);
  EXPECT_EQ(dynamic_control(x, Eigen::VectorXd::Zero(2), K, Eigen::MatrixXd::Identity(2, 2)), K * x);
  const Eigen::MatrixXd one = Eigen::MatrixXd::Ones(1, 1);
  const Eigen::MatrixXd N = feedforward_matrix(-one, one, -one, one);
  EXPECT_NEAR(dynamic_control(Eigen::VectorXd::Ones(1), Eigen::VectorXd::Constant(1, 3.0),
                              Eigen::MatrixXd::Zero(1, 1), N)(0),
              6.0, 1e-14);
  EXPECT_THROW(dynamic_control(Eigen::VectorXd::Zero(5), r, K, Eigen::MatrixXd::Identity(2, 2)),
               std::invalid_argument);
}

TEST(KinematicControl, Examples) {
  const Eigen::MatrixXd K = Eigen::MatrixXd::Constant(2, 3, -0.3);
  const double vd = 7.0, th = 0.1, wd = 0.2;
  const Eigen::Vector2d rc(vd * std::cos(th), wd);
  EXPECT_EQ(kinematic_control({0, 0, 0}, rc, K), rc);
  EXPECT_EQ(kinematic_control({0, 0, 0}, Eigen::Vector2d(vd, wd), K), Eigen::Vector2d(vd, wd));

  Eigen::MatrixXd K1(2, 3);
  K1 << 0.7099, 0.5078, -0.0238, 0.1899, 0.3083, 1.5405;
  const Eigen::Vector2d u = kinematic_control({1, 0, 0}, Eigen::Vector2d::Zero(), K1);
  EXPECT_DOUBLE_EQ(u(0), 0.7099);
  EXPECT_DOUBLE_EQ(u(1), 0.1899);
  EXPECT_THROW(kinematic_control({0, 0, 0}, rc, Eigen::MatrixXd::Zero(3, 3)), std::invalid_argument);
}

TEST(GainScheduler, RejectsMisshapenSets) {
  const auto& dyn = dynamic_design().gains;
  const auto& kin = kinematic_design().gains;
  EXPECT_NO_THROW(GainScheduler(dyn, kin, VehicleParams{}, LpvConfig{}));
  EXPECT_THROW(GainScheduler(kin, dyn, VehicleParams{}, LpvConfig{}), std::invalid_argument);
  VertexGainSet short_set = dyn;
  short_set.gains.pop_back();
  EXPECT_THROW(GainScheduler(short_set, kin, VehicleParams{}, LpvConfig{}), std::invalid_argument);
}

TEST(GainScheduler, ClampsLowSpeedToTheLowerBound) {
  const GainScheduler sched(dynamic_design().gains, kinematic_design().gains, VehicleParams{}, LpvConfig{});
  EXPECT_EQ(sched.dynamic_gain(0.3, 0.5), sched.dynamic_gain(1.0, 0.5));
  EXPECT_EQ(sched.kinematic_gain(0.0, 0.0, 0.5), sched.kinematic_gain(1.0, 0.0, 0.139));
  EXPECT_EQ(sched.dynamic_gain(1.0, 0.0873), dynamic_design().gains.gains[0]);
}
