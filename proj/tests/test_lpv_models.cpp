#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include <lpvguide/lpv_models.hpp>

using namespace lpvguide;

TEST(PoseErrorBody, Examples) {
  const auto a = pose_error_body({0, 0, 0}, {1, 2, 0});
  EXPECT_EQ(a.x_e, 1.0);
  EXPECT_EQ(a.y_e, 2.0);
  const auto b = pose_error_body({0, 0, std::numbers::pi / 2}, {1, 0, std::numbers::pi / 2});
  EXPECT_NEAR(b.x_e, 0.0, 1e-15);
  EXPECT_NEAR(b.y_e, -1.0, 1e-15);
  EXPECT_EQ(b.theta_e, 0.0);
  const auto c = pose_error_body({3, -4, 1.2}, {3, -4, 1.2});
  EXPECT_EQ(c.vector(), Eigen::Vector3d::Zero());
}

TEST(PoseErrorBody, HeadingErrorIsWrapped) {
  const auto e = pose_error_body({0, 0, 3.0}, {0, 0, -3.0});
  EXPECT_NEAR(e.theta_e, 2.0 * std::numbers::pi - 6.0, 1e-12);
}

TEST(KinematicErrorDerivatives, Examples) {
  const Eigen::Vector3d z = kinematic_error_derivatives({0, 0, 0}, {4, 0.2}, {4, 0.2});
  EXPECT_EQ(z, Eigen::Vector3d::Zero());
  const Eigen::Vector3d s = kinematic_error_derivatives({0.4, -0.3, 0.0}, {5, 0.0}, {7, 0.1});
  EXPECT_EQ(s, Eigen::Vector3d(2.0, 0.0, 0.1));
  const Eigen::Vector3d d = kinematic_error_derivatives({1, 2, 0.1}, {5, 0.3}, {6, 0.2});
  EXPECT_NEAR(d(0), 0.6 + 6 * std::cos(0.1) - 5, 1e-14);
  EXPECT_NEAR(d(1), -0.3 + 6 * std::sin(0.1), 1e-14);
  EXPECT_NEAR(d(2), -0.1, 1e-14);
}

TEST(KinematicLpv, MatricesAtSmallHeadingError) {
  const LpvMatrices m = kinematic_lpv_matrices(10.0, 0.5, 0.0);
  Eigen::Matrix3d A;
  A << 0, 0.5, 0, -0.5, 0, 10, 0, 0, 0;
  EXPECT_EQ(m.A, Eigen::MatrixXd(A));
  Eigen::MatrixXd B(3, 2);
  B << -1, 0, 0, 0, 0, -1;
  for (double th : {-0.139, 0.0, 0.07}) EXPECT_EQ(kinematic_lpv_matrices(3.0, -1.0, th).B, B);
  EXPECT_EQ(m.C, Eigen::MatrixXd::Identity(3, 3));
  EXPECT_EQ(kinematic_lpv_matrices(6.0, 0.0, 0.0, 0.25).r, Eigen::Vector2d(6.0, 0.25));
}

TEST(KinematicLpv, AgreesWithNonlinearModelNearZeroHeading) {
  const KinematicError e{0.3, -0.2, 0.05};
  const Eigen::Vector2d u(9.5, 0.4), ref(10.0, 0.35);
  const LpvMatrices m = kinematic_lpv_matrices(ref(0), u(1), e.theta_e, ref(1));
  const Eigen::Vector3d lpv = m.A * e.vector() + m.B * u - m.B * m.r;
  const Eigen::Vector3d oracle = kinematic_error_derivatives(e, u, ref);
  EXPECT_LE((lpv - oracle).norm(), 1e-3 * oracle.norm());
}

TEST(KinematicLpv, ExactEmbeddingOnRandomSamples) {
  std::mt19937 rng(11);
  const auto bounds = SchedulingBounds::kinematic_default();
  std::uniform_real_distribution<double> vd(1, 18), w(-1.417, 1.417), th(-0.139, 0.139), xe(-2, 2), v(0, 18),
      wd(-1.4, 1.4);
  for (int i = 0; i < 1000; ++i) {
    const KinematicError e{xe(rng), xe(rng), th(rng)};
    const Eigen::Vector2d u(v(rng), w(rng)), ref(vd(rng), wd(rng));
    const LpvMatrices m = kinematic_lpv_matrices(ref(0), u(1), e.theta_e, ref(1));
    const Eigen::Vector3d lpv = m.A * e.vector() + m.B * u - m.B * m.r;
    const Eigen::Vector3d oracle = kinematic_error_derivatives(e, u, ref);
    EXPECT_LE((lpv - oracle).cwiseAbs().maxCoeff(), 1e-12) << i;
  }
}

TEST(KinematicLpv, SincIsContinuousAtZero) {
  const double at0 = kinematic_lpv_matrices(10.0, 0.0, 0.0).A(1, 2);
  EXPECT_LT(std::abs(kinematic_lpv_matrices(10.0, 0.0, 1e-9).A(1, 2) - at0), 1e-15);
  EXPECT_LT(std::abs(kinematic_lpv_matrices(10.0, 0.0, -1e-9).A(1, 2) - at0), 1e-15);
  EXPECT_NEAR(sinc(1e-4 * 0.999), std::sin(1e-4 * 0.999) / (1e-4 * 0.999), 1e-16);
}

TEST(DynamicLpv, InputMatrixOnlyInFilterRows) {
  const LpvConfig cfg;
  const LpvMatrices m = dynamic_lpv_matrices(7.0, 0.5, VehicleParams{}, cfg);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(6, 2);
  B(3, 0) = cfg.filter_gain;
  B(4, 1) = cfg.filter_gain;
  EXPECT_EQ(m.B, B);
  EXPECT_EQ(m.A.rows(), 6);
  EXPECT_EQ(m.A.cols(), 6);
}

TEST(DynamicLpv, DragEntryAtMidInterval) {
  const VehicleParams p;
  const auto bounds = SchedulingBounds::dynamic_default();
  const double mid = 0.5 * (bounds.variables[1].lower + bounds.variables[1].upper);
  const LpvMatrices m = dynamic_lpv_matrices(10.0, mid, p, LpvConfig{});
  EXPECT_NEAR(m.A(0, 0), -resistive_force(10.0, p) / (683.0 * 10.0), 1e-15);
  EXPECT_NEAR(m.A(0, 0), -643.73 / 6830.0, 1e-6);
}

TEST(DynamicLpv, IntegralAndFilterRowsAreConstant) {
  const VehicleParams p;
  const LpvConfig cfg;
  const LpvMatrices ref = dynamic_lpv_matrices(1.0, 0.0873, p, cfg);
  Eigen::RowVectorXd integral = Eigen::RowVectorXd::Zero(6);
  integral(2) = -1.0;
  EXPECT_EQ(ref.A.row(5), integral);
  EXPECT_EQ(ref.A(3, 3), -cfg.filter_gain);
  EXPECT_EQ(ref.A(4, 4), -cfg.filter_gain);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> v(1, 18), s(0.0873, 0.9599);
  for (int i = 0; i < 100; ++i) {
    const LpvMatrices m = dynamic_lpv_matrices(v(rng), s(rng), p, cfg);
    EXPECT_EQ(m.A.bottomRows(3), ref.A.bottomRows(3));
    EXPECT_EQ(m.B, ref.B);
  }
}

TEST(DynamicLpv, SteeringEvaluationSwitch) {
  const VehicleParams p;
  LpvConfig sigma_cfg, delta_cfg;
  delta_cfg.steering_evaluation = SteeringEvaluation::Delta;
  const double sigma = 0.6;
  const LpvMatrices a = dynamic_lpv_matrices(8.0, sigma, p, sigma_cfg);
  const LpvMatrices b = dynamic_lpv_matrices(8.0, sigma, p, delta_cfg);
  EXPECT_NEAR(a.A(0, 1), p.tire_stiffness * std::sin(sigma) / p.mass, 1e-12);
  EXPECT_NEAR(b.A(0, 1), p.tire_stiffness * std::sin(sigma - delta_cfg.epsilon) / p.mass, 1e-12);
}

TEST(DynamicLpv, RejectsNonPositiveSpeed) {
  EXPECT_THROW(dynamic_lpv_matrices(0.0, 0.5, VehicleParams{}, LpvConfig{}), std::domain_error);
}

TEST(DynamicLpv, LinearizationMatchesPlantAtStraightEquilibrium) {
  // With the delta evaluation, sigma = epsilon is straight driving; the speed
  // row and the lateral rows must match finite differences of the plant.
  const VehicleParams p;
  LpvConfig cfg;
  cfg.steering_evaluation = SteeringEvaluation::Delta;
  const double v = 9.0;
  const LpvMatrices m = dynamic_lpv_matrices(v, cfg.epsilon, p, cfg);
  const double f0 = resistive_force(v, p);
  const auto rhs = [&](const Eigen::Matrix<double, 5, 1>& x) {
    const Eigen::Vector3d d = dynamic_derivatives({x(0), x(1), x(2)}, {x(3), x(4)}, p);
    return d;
  };
  Eigen::Matrix<double, 5, 1> x0;
  x0 << v, 0, 0, f0, 0;
  const double h = 1e-6;
  for (int j = 1; j < 5; ++j) {
    Eigen::Matrix<double, 5, 1> xp = x0, xm = x0;
    xp(j) += h;
    xm(j) -= h;
    const Eigen::Vector3d col = (rhs(xp) - rhs(xm)) / (2 * h);
    for (int i = 1; i < 3; ++i) {
      // The LPV slip row drops the -F_xR sin(alpha) coupling.
      const double omitted = (i == 1 && j == 1) ? f0 / (p.mass * v) : 0.0;
      EXPECT_NEAR(m.A(i, j), col(i) + omitted, 1e-5 * std::max(1.0, std::abs(col(i)))) << i << j;
    }
  }
}

TEST(EnumerateVertices, DynamicOrder) {
  const auto v = enumerate_vertices(SchedulingBounds::dynamic_default());
  ASSERT_EQ(v.size(), 4u);
  EXPECT_EQ(v[0], Eigen::Vector2d(1, 0.0873));
  EXPECT_EQ(v[1], Eigen::Vector2d(1, 0.9599));
  EXPECT_EQ(v[2], Eigen::Vector2d(18, 0.0873));
  EXPECT_EQ(v[3], Eigen::Vector2d(18, 0.9599));
}

TEST(EnumerateVertices, CornersAreBoundEndpoints) {
  const auto bounds = SchedulingBounds::kinematic_default();
  const auto v = enumerate_vertices(bounds);
  ASSERT_EQ(v.size(), 8u);
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t k = 0; k < 3; ++k) {
      const double c = v[i](static_cast<Eigen::Index>(k));
      EXPECT_TRUE(c == bounds.variables[k].lower || c == bounds.variables[k].upper);
    }
    for (std::size_t j = 0; j < i; ++j) EXPECT_NE(v[i], v[j]);
  }
  EXPECT_EQ(v[1], Eigen::Vector3d(1, -1.417, 0.139));
}

TEST(EnumerateVertices, SingleVariable) {
  const auto v = enumerate_vertices(SchedulingBounds{{{"p", 0.0, 1.0}}});
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0](0), 0.0);
  EXPECT_EQ(v[1](0), 1.0);
  EXPECT_THROW(enumerate_vertices(SchedulingBounds{{{"p", 1.0, 1.0}}}), std::invalid_argument);
}

TEST(LpvConfig, ShiftExceedsSteeringLimit) {
  LpvConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_NEAR(-cfg.steering_max + cfg.epsilon, 0.0873, 1e-12);
  EXPECT_NEAR(cfg.steering_max + cfg.epsilon, 0.9599, 1e-12);
  cfg.epsilon = 0.4;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}
