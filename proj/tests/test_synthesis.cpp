#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include <lpvguide/lpv_models.hpp>
#include <lpvguide/synthesis.hpp>

#include "support.hpp"

using namespace lpvguide;

namespace {

SynthesisConfig unit_weights(Eigen::Index n, Eigen::Index m, double decay = 0.0) {
  SynthesisConfig cfg;
  cfg.q = Eigen::VectorXd::Ones(n);
  cfg.r = Eigen::VectorXd::Ones(m);
  cfg.decay = decay;
  return cfg;
}

Eigen::MatrixXd single_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const SynthesisConfig& cfg) {
  const SchedulingBounds bounds{{{"p", 0.0, 1.0}}};
  return synthesize({A, A}, B, bounds, cfg).gains.gains[0];
}

const SynthesisResult& dynamic_design() {
  static const SynthesisResult r = [] {
    const auto bounds = SchedulingBounds::dynamic_default();
    const LpvConfig lpv;
    return synthesize(dynamic_vertex_matrices(bounds, VehicleParams{}, lpv), dynamic_input_matrix(lpv), bounds,
                      SynthesisConfig::dynamic_default());
  }();
  return r;
}

const SynthesisResult& kinematic_design() {
  static const SynthesisResult r = [] {
    const auto bounds = SchedulingBounds::kinematic_default();
    return synthesize(kinematic_vertex_matrices(bounds), kinematic_input_matrix(), bounds,
                      SynthesisConfig::kinematic_default());
  }();
  return r;
}

}  // namespace

TEST(AssembleLqrLmi, DynamicBlockStructure) {
  const auto bounds = SchedulingBounds::dynamic_default();
  const LpvConfig lpv;
  const auto p = assemble_lqr_lmi(dynamic_vertex_matrices(bounds, VehicleParams{}, lpv), dynamic_input_matrix(lpv),
                                  SynthesisConfig::dynamic_default());
  EXPECT_EQ(p.count(LmiBlockKind::Lyapunov), 4u);
  EXPECT_EQ(p.count(LmiBlockKind::Schur), 4u);
  EXPECT_EQ(p.count(LmiBlockKind::Trace), 1u);
  EXPECT_EQ(p.count(LmiBlockKind::PPositive), 1u);
  EXPECT_EQ(p.count(LmiBlockKind::YPositive), 1u);
  EXPECT_EQ(p.layout.states, 6);
  EXPECT_EQ(p.layout.inputs, 2);
  EXPECT_EQ(p.layout.total(), 21 + 3 + 4 * 12);
}

TEST(AssembleLqrLmi, KinematicBlockStructure) {
  const auto bounds = SchedulingBounds::kinematic_default();
  const auto p = assemble_lqr_lmi(kinematic_vertex_matrices(bounds), kinematic_input_matrix(),
                                  SynthesisConfig::kinematic_default());
  EXPECT_EQ(p.count(LmiBlockKind::Lyapunov), 8u);
  EXPECT_EQ(p.count(LmiBlockKind::Schur), 8u);
  EXPECT_EQ(p.layout.total(), 6 + 3 + 8 * 6);
}

TEST(AssembleLqrLmi, ScalarSingleVertex) {
  const auto p = assemble_lqr_lmi({Eigen::MatrixXd::Constant(1, 1, -1.0)}, Eigen::MatrixXd::Ones(1, 1),
                                  unit_weights(1, 1));
  EXPECT_EQ(p.count(LmiBlockKind::Lyapunov), 1u);
  EXPECT_EQ(p.count(LmiBlockKind::Schur), 1u);
  EXPECT_EQ(p.count(LmiBlockKind::Trace), 1u);
}

TEST(AssembleLqrLmi, DecayMultipliesTwoP) {
  const auto base = assemble_lqr_lmi({Eigen::MatrixXd::Zero(1, 1)}, Eigen::MatrixXd::Ones(1, 1), unit_weights(1, 1));
  const auto fast = assemble_lqr_lmi({Eigen::MatrixXd::Zero(1, 1)}, Eigen::MatrixXd::Ones(1, 1), unit_weights(1, 1, 3));
  // Coefficient of P (variable 0) in the Lyapunov block is -(2a + 2 decay).
  EXPECT_EQ(base.sdp.blocks[2].terms[0].coeff(0, 0), 0.0);
  EXPECT_EQ(fast.sdp.blocks[2].terms[0].coeff(0, 0), -6.0);
}

TEST(AssembleLqrLmi, RejectsDimensionMismatch) {
  EXPECT_THROW(assemble_lqr_lmi({Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(3, 3)}, Eigen::MatrixXd::Ones(2, 1),
                                unit_weights(2, 1)),
               std::invalid_argument);
  EXPECT_THROW(assemble_lqr_lmi({Eigen::MatrixXd::Zero(2, 2)}, Eigen::MatrixXd::Ones(2, 1), unit_weights(3, 1)),
               std::invalid_argument);
  EXPECT_THROW(assemble_lqr_lmi({}, Eigen::MatrixXd::Ones(2, 1), unit_weights(2, 1)), std::invalid_argument);
}

TEST(SolveSdp, ScalarStableSystem) {
  const Eigen::MatrixXd K =
      single_gain(Eigen::MatrixXd::Constant(1, 1, -1.0), Eigen::MatrixXd::Ones(1, 1), unit_weights(1, 1));
  EXPECT_NEAR(K(0, 0), -(std::sqrt(2.0) - 1.0), 1e-3);
}

TEST(SolveSdp, DoubleIntegrator) {
  Eigen::MatrixXd A(2, 2), B(2, 1);
  A << 0, 1, 0, 0;
  B << 0, 1;
  const Eigen::MatrixXd K = single_gain(A, B, unit_weights(2, 1));
  EXPECT_NEAR(K(0, 0), -1.0, 1e-3);
  EXPECT_NEAR(K(0, 1), -std::sqrt(3.0), 1e-3);
}

TEST(SolveSdp, UncontrollableUnstableModeIsInfeasible) {
  Eigen::MatrixXd A(2, 2), B(2, 1);
  A << 1, 0, 0, -1;
  B << 0, 1;
  const auto sol = solve_sdp(assemble_lqr_lmi({A}, B, unit_weights(2, 1)));
  EXPECT_FALSE(sol.usable());
  EXPECT_THROW(single_gain(A, B, unit_weights(2, 1)), InfeasibleSynthesis);
}

TEST(SolveSdp, InfeasibilityIsSoundOnRandomSystems) {
  std::mt19937 rng(21);
  std::normal_distribution<double> g(0, 1);
  std::uniform_real_distribution<double> unstable(0.1, 2.0);
  for (int trial = 0; trial < 5; ++trial) {
    // Block-triangular: the first state is unstable and unreachable.
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(3, 3), B = Eigen::MatrixXd::Zero(3, 1);
    A(0, 0) = unstable(rng);
    for (int i = 1; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) A(i, j) = g(rng);
      B(i, 0) = g(rng);
    }
    const auto sol = solve_sdp(assemble_lqr_lmi({A}, B, unit_weights(3, 1)));
    EXPECT_FALSE(sol.usable()) << trial;
  }
}

TEST(SolveSdp, CertificateHoldsForReturnedSolutions) {
  std::mt19937 rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    const auto s = testsupport::random_lqr(rng);
    SynthesisConfig cfg;
    cfg.q = s.q;
    cfg.r = s.r;
    cfg.decay = 0.2;
    const auto problem = assemble_lqr_lmi({s.A}, s.B, cfg);
    const auto sol = solve_sdp(problem);
    ASSERT_TRUE(sol.usable());
    const auto cert = check_certificate(problem, sol);
    EXPECT_TRUE(cert.passed) << trial;
    for (const auto& b : cert.blocks) EXPECT_GE(b.margin, b.required) << b.label;
  }
}

TEST(SolveSdp, MatchesRiccatiOnRandomSystems) {
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 8; ++trial) {
    const auto s = testsupport::random_lqr(rng);
    const auto cmp = testsupport::compare_with_riccati(s);
    EXPECT_LE(cmp.relative_error, 1e-2) << "n=" << s.A.rows() << " m=" << s.B.cols();
    EXPECT_LE(cmp.capped_objective, 1.01 * cmp.objective);
  }
}

TEST(ExtractVertexGains, IdentityAndScalar) {
  SdpSolution sol;
  sol.status = SdpStatus::Optimal;
  sol.P = Eigen::MatrixXd::Identity(2, 2);
  Eigen::MatrixXd W(1, 2);
  W << 1, 0;
  sol.W = {W, 2 * W};
  const auto set = extract_vertex_gains(sol, SchedulingBounds{{{"p", 0, 1}}});
  EXPECT_EQ(set.gains[0], W);
  EXPECT_EQ(set.gains[1], 2 * W);

  SdpSolution scalar;
  scalar.status = SdpStatus::Feasible;
  scalar.P = Eigen::MatrixXd::Constant(1, 1, 4.0);
  scalar.W = {Eigen::MatrixXd::Constant(1, 1, 2.0), Eigen::MatrixXd::Constant(1, 1, 2.0)};
  EXPECT_DOUBLE_EQ(extract_vertex_gains(scalar, SchedulingBounds{{{"p", 0, 1}}}).gains[0](0, 0), 0.5);
}

TEST(ExtractVertexGains, Errors) {
  SdpSolution sol;
  sol.status = SdpStatus::Optimal;
  sol.P = Eigen::Vector2d(1.0, 1e-14).asDiagonal();
  sol.W = {Eigen::MatrixXd::Ones(1, 2), Eigen::MatrixXd::Ones(1, 2)};
  const SchedulingBounds b{{{"p", 0, 1}}};
  EXPECT_THROW(extract_vertex_gains(sol, b), std::domain_error);
  sol.P = Eigen::MatrixXd::Identity(2, 2);
  sol.W.pop_back();
  EXPECT_THROW(extract_vertex_gains(sol, b), std::invalid_argument);
  sol.status = SdpStatus::Infeasible;
  EXPECT_THROW(extract_vertex_gains(sol, b), InfeasibleSynthesis);
}

TEST(ExtractVertexGains, DynamicDesignShape) {
  const auto& r = dynamic_design();
  ASSERT_EQ(r.gains.gains.size(), 4u);
  for (const auto& K : r.gains.gains) {
    EXPECT_EQ(K.rows(), 2);
    EXPECT_EQ(K.cols(), 6);
  }
  EXPECT_EQ(r.gains.bounds, SchedulingBounds::dynamic_default());
}

TEST(ValidateSynthesis, ScalarThresholds) {
  const std::vector<Eigen::MatrixXd> A{Eigen::MatrixXd::Constant(1, 1, -1.0), Eigen::MatrixXd::Constant(1, 1, -1.0)};
  const VertexGainSet gains{SchedulingBounds{{{"p", 0, 1}}},
                            {Eigen::MatrixXd::Constant(1, 1, -1.0), Eigen::MatrixXd::Constant(1, 1, -1.0)}};
  const auto ok = validate_synthesis(A, Eigen::MatrixXd::Ones(1, 1), gains, 1.5);
  EXPECT_TRUE(ok.passed);
  EXPECT_DOUBLE_EQ(ok.vertices[0].max_real, -2.0);
  const auto bad = validate_synthesis(A, Eigen::MatrixXd::Ones(1, 1), gains, 3.0);
  EXPECT_FALSE(bad.passed);
  EXPECT_FALSE(bad.vertices[1].passed);
}

TEST(PaperDesigns, DynamicMeetsDecayAndCertificate) {
  const auto& r = dynamic_design();
  EXPECT_TRUE(r.report.passed);
  ASSERT_TRUE(r.report.certificate);
  EXPECT_TRUE(r.report.certificate->passed);
  for (const auto& v : r.report.vertices) EXPECT_LT(v.max_real, -3.0 + 1e-6);
}

TEST(PaperDesigns, KinematicMeetsDecayAndCertificate) {
  const auto& r = kinematic_design();
  EXPECT_TRUE(r.report.passed);
  ASSERT_TRUE(r.report.certificate);
  EXPECT_TRUE(r.report.certificate->passed);
  EXPECT_EQ(r.gains.gains.size(), 8u);
  for (const auto& v : r.report.vertices) EXPECT_LT(v.max_real, -0.5 + 1e-6);
}

TEST(PaperDesigns, ExcessiveDecayIsInfeasible) {
  auto cfg = SynthesisConfig::dynamic_default();
  cfg.decay = 100.0;
  const auto bounds = SchedulingBounds::dynamic_default();
  const LpvConfig lpv;
  EXPECT_THROW(synthesize(dynamic_vertex_matrices(bounds, VehicleParams{}, lpv), dynamic_input_matrix(lpv), bounds, cfg),
               InfeasibleSynthesis);
}

TEST(PaperDesigns, LargerDecayNeverSlowsTheSlowestPole) {
  const auto bounds = SchedulingBounds::kinematic_default();
  double previous = std::numeric_limits<double>::infinity();
  for (double beta : {0.0, 0.25, 0.5, 1.0, 2.0}) {
    auto cfg = SynthesisConfig::kinematic_default();
    cfg.decay = beta;
    const auto r = synthesize(kinematic_vertex_matrices(bounds), kinematic_input_matrix(), bounds, cfg);
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& v : r.report.vertices) worst = std::max(worst, v.max_real);
    EXPECT_LE(worst, previous + 1e-6) << beta;
    EXPECT_LT(worst, -beta + 1e-6);
    previous = worst;
  }
}

TEST(RiccatiGain, ClosedForms) {
  const Eigen::MatrixXd one = Eigen::MatrixXd::Ones(1, 1);
  EXPECT_NEAR(riccati_gain(-one, one, one, one)(0, 0), -0.41421356, 1e-6);
  EXPECT_NEAR(riccati_gain(Eigen::MatrixXd::Zero(1, 1), one, one, one)(0, 0), -1.0, 1e-9);
  Eigen::MatrixXd A(2, 2);
  A << -1, 2, 0, -3;
  const Eigen::MatrixXd K = riccati_gain(A, Eigen::MatrixXd::Ones(2, 1), Eigen::MatrixXd::Zero(2, 2), one);
  EXPECT_LT(K.norm(), 1e-9);
}

TEST(RiccatiGain, SatisfiesTheRiccatiEquation) {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = testsupport::random_lqr(rng);
    const Eigen::MatrixXd Q = s.q.asDiagonal(), R = s.r.asDiagonal();
    const Eigen::MatrixXd X = care_solution(s.A, s.B, Q, R);
    const Eigen::MatrixXd res = s.A.transpose() * X + X * s.A - X * s.B * R.inverse() * s.B.transpose() * X + Q;
    EXPECT_LE(res.norm(), 1e-8 * std::max(1.0, X.norm()));
  }
}

TEST(RiccatiGain, RejectsUnstabilizable) {
  Eigen::MatrixXd A(2, 2), B(2, 1);
  A << 1, 0, 0, -1;
  B << 0, 1;
  EXPECT_THROW(riccati_gain(A, B, Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Ones(1, 1)), std::domain_error);
}
