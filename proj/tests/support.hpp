#pragma once

// Oracles shared by the unit tests and the acceptance binary.

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include <lpvguide/lpv_models.hpp>
#include <lpvguide/scheduler.hpp>
#include <lpvguide/synthesis.hpp>

namespace testsupport {

struct RandomLqr {
  Eigen::MatrixXd A, B;
  Eigen::VectorXd q, r;
};

/// Gaussian (A, B) pairs are controllable with probability one; the rank
/// test below only guards against the measure-zero failures.
inline RandomLqr random_lqr(std::mt19937& rng) {
  std::uniform_int_distribution<int> n_dist(1, 6), m_dist(1, 2);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> w(0.2, 5.0);
  while (true) {
    const int n = n_dist(rng);
    const int m = std::min(m_dist(rng), n);
    RandomLqr s{Eigen::MatrixXd(n, n), Eigen::MatrixXd(n, m), Eigen::VectorXd(n), Eigen::VectorXd(m)};
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s.A(i, j) = g(rng);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) s.B(i, j) = g(rng);
    for (int i = 0; i < n; ++i) s.q(i) = w(rng);
    for (int i = 0; i < m; ++i) s.r(i) = w(rng);
    Eigen::MatrixXd ctrb(n, n * m);
    Eigen::MatrixXd block = s.B;
    for (int k = 0; k < n; ++k) {
      ctrb.middleCols(k * m, m) = block;
      block = s.A * block;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(ctrb);
    if (svd.singularValues()(n - 1) > 1e-3 * svd.singularValues()(0)) return s;
  }
}

struct RiccatiComparison {
  double relative_error = 0.0;
  double objective = 0.0;
  double capped_objective = 0.0;
};

/// Single-vertex LMI design against the Riccati gain. The second solve caps
/// the trace objective at 1.01 times the first optimum.
inline RiccatiComparison compare_with_riccati(const RandomLqr& s) {
  using namespace lpvguide;
  SynthesisConfig cfg;
  cfg.q = s.q;
  cfg.r = s.r;
  cfg.decay = 0.0;
  const auto first = solve_sdp(assemble_lqr_lmi({s.A}, s.B, cfg));
  if (!first.usable()) throw InfeasibleSynthesis("reference solve failed");
  cfg.trace_cap = 1.01 * first.objective;
  const auto capped = solve_sdp(assemble_lqr_lmi({s.A}, s.B, cfg));
  if (!capped.usable()) throw InfeasibleSynthesis("capped solve failed");
  const Eigen::MatrixXd K_lmi = capped.P.ldlt().solve(capped.W[0].transpose()).transpose();
  const Eigen::MatrixXd K_are =
      riccati_gain(s.A, s.B, Eigen::MatrixXd(s.q.asDiagonal()), Eigen::MatrixXd(s.r.asDiagonal()));
  return {(K_lmi - K_are).norm() / K_are.norm(), first.objective, capped.objective};
}

/// C (-(A + B K))^-1 B N for the 5-state dynamic sub-system.
inline Eigen::MatrixXd dc_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& K,
                               const Eigen::MatrixXd& C, const Eigen::MatrixXd& N) {
  const Eigen::MatrixXd closed = A + B * K;
  return C * (-closed).fullPivLu().solve(B * N);
}

}  // namespace testsupport
