#pragma once

// Polytopic LQR synthesis through LMIs with a decay-rate constraint.
//
// Decision variables: P (s x s, symmetric), Y (r x r, symmetric) and one
// W_i (r x s) per vertex. Blocks, all required positive definite:
//   P                                   (P >= 0)
//   Y - tol I                           (Y > 0)
//   -(A_i P + B W_i)-(..)' - 2 d P - I  (one per vertex)
//   [Y, -R^1/2 W_i; (..)', P] - tol I   (one per vertex)
//   cap - tr(Q^1/2 P Q^1/2) - tr(Y)
// Objective: tr(Q^1/2 P Q^1/2) + tr(Y). Gains K_i = W_i P^-1 (u = K x).
//
// The LMIs may be posed in diagonally scaled coordinates x~ = T x. Every block
// is then a congruence of the unscaled one (the Lyapunov constant becomes -T^2),
// so the optimum is unchanged; the certificate lives in the scaled coordinates.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "lpv_models.hpp"
#include "sdp.hpp"

namespace lpvguide {

class InfeasibleSynthesis : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SynthesisConfig {
  Eigen::VectorXd q;            // diagonal of Q
  Eigen::VectorXd r;            // diagonal of R
  double gamma_bound = 1e-3;    // reported, not enforced
  double decay = 0.0;           // eta (dynamic) or beta (kinematic)
  double tol = 1e-7;            // strictness margin
  int max_iter = 5000;          // Newton step budget
  double gap = 1e-8;            // relative duality-gap proxy
  double trace_cap = 1e12;      // upper bound on the objective, keeps the feasible set bounded

  void validate() const {
    if (q.size() == 0 || r.size() == 0) throw std::invalid_argument("SynthesisConfig: empty weights");
    if ((q.array() < 0.0).any() || !q.allFinite()) throw std::invalid_argument("SynthesisConfig: Q must be PSD");
    if (!(r.array() > 0.0).all() || !r.allFinite()) throw std::invalid_argument("SynthesisConfig: R must be PD");
    if (!(gamma_bound > 0.0)) throw std::invalid_argument("SynthesisConfig: gamma_bound must be positive");
    if (!(decay >= 0.0)) throw std::invalid_argument("SynthesisConfig: decay must be non-negative");
    if (!(tol > 0.0) || max_iter <= 0 || !(gap > 0.0) || !(trace_cap > 0.0)) {
      throw std::invalid_argument("SynthesisConfig: invalid solver settings");
    }
  }

  bool operator==(const SynthesisConfig& other) const {
    return q == other.q && r == other.r && gamma_bound == other.gamma_bound &&
           decay == other.decay && tol == other.tol && max_iter == other.max_iter &&
           gap == other.gap && trace_cap == other.trace_cap;
  }

  static SynthesisConfig dynamic_default() {
    SynthesisConfig cfg;
    cfg.q = (Eigen::VectorXd(6) << 0.01, 0.01, 0.01, 0.01, 1e5, 9e4).finished();
    cfg.r = (Eigen::VectorXd(2) << 0.01, 10.0).finished();
    cfg.gamma_bound = 0.001;
    cfg.decay = 3.0;
    return cfg;
  }

  static SynthesisConfig kinematic_default() {
    SynthesisConfig cfg;
    cfg.q = (Eigen::VectorXd(3) << 3.0, 2.0, 20.0).finished();
    cfg.r = (Eigen::VectorXd(2) << 0.5, 10.0).finished();
    cfg.gamma_bound = 0.01;
    cfg.decay = 0.5;
    return cfg;
  }
};

struct LmiLayout {
  Eigen::Index states = 0;
  Eigen::Index inputs = 0;
  std::size_t vertices = 0;

  Eigen::Index p_vars() const { return states * (states + 1) / 2; }
  Eigen::Index y_vars() const { return inputs * (inputs + 1) / 2; }
  Eigen::Index w_vars() const { return states * inputs; }
  Eigen::Index y_offset() const { return p_vars(); }
  Eigen::Index w_offset(std::size_t vertex) const {
    return p_vars() + y_vars() + static_cast<Eigen::Index>(vertex) * w_vars();
  }
  Eigen::Index total() const { return w_offset(vertices); }
};

/// Block kinds, in the order they are appended to the SDP.
enum class LmiBlockKind { PPositive, YPositive, Lyapunov, Schur, Trace };

struct LqrLmiProblem {
  SdpProblem sdp;
  LmiLayout layout;
  std::vector<LmiBlockKind> kinds;  // parallel to sdp.blocks
  std::vector<Eigen::MatrixXd> vertex_A;  // physical coordinates
  Eigen::MatrixXd B;
  SynthesisConfig config;
  Eigen::VectorXd scaling;  // diagonal of T

  Eigen::MatrixXd solved_A(std::size_t i) const {
    return scaling.asDiagonal() * vertex_A[i] * scaling.cwiseInverse().asDiagonal();
  }
  Eigen::MatrixXd solved_B() const { return scaling.asDiagonal() * B; }
  Eigen::VectorXd solved_q() const { return config.q.cwiseQuotient(scaling.cwiseAbs2()); }

  std::size_t count(LmiBlockKind kind) const {
    return static_cast<std::size_t>(std::count(kinds.begin(), kinds.end(), kind));
  }
};

struct SdpSolution {
  SdpStatus status = SdpStatus::MaxIter;
  Eigen::MatrixXd P;
  Eigen::MatrixXd Y;
  std::vector<Eigen::MatrixXd> W;
  double objective = std::numeric_limits<double>::quiet_NaN();
  int newton_steps = 0;
  Eigen::VectorXd x;        // raw decision vector
  Eigen::VectorXd scaling;  // P, Y, W are expressed in coordinates T x
  double barrier = std::numeric_limits<double>::quiet_NaN();

  bool usable() const { return status == SdpStatus::Optimal || status == SdpStatus::Feasible; }
};

struct VertexGainSet {
  SchedulingBounds bounds;
  std::vector<Eigen::MatrixXd> gains;

  void validate() const {
    bounds.validate();
    if (gains.size() != bounds.vertex_count()) {
      throw std::invalid_argument("VertexGainSet: gain count does not match 2^n vertices");
    }
    for (const auto& K : gains) {
      if (K.rows() != gains.front().rows() || K.cols() != gains.front().cols()) {
        throw std::invalid_argument("VertexGainSet: gains differ in shape");
      }
      if (!K.allFinite()) throw std::invalid_argument("VertexGainSet: non-finite gain");
    }
  }
};

namespace detail {

inline std::vector<Eigen::MatrixXd> symmetric_basis(Eigen::Index n) {
  std::vector<Eigen::MatrixXd> basis;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n, n);
      E(i, j) = 1.0;
      E(j, i) = 1.0;
      basis.push_back(std::move(E));
    }
  }
  return basis;
}

inline Eigen::MatrixXd unit_matrix(Eigen::Index rows, Eigen::Index cols, Eigen::Index flat) {
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(rows, cols);
  E(flat / cols, flat % cols) = 1.0;  // row-major flattening
  return E;
}

inline Eigen::MatrixXd unpack_symmetric(const Eigen::VectorXd& x, Eigen::Index offset, Eigen::Index n) {
  Eigen::MatrixXd M(n, n);
  Eigen::Index k = offset;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      M(i, j) = x(k);
      M(j, i) = x(k);
      ++k;
    }
  }
  return M;
}

}  // namespace detail

inline LqrLmiProblem assemble_lqr_lmi(const std::vector<Eigen::MatrixXd>& vertex_A,
                                      const Eigen::MatrixXd& B, const SynthesisConfig& cfg,
                                      const Eigen::VectorXd& scaling = {}) {
  cfg.validate();
  if (vertex_A.empty()) throw std::invalid_argument("assemble_lqr_lmi: no vertices");
  const Eigen::Index n = B.rows();
  const Eigen::Index m = B.cols();
  for (const auto& A : vertex_A) {
    if (A.rows() != n || A.cols() != n) {
      throw std::invalid_argument("assemble_lqr_lmi: vertex matrix dimension mismatch");
    }
  }
  if (cfg.q.size() != n || cfg.r.size() != m) {
    throw std::invalid_argument("assemble_lqr_lmi: weight dimensions do not match (A, B)");
  }
  if (scaling.size() != 0 && (scaling.size() != n || !(scaling.array() > 0.0).all())) {
    throw std::invalid_argument("assemble_lqr_lmi: scaling must be positive with one entry per state");
  }

  LqrLmiProblem out;
  out.layout = {n, m, vertex_A.size()};
  out.vertex_A = vertex_A;
  out.B = B;
  out.config = cfg;
  out.scaling = scaling.size() == 0 ? Eigen::VectorXd::Ones(n) : scaling;
  const Eigen::MatrixXd B_s = out.solved_B();
  const LmiLayout& lay = out.layout;
  SdpProblem& sdp = out.sdp;
  sdp.num_vars = lay.total();

  const auto basis_p = detail::symmetric_basis(n);
  const auto basis_y = detail::symmetric_basis(m);
  const Eigen::VectorXd q_half = out.solved_q().cwiseSqrt();
  const Eigen::VectorXd r_half = cfg.r.cwiseSqrt();

  {
    LmiBlock block{"P>=0", Eigen::MatrixXd::Zero(n, n), {}};
    for (Eigen::Index k = 0; k < lay.p_vars(); ++k) block.terms.push_back({k, basis_p[k]});
    sdp.blocks.push_back(std::move(block));
    out.kinds.push_back(LmiBlockKind::PPositive);
  }
  {
    LmiBlock block{"Y>0", -cfg.tol * Eigen::MatrixXd::Identity(m, m), {}};
    for (Eigen::Index k = 0; k < lay.y_vars(); ++k) block.terms.push_back({lay.y_offset() + k, basis_y[k]});
    sdp.blocks.push_back(std::move(block));
    out.kinds.push_back(LmiBlockKind::YPositive);
  }

  for (std::size_t i = 0; i < vertex_A.size(); ++i) {
    const Eigen::MatrixXd A = out.solved_A(i);
    LmiBlock lyap{"lyapunov[" + std::to_string(i) + "]",
                  -Eigen::MatrixXd(out.scaling.cwiseAbs2().asDiagonal()), {}};
    for (Eigen::Index k = 0; k < lay.p_vars(); ++k) {
      const Eigen::MatrixXd& E = basis_p[k];
      lyap.terms.push_back({k, -(A * E + E * A.transpose() + 2.0 * cfg.decay * E)});
    }
    for (Eigen::Index k = 0; k < lay.w_vars(); ++k) {
      const Eigen::MatrixXd Wk = detail::unit_matrix(m, n, k);
      const Eigen::MatrixXd BW = B_s * Wk;
      const Eigen::MatrixXd coeff = -(BW + BW.transpose());
      if (coeff.cwiseAbs().maxCoeff() == 0.0) continue;
      lyap.terms.push_back({lay.w_offset(i) + k, coeff});
    }
    sdp.blocks.push_back(std::move(lyap));
    out.kinds.push_back(LmiBlockKind::Lyapunov);

    const Eigen::Index s = n + m;
    LmiBlock schur{"schur[" + std::to_string(i) + "]", -cfg.tol * Eigen::MatrixXd::Identity(s, s), {}};
    for (Eigen::Index k = 0; k < lay.p_vars(); ++k) {
      Eigen::MatrixXd F = Eigen::MatrixXd::Zero(s, s);
      F.bottomRightCorner(n, n) = basis_p[k];
      schur.terms.push_back({k, std::move(F)});
    }
    for (Eigen::Index k = 0; k < lay.y_vars(); ++k) {
      Eigen::MatrixXd F = Eigen::MatrixXd::Zero(s, s);
      F.topLeftCorner(m, m) = basis_y[k];
      schur.terms.push_back({lay.y_offset() + k, std::move(F)});
    }
    for (Eigen::Index k = 0; k < lay.w_vars(); ++k) {
      const Eigen::MatrixXd X = -(r_half.asDiagonal() * detail::unit_matrix(m, n, k));
      Eigen::MatrixXd F = Eigen::MatrixXd::Zero(s, s);
      F.topRightCorner(m, n) = X;
      F.bottomLeftCorner(n, m) = X.transpose();
      schur.terms.push_back({lay.w_offset(i) + k, std::move(F)});
    }
    sdp.blocks.push_back(std::move(schur));
    out.kinds.push_back(LmiBlockKind::Schur);
  }

  sdp.objective = Eigen::VectorXd::Zero(sdp.num_vars);
  for (Eigen::Index k = 0; k < lay.p_vars(); ++k) {
    sdp.objective(k) = (q_half.asDiagonal() * basis_p[k] * q_half.asDiagonal()).trace();
  }
  for (Eigen::Index k = 0; k < lay.y_vars(); ++k) sdp.objective(lay.y_offset() + k) = basis_y[k].trace();
  {
    LmiBlock trace{"trace", Eigen::MatrixXd::Constant(1, 1, cfg.trace_cap), {}};
    for (Eigen::Index k = 0; k < sdp.num_vars; ++k) {
      if (sdp.objective(k) != 0.0) trace.terms.push_back({k, Eigen::MatrixXd::Constant(1, 1, -sdp.objective(k))});
    }
    sdp.blocks.push_back(std::move(trace));
    out.kinds.push_back(LmiBlockKind::Trace);
  }
  return out;
}

inline Eigen::VectorXd pack_solution(const LmiLayout& lay, const Eigen::MatrixXd& P, const Eigen::MatrixXd& Y,
                                     const std::vector<Eigen::MatrixXd>& W) {
  Eigen::VectorXd x(lay.total());
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < lay.states; ++i)
    for (Eigen::Index j = i; j < lay.states; ++j) x(k++) = P(i, j);
  for (Eigen::Index i = 0; i < lay.inputs; ++i)
    for (Eigen::Index j = i; j < lay.inputs; ++j) x(k++) = Y(i, j);
  for (const auto& Wi : W)
    for (Eigen::Index r = 0; r < lay.inputs; ++r)
      for (Eigen::Index c = 0; c < lay.states; ++c) x(k++) = Wi(r, c);
  return x;
}

inline SdpSolution unpack_solution(const LqrLmiProblem& problem, const Eigen::VectorXd& x) {
  const LmiLayout& lay = problem.layout;
  SdpSolution sol;
  sol.x = x;
  sol.P = detail::unpack_symmetric(x, 0, lay.states);
  sol.Y = detail::unpack_symmetric(x, lay.y_offset(), lay.inputs);
  for (std::size_t i = 0; i < lay.vertices; ++i) {
    Eigen::MatrixXd W(lay.inputs, lay.states);
    for (Eigen::Index k = 0; k < lay.w_vars(); ++k) W(k / lay.states, k % lay.states) = x(lay.w_offset(i) + k);
    sol.W.push_back(std::move(W));
  }
  sol.objective = problem.sdp.objective.dot(x);
  sol.scaling = problem.scaling;
  return sol;
}

inline SdpSolution solve_sdp(const LqrLmiProblem& problem, std::optional<Eigen::VectorXd> x0 = std::nullopt,
                             double initial_barrier = 1.0) {
  SdpOptions options;
  options.gap = problem.config.gap;
  options.max_newton = problem.config.max_iter;
  options.initial_barrier = initial_barrier;
  const SdpResult raw = solve_sdp(problem.sdp, options, std::move(x0));
  SdpSolution sol = unpack_solution(problem, raw.x);
  sol.status = raw.status;
  sol.newton_steps = raw.newton_steps;
  sol.barrier = raw.barrier;
  return sol;
}

inline double condition_number(const Eigen::MatrixXd& P) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(P, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().cwiseAbs().minCoeff();
  const double hi = eig.eigenvalues().cwiseAbs().maxCoeff();
  return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

inline VertexGainSet extract_vertex_gains(const SdpSolution& sol, const SchedulingBounds& bounds,
                                          double max_condition = 1e12) {
  if (!sol.usable()) {
    throw InfeasibleSynthesis("extract_vertex_gains: solution status is " +
                              std::string(to_string(sol.status)));
  }
  if (sol.W.size() != bounds.vertex_count()) {
    throw std::invalid_argument("extract_vertex_gains: vertex count does not match the bounds");
  }
  if (condition_number(sol.P) > max_condition) {
    throw std::domain_error("extract_vertex_gains: P is numerically singular");
  }
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(sol.P);
  const Eigen::VectorXd scaling =
      sol.scaling.size() == 0 ? Eigen::VectorXd::Ones(sol.P.rows()) : sol.scaling;
  VertexGainSet set{bounds, {}};
  for (const auto& W : sol.W) {
    // K = W P^-1 T, with K' = T P^-1 W'
    set.gains.push_back(ldlt.solve(W.transpose()).transpose() * scaling.asDiagonal());
  }
  return set;
}

struct BlockMargin {
  std::string label;
  LmiBlockKind kind;
  double margin = 0.0;    // min eigenvalue of the strict side of the inequality
  double required = 0.0;  // margin demanded by the assembled block
  bool satisfied = false;
};

struct CertificateReport {
  std::vector<BlockMargin> blocks;
  double min_margin = std::numeric_limits<double>::infinity();
  bool passed = false;
};

/// Re-evaluates every inequality at (P, Y, W_i), independently of the solver.
inline CertificateReport check_certificate(const LqrLmiProblem& problem, const SdpSolution& sol) {
  const SynthesisConfig& cfg = problem.config;
  const Eigen::Index n = problem.layout.states;
  const Eigen::Index m = problem.layout.inputs;
  const auto min_eig = [](const Eigen::MatrixXd& M) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
    return eig.eigenvalues()(0);
  };
  CertificateReport report;
  report.passed = true;
  const auto add = [&](std::string label, LmiBlockKind kind, double margin, double required) {
    BlockMargin bm{std::move(label), kind, margin, required, margin >= required};
    report.passed = report.passed && bm.satisfied;
    report.min_margin = std::min(report.min_margin, margin);
    report.blocks.push_back(std::move(bm));
  };
  const Eigen::MatrixXd r_half = cfg.r.cwiseSqrt().asDiagonal();
  const Eigen::MatrixXd q_half = problem.solved_q().cwiseSqrt().asDiagonal();
  const Eigen::MatrixXd B_s = problem.solved_B();

  add("P>=0", LmiBlockKind::PPositive, min_eig(sol.P), 0.0);
  add("Y>0", LmiBlockKind::YPositive, min_eig(sol.Y), cfg.tol);
  for (std::size_t i = 0; i < problem.layout.vertices; ++i) {
    const Eigen::MatrixXd L = problem.solved_A(i) * sol.P + B_s * sol.W[i];
    add("lyapunov[" + std::to_string(i) + "]", LmiBlockKind::Lyapunov,
        min_eig(-(L + L.transpose() + 2.0 * cfg.decay * sol.P)), problem.scaling.minCoeff() * problem.scaling.minCoeff());
    Eigen::MatrixXd S(n + m, n + m);
    S.topLeftCorner(m, m) = -sol.Y;
    S.topRightCorner(m, n) = r_half * sol.W[i];
    S.bottomLeftCorner(n, m) = (r_half * sol.W[i]).transpose();
    S.bottomRightCorner(n, n) = -sol.P;
    add("schur[" + std::to_string(i) + "]", LmiBlockKind::Schur, min_eig(-S), cfg.tol);
  }
  const double objective = (q_half * sol.P * q_half).trace() + sol.Y.trace();
  add("trace", LmiBlockKind::Trace, cfg.trace_cap - objective, 0.0);
  return report;
}

struct VertexCheck {
  double max_real = 0.0;
  bool passed = false;
};

struct SynthesisReport {
  std::vector<VertexCheck> vertices;
  double decay = 0.0;
  bool passed = false;
  std::optional<CertificateReport> certificate;
  double objective = std::numeric_limits<double>::quiet_NaN();
  bool gamma_met = false;
};

inline SynthesisReport validate_synthesis(const std::vector<Eigen::MatrixXd>& vertex_A,
                                          const Eigen::MatrixXd& B, const VertexGainSet& gains,
                                          double decay) {
  if (vertex_A.size() != gains.gains.size()) {
    throw std::invalid_argument("validate_synthesis: vertex count mismatch");
  }
  SynthesisReport report;
  report.decay = decay;
  report.passed = true;
  for (std::size_t i = 0; i < vertex_A.size(); ++i) {
    const Eigen::MatrixXd closed = vertex_A[i] + B * gains.gains[i];
    Eigen::EigenSolver<Eigen::MatrixXd> eig(closed, false);
    VertexCheck check;
    check.max_real = eig.eigenvalues().real().maxCoeff();
    check.passed = check.max_real < -decay + 1e-6;
    report.passed = report.passed && check.passed;
    report.vertices.push_back(check);
  }
  return report;
}

/// Adds the certificate and the trace-bound comparison. gamma is compared
/// against the objective rescaled to a Lyapunov margin of tol.
inline SynthesisReport validate_synthesis(const LqrLmiProblem& problem, const SdpSolution& sol,
                                          const VertexGainSet& gains) {
  SynthesisReport report = validate_synthesis(problem.vertex_A, problem.B, gains, problem.config.decay);
  report.certificate = check_certificate(problem, sol);
  report.passed = report.passed && report.certificate->passed;
  report.objective = sol.objective;
  report.gamma_met = sol.objective * problem.config.tol < problem.config.gamma_bound;
  return report;
}

/// Full pipeline for a gain set: assemble, solve, extract. Throws
/// InfeasibleSynthesis when the solver does not return a usable certificate.
struct SynthesisResult {
  LqrLmiProblem problem;
  SdpSolution solution;
  VertexGainSet gains;
  SynthesisReport report;
};

inline SynthesisResult synthesize(const std::vector<Eigen::MatrixXd>& vertex_A, const Eigen::MatrixXd& B,
                                  const SchedulingBounds& bounds, const SynthesisConfig& cfg) {
  SynthesisResult result;
  result.problem = assemble_lqr_lmi(vertex_A, B, cfg);
  result.solution = solve_sdp(result.problem);
  if (!result.solution.usable()) {
    throw InfeasibleSynthesis("synthesis failed: solver status " +
                              std::string(to_string(result.solution.status)));
  }
  if (condition_number(result.solution.P) > 1e6) {
    // Badly scaled states (e.g. newtons next to radians): re-pose the LMIs in
    // coordinates where the first certificate has a unit diagonal.
    const Eigen::VectorXd d = result.solution.P.diagonal();
    if ((d.array() > 0.0).all()) {
      Eigen::VectorXd scaling = d.cwiseSqrt().cwiseInverse();
      scaling /= scaling.minCoeff();
      LqrLmiProblem rescaled = assemble_lqr_lmi(vertex_A, B, cfg, scaling);
      const SdpSolution& first = result.solution;
      std::vector<Eigen::MatrixXd> W;
      for (const auto& Wi : first.W) W.push_back(Wi * scaling.asDiagonal());
      const Eigen::VectorXd warm = pack_solution(
          rescaled.layout, scaling.asDiagonal() * first.P * scaling.asDiagonal(), first.Y, W);
      // The log-det barrier is congruence invariant, so the warm start is
      // already close to the central path at the final barrier parameter.
      SdpSolution second = solve_sdp(rescaled, warm, first.barrier);
      second.newton_steps += first.newton_steps;
      if (second.usable()) {
        result.problem = std::move(rescaled);
        result.solution = std::move(second);
      }
    }
  }
  result.gains = extract_vertex_gains(result.solution, bounds);
  result.report = validate_synthesis(result.problem, result.solution, result.gains);
  return result;
}

/// Stabilizing CARE solution via the matrix sign function of the Hamiltonian.
inline Eigen::MatrixXd care_solution(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                     const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n || R.rows() != B.cols() ||
      R.cols() != B.cols()) {
    throw std::invalid_argument("riccati: dimension mismatch");
  }
  Eigen::MatrixXd H(2 * n, 2 * n);
  H.topLeftCorner(n, n) = A;
  H.topRightCorner(n, n) = -B * R.ldlt().solve(B.transpose());
  H.bottomLeftCorner(n, n) = -Q;
  H.bottomRightCorner(n, n) = -A.transpose();

  Eigen::MatrixXd Z = H;
  const double dim = static_cast<double>(2 * n);
  bool converged = false;
  for (int it = 0; it < 200; ++it) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(Z);
    const double det = lu.determinant();
    if (!std::isfinite(det) || det == 0.0) break;
    const double scale = std::pow(std::abs(det), -1.0 / dim);
    const Eigen::MatrixXd next = 0.5 * (scale * Z + lu.inverse() / scale);
    const double change = (next - Z).norm();
    Z = next;
    if (!Z.allFinite()) break;
    if (change <= 1e-13 * Z.norm()) {
      converged = true;
      break;
    }
  }
  if (!converged) throw std::domain_error("riccati: Hamiltonian has imaginary-axis eigenvalues");

  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd lhs(2 * n, n), rhs(2 * n, n);
  lhs.topRows(n) = Z.topRightCorner(n, n);
  lhs.bottomRows(n) = Z.bottomRightCorner(n, n) + I;
  rhs.topRows(n) = -(Z.topLeftCorner(n, n) + I);
  rhs.bottomRows(n) = -Z.bottomLeftCorner(n, n);
  Eigen::MatrixXd X = lhs.colPivHouseholderQr().solve(rhs);
  X = 0.5 * (X + X.transpose());

  const Eigen::MatrixXd closed = A - B * R.ldlt().solve(B.transpose() * X);
  Eigen::EigenSolver<Eigen::MatrixXd> eig(closed, false);
  if (!X.allFinite() || !(eig.eigenvalues().real().maxCoeff() < 0.0)) {
    throw std::domain_error("riccati: (A, B) is not stabilizable");
  }
  return X;
}

/// LQR gain with the u = K x convention: K = -R^-1 B' X.
inline Eigen::MatrixXd riccati_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                    const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R) {
  const Eigen::MatrixXd X = care_solution(A, B, Q, R);
  return -R.ldlt().solve(B.transpose() * X);
}

}  // namespace lpvguide
