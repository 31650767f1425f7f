#pragma once

// Small dense semidefinite programs of the form
//
//   minimize c'x  subject to  F_j(x) = F_j0 + sum_k x_k F_jk > 0  for every block j
//
// solved with a log-det barrier method (phase I for a strictly feasible
// start, then a path-following phase II with damped Newton centering).

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace lpvguide {

struct LmiTerm {
  Eigen::Index var = 0;
  Eigen::MatrixXd coeff;  // symmetric
};

/// One block F0 + sum x_k F_k, required to be positive definite.
struct LmiBlock {
  std::string label;
  Eigen::MatrixXd constant;
  std::vector<LmiTerm> terms;

  Eigen::Index size() const { return constant.rows(); }

  Eigen::MatrixXd evaluate(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd value = constant;
    for (const auto& term : terms) value += x(term.var) * term.coeff;
    return value;
  }

  double min_eigenvalue(const Eigen::VectorXd& x) const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(evaluate(x), Eigen::EigenvaluesOnly);
    return eig.eigenvalues()(0);
  }
};

struct SdpProblem {
  Eigen::Index num_vars = 0;
  std::vector<LmiBlock> blocks;
  Eigen::VectorXd objective;

  void validate() const {
    if (num_vars <= 0) throw std::invalid_argument("SdpProblem: no decision variables");
    if (objective.size() != num_vars) throw std::invalid_argument("SdpProblem: objective size mismatch");
    for (const auto& block : blocks) {
      if (block.constant.rows() != block.constant.cols()) {
        throw std::invalid_argument("SdpProblem: block '" + block.label + "' is not square");
      }
      for (const auto& term : block.terms) {
        if (term.var < 0 || term.var >= num_vars) {
          throw std::invalid_argument("SdpProblem: block '" + block.label + "' references an unknown variable");
        }
        if (term.coeff.rows() != block.size() || term.coeff.cols() != block.size()) {
          throw std::invalid_argument("SdpProblem: block '" + block.label + "' has a mis-sized coefficient");
        }
      }
    }
  }

  Eigen::Index total_dimension() const {
    Eigen::Index m = 0;
    for (const auto& block : blocks) m += block.size();
    return m;
  }

  double min_margin(const Eigen::VectorXd& x) const {
    double margin = std::numeric_limits<double>::infinity();
    for (const auto& block : blocks) margin = std::min(margin, block.min_eigenvalue(x));
    return margin;
  }
};

enum class SdpStatus { Optimal, Feasible, Infeasible, MaxIter };

inline std::string_view to_string(SdpStatus status) {
  switch (status) {
    case SdpStatus::Optimal: return "optimal";
    case SdpStatus::Feasible: return "feasible";
    case SdpStatus::Infeasible: return "infeasible";
    case SdpStatus::MaxIter: return "max-iter";
  }
  return "unknown";
}

struct SdpOptions {
  double gap = 1e-8;             // stop when m/t <= gap * |c'x|
  double barrier_growth = 20.0;
  double newton_tol = 1e-10;     // half squared Newton decrement
  int max_newton = 5000;         // total Newton steps over both phases
  int max_centering = 50;        // Newton steps per barrier parameter before t grows anyway
  int max_outer = 200;
  double initial_barrier = 1.0;  // t at the start of phase II

  void validate() const {
    if (!(gap > 0.0) || !(barrier_growth > 1.0) || !(newton_tol > 0.0) || max_newton <= 0 ||
        max_outer <= 0 || max_centering <= 0 || !(initial_barrier > 0.0)) {
      throw std::invalid_argument("SdpOptions: invalid tolerances");
    }
  }
};

struct SdpResult {
  SdpStatus status = SdpStatus::MaxIter;
  Eigen::VectorXd x;
  double objective = std::numeric_limits<double>::quiet_NaN();
  double phase1_value = std::numeric_limits<double>::quiet_NaN();
  double barrier = std::numeric_limits<double>::quiet_NaN();  // final t
  int newton_steps = 0;
};

namespace detail {

struct BarrierState {
  double value = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

/// -sum log det F_j(x); nullopt outside the interior.
inline std::optional<double> barrier_value(const SdpProblem& problem, const Eigen::VectorXd& x) {
  double value = 0.0;
  for (const auto& block : problem.blocks) {
    Eigen::LLT<Eigen::MatrixXd> llt(block.evaluate(x));
    if (llt.info() != Eigen::Success) return std::nullopt;
    const Eigen::VectorXd diag = llt.matrixL().toDenseMatrix().diagonal();
    for (Eigen::Index i = 0; i < diag.size(); ++i) {
      if (!(diag(i) > 0.0) || !std::isfinite(diag(i))) return std::nullopt;
      value -= 2.0 * std::log(diag(i));
    }
  }
  return value;
}

inline bool barrier_terms(const SdpProblem& problem, const Eigen::VectorXd& x, BarrierState& out) {
  const Eigen::Index n = problem.num_vars;
  out.value = 0.0;
  out.grad = Eigen::VectorXd::Zero(n);
  out.hess = Eigen::MatrixXd::Zero(n, n);
  std::vector<Eigen::MatrixXd> scaled;
  for (const auto& block : problem.blocks) {
    Eigen::LLT<Eigen::MatrixXd> llt(block.evaluate(x));
    if (llt.info() != Eigen::Success) return false;
    const Eigen::MatrixXd L = llt.matrixL();
    for (Eigen::Index i = 0; i < L.rows(); ++i) {
      if (!(L(i, i) > 0.0) || !std::isfinite(L(i, i))) return false;
      out.value -= 2.0 * std::log(L(i, i));
    }
    const Eigen::MatrixXd Linv =
        L.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(L.rows(), L.cols()));
    scaled.clear();
    scaled.reserve(block.terms.size());
    for (const auto& term : block.terms) {
      scaled.push_back(Linv * term.coeff * Linv.transpose());
    }
    for (std::size_t a = 0; a < block.terms.size(); ++a) {
      const Eigen::Index ka = block.terms[a].var;
      out.grad(ka) -= scaled[a].trace();
      for (std::size_t b = a; b < block.terms.size(); ++b) {
        const Eigen::Index kb = block.terms[b].var;
        const double inner = scaled[a].cwiseProduct(scaled[b]).sum();
        out.hess(ka, kb) += inner;
        if (a != b) out.hess(kb, ka) += inner;
      }
    }
  }
  return true;
}

enum class CenterOutcome { Converged, Partial, Stopped, Stalled, Budget };

/// Damped Newton minimization of t c'x + phi(x) from a strictly feasible x.
template <class StopFn>
CenterOutcome center(const SdpProblem& problem, const Eigen::VectorXd& c, Eigen::VectorXd& x,
                     double t, const SdpOptions& options, int& budget, StopFn&& stop) {
  BarrierState state;
  int steps = 0;
  while (true) {
    if (stop(x)) return CenterOutcome::Stopped;
    if (budget <= 0) return CenterOutcome::Budget;
    if (steps++ >= options.max_centering) return CenterOutcome::Partial;
    --budget;
    if (!barrier_terms(problem, x, state)) return CenterOutcome::Stalled;
    const double f = t * c.dot(x) + state.value;
    const Eigen::VectorXd g = t * c + state.grad;

    const Eigen::VectorXd d = state.hess.diagonal().cwiseMax(1e-30).cwiseSqrt();
    Eigen::MatrixXd scaled_hess = state.hess.array() / (d * d.transpose()).array();
    scaled_hess.diagonal().array() += 1e-16;
    const Eigen::VectorXd dx =
        -(scaled_hess.ldlt().solve(g.cwiseQuotient(d))).cwiseQuotient(d);
    const double lambda2 = -g.dot(dx);
    if (!std::isfinite(lambda2)) return CenterOutcome::Stalled;
    if (lambda2 / 2.0 < options.newton_tol) return CenterOutcome::Converged;

    double step = 1.0;
    while (true) {
      const Eigen::VectorXd trial = x + step * dx;
      const auto phi = barrier_value(problem, trial);
      const double f_trial = phi ? t * c.dot(trial) + *phi : 0.0;
      if (phi && f_trial <= f - 0.25 * step * lambda2) {
        x = trial;
        // Decrease lost in rounding: the iterate is as centered as it gets.
        if (lambda2 < 1e-4 && f - f_trial <= 1e-13 * std::max(1.0, std::abs(f))) {
          return CenterOutcome::Converged;
        }
        break;
      }
      step *= 0.5;
      if (step < 1e-12) return CenterOutcome::Stalled;
    }
  }
}

}  // namespace detail

/// Solves the SDP. Starts from x0 when given and strictly feasible, otherwise
/// runs phase I from x0 (or zero).
inline SdpResult solve_sdp(const SdpProblem& problem, const SdpOptions& options = {},
                           std::optional<Eigen::VectorXd> x0 = std::nullopt) {
  problem.validate();
  options.validate();
  const Eigen::Index n = problem.num_vars;
  SdpResult result;
  result.x = x0 ? *x0 : Eigen::VectorXd::Zero(n);
  if (result.x.size() != n) throw std::invalid_argument("solve_sdp: initial point size mismatch");
  int budget = options.max_newton;

  if (!(problem.min_margin(result.x) > 0.0)) {
    // Phase I: minimize s subject to F_j(x) + s I > 0 and s + 1 > 0.
    SdpProblem aux;
    aux.num_vars = n + 1;
    aux.blocks = problem.blocks;
    for (auto& block : aux.blocks) {
      block.terms.push_back({n, Eigen::MatrixXd::Identity(block.size(), block.size())});
    }
    aux.blocks.push_back({"phase1-floor", Eigen::MatrixXd::Ones(1, 1), {{n, Eigen::MatrixXd::Ones(1, 1)}}});
    aux.objective = Eigen::VectorXd::Zero(n + 1);
    aux.objective(n) = 1.0;

    Eigen::VectorXd y(n + 1);
    y.head(n) = result.x;
    y(n) = std::max(0.0, -problem.min_margin(result.x)) + 1.0;
    const auto feasible = [n](const Eigen::VectorXd& z) { return z(n) < 0.0; };
    const double m1 = static_cast<double>(aux.total_dimension());
    double t = 1.0;
    bool exhausted = false;
    for (int outer = 0; outer < options.max_outer; ++outer) {
      const auto outcome = detail::center(aux, aux.objective, y, t, options, budget, feasible);
      if (outcome == detail::CenterOutcome::Stopped) break;
      if (outcome == detail::CenterOutcome::Budget) {
        exhausted = true;
        break;
      }
      if (m1 / t < 1e-10) break;
      t *= options.barrier_growth;
    }
    result.newton_steps = options.max_newton - budget;
    result.phase1_value = y(n);
    result.x = y.head(n);
    if (!(y(n) < 0.0) || !(problem.min_margin(result.x) > 0.0)) {
      result.status = exhausted ? SdpStatus::MaxIter : SdpStatus::Infeasible;
      result.objective = problem.objective.dot(result.x);
      return result;
    }
  }

  const double m = static_cast<double>(problem.total_dimension());
  const auto never = [](const Eigen::VectorXd&) { return false; };
  double t = options.initial_barrier;
  result.status = SdpStatus::Feasible;
  int final_rounds = 0;
  for (int outer = 0; outer < options.max_outer; ++outer) {
    const auto outcome = detail::center(problem, problem.objective, result.x, t, options, budget, never);
    if (outcome == detail::CenterOutcome::Budget) {
      result.status = SdpStatus::MaxIter;
      break;
    }
    const double value = problem.objective.dot(result.x);
    if (outcome != detail::CenterOutcome::Partial &&
        m / t <= options.gap * std::max(1e-12, std::abs(value))) {
      result.status = SdpStatus::Optimal;
      break;
    }
    if (outcome == detail::CenterOutcome::Partial && m / t <= options.gap * std::max(1e-12, std::abs(value))) {
      // Finish centering at the final barrier parameter; if that keeps
      // stalling, the iterate is strictly feasible but not certified optimal.
      if (++final_rounds > 4) break;
      continue;
    }
    t *= options.barrier_growth;
  }
  result.objective = problem.objective.dot(result.x);
  result.newton_steps = options.max_newton - budget;
  result.barrier = t;
  return result;
}

}  // namespace lpvguide
