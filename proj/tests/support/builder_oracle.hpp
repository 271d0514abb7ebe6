#pragma once

// Roll-outs and semantic sums used to check the QP construction against the
// semantics module.

#include "stlmpc/qp_builder.hpp"
#include "stlmpc/semantics.hpp"
#include "support/generators.hpp"

#include <optional>
#include <vector>

namespace stlmpc::gen {

// Recorded history x(0..now) followed by the noise-free response to u_st.
inline Signal rollout(const LtiSystem& sys, const std::vector<Eigen::VectorXd>& history, const Eigen::VectorXd& u_st) {
  Signal s{history, sys.grid};
  const Eigen::Index m = sys.input_dim();
  for (Eigen::Index j = 0; j * m < u_st.size(); ++j) s.states.push_back(sys.step(s.states.back(), u_st.segment(j * m, m)));
  return s;
}

inline WitnessFn term_witness(const CompiledSpec& spec, const PsiTerm& term) {
  return [&spec, &term](std::size_t, Step k) { return spec.schedule->k1_at(*term.op, k); };
}

// Sum over the stage's evaluation steps of the term's scheduled robustness.
inline double dsasr_sum(const CompiledSpec& spec, const StageModel& stage, const PsiTerm& term, const Signal& sig) {
  const PredicateTrace z = PredicateTrace::of(sig, spec.table);
  double total = 0.0;
  for (Step k = stage.rows.first; k <= stage.rows.last; ++k) total += eval_dsasr(z, k, term.psi, term_witness(spec, term));
  return total;
}

inline double dsasr_at(const CompiledSpec& spec, const PsiTerm& term, const Signal& sig, Step k) {
  return eval_dsasr(PredicateTrace::of(sig, spec.table), k, term.psi, term_witness(spec, term));
}

// Value of the maximized objective at decision vector x.
inline double maximized_value(const QpProblem& p, const Eigen::VectorXd& x) {
  return -(0.5 * x.dot(p.P * x) + p.q.dot(x) + p.constant);
}

inline LtiSystem random_system(Rng& rng, Eigen::Index n, Eigen::Index m) {
  LtiSystem sys;
  sys.A = Eigen::MatrixXd(n, n);
  sys.B = Eigen::MatrixXd(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) sys.A(i, j) = uniform_real(rng, -0.4, 0.4) + (i == j ? 0.5 : 0.0);
    for (Eigen::Index j = 0; j < m; ++j) sys.B(i, j) = uniform_real(rng, -1.0, 1.0) + (i == j ? 1.0 : 0.0);
  }
  sys.x0 = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) sys.x0(i) = uniform_real(rng, -1.0, 1.0);
  sys.grid = SamplingGrid(1.0);
  return sys;
}

// All-time spec over a random theta; nullopt when the formula has no feasible schedule.
inline std::optional<CompiledSpec> random_spec(Rng& rng, const FormulaShape& shape, bool single_psi) {
  PredicateTable table(shape.state_dim);
  Formula theta = single_psi ? random_psi(rng, table, shape) : random_theta(rng, table, shape);
  try {
    return compile_spec(Formula::all_time(std::move(theta)), std::move(table), SamplingGrid(shape.period));
  } catch (const InfeasibleSchedule&) {
    return std::nullopt;
  } catch (const FormulaError&) {
    return std::nullopt;
  }
}

}  // namespace stlmpc::gen
