#pragma once

#include "stlmpc/formula.hpp"
#include "stlmpc/lti_system.hpp"
#include "stlmpc/predicate_table.hpp"
#include "stlmpc/qp_problem.hpp"
#include "stlmpc/scheduler.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace stlmpc {

class UnsupportedFormulaForBaseline : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// z_st = H1 x(k0) + H2 u_st + offset, stacking z(k0+1) .. z(k0+N).
struct StackedDynamics {
  Eigen::MatrixXd H1;
  Eigen::MatrixXd H2;
  Eigen::VectorXd offset;
  int horizon = 0;
  Eigen::Index input_dim = 0;

  [[nodiscard]] Eigen::VectorXd predict(const Eigen::VectorXd& x0, const Eigen::VectorXd& u_st) const {
    return H1 * x0 + H2 * u_st + offset;
  }
};

StackedDynamics stack_dynamics(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& C,
                               const Eigen::VectorXd& c, int N);

// Column layout of z_all: predicate p at step t is column (t - first) * predicates + p.
struct ZLayout {
  Step first = 0;
  Step last = -1;
  Eigen::Index predicates = 0;

  [[nodiscard]] bool covers(Step t) const noexcept { return t >= first && t <= last; }
  [[nodiscard]] Eigen::Index column(Step t, PredicateId p) const;
  [[nodiscard]] Eigen::Index size() const noexcept { return (last - first + 1) * predicates; }
};

// One psi conjunct of a disjunctive branch, with its operator index in the
// schedule when it is an eventually or until node.
struct PsiTerm {
  Formula psi;
  std::optional<std::size_t> op;
};

// Cost rows of a psi: row r is the averaged robustness at evaluation step
// rows.first + r as a linear form over z_all.
Eigen::MatrixXd build_E(const PsiTerm& term, const Schedule* schedule, const ZLayout& layout, StepRange rows,
                        const SamplingGrid& grid);

// Worked-example forms on the window k_l = k0 - h_d + 1 .. k0 + N. Until uses two
// interleaved predicates (left 0, right 1); eventually and always use one.
// k1 and windows are indexed by the evaluation step i_k.
Eigen::MatrixXd build_E_until(int N, Step h_d, Step k0, const std::function<Step(Step)>& k1);
Eigen::MatrixXd build_E_eventually(int N, Step h_d, Step k0, const std::function<Step(Step)>& k1);
Eigen::MatrixXd build_E_always(int N, Step h_d, Step k0, const std::function<StepRange(Step)>& window);

struct ConstraintMatrix {
  Eigen::MatrixXd R;         // rows select single z_all entries
  std::vector<RowTag> tags;  // (predicate, time) of each row
};

// Inequalities R z_all >= 0 that make every psi of the conjunction hold at every
// evaluation step; duplicates removed, ordered by (time, predicate).
ConstraintMatrix build_R(const std::vector<PsiTerm>& conjunction, const Schedule* schedule, const ZLayout& layout,
                         StepRange rows, const SamplingGrid& grid);
// theta must be a psi or a conjunction of psi; operator indices follow theta's pre-order.
ConstraintMatrix build_R(const Formula& theta, const Schedule* schedule, const ZLayout& layout, StepRange rows,
                         const SamplingGrid& grid);

// Specification prepared for the builder: PNF, schedule and disjunctive branches.
struct CompiledSpec {
  Formula phi;
  PredicateTable table;
  SamplingGrid grid;
  Step horizon = 0;  // h_d of theta
  bool all_time = false;
  Step event_step = 0;
  std::optional<Schedule> schedule;
  std::vector<std::vector<PsiTerm>> branches;

  [[nodiscard]] const Formula& theta() const noexcept { return phi.child(); }
};

// Accepts G[0,inf] theta or event => theta; a bare predicate body is read as G[0,0].
CompiledSpec compile_spec(const Formula& phi, PredicateTable table, const SamplingGrid& grid);

struct LinearInputConstraint {
  Eigen::RowVectorXd coefficients;  // over the stacked inputs u_st
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
};

struct InputConstraints {
  Eigen::VectorXd lower;  // per input entry; empty means unbounded
  Eigen::VectorXd upper;
  std::vector<LinearInputConstraint> linear;
};

struct BuilderConfig {
  int horizon = 0;               // N
  Eigen::MatrixXd input_weight;  // M; empty means zero
  InputConstraints inputs;
  // Future predicate rows require z >= margin so that solver tolerance cannot
  // turn a boundary value into a violation.
  double constraint_margin = 1e-7;
  // Recorded samples that already violate a row cannot be repaired. keep makes
  // the problem infeasible (so slack relaxation takes over); drop leaves them out.
  enum class PastViolations : std::uint8_t { keep, drop };
  PastViolations past_violations = PastViolations::keep;
};

// Evaluation steps and prediction of z_all at decision time `now`.
struct StageModel {
  Step now = 0;
  StepRange rows;
  ZLayout layout;
  Eigen::VectorXd known;      // z_all with u_st = 0
  Eigen::MatrixXd influence;  // d z_all / d u_st
};

// history holds x(0) .. x(now).
StageModel stage_model(const CompiledSpec& spec, const LtiSystem& system, const BuilderConfig& config, Step now,
                       std::span<const Eigen::VectorXd> history);

// One problem per disjunctive branch.
std::vector<QpProblem> build_problem(const CompiledSpec& spec, const LtiSystem& system, const BuilderConfig& config,
                                     const StageModel& stage);

QpProblem add_slack_relaxation(const QpProblem& p, double weight);

// 10^3 * (max |c| + max row norm of C * state scale).
double default_slack_weight(const PredicateTable& table, double state_scale);

// max t - u'(I (x) M)u  s.t.  t <= z_p(t') at every influential sample, plus input
// constraints. Needs a conjunction of always-over-predicate terms. min_margin adds t >= min_margin.
QpProblem build_sr_baseline(const CompiledSpec& spec, const LtiSystem& system, const BuilderConfig& config,
                            const StageModel& stage, std::optional<double> min_margin = {});

// Plain-text dump of a problem for golden files and debugging.
std::string dump(const QpProblem& p);

}  // namespace stlmpc
