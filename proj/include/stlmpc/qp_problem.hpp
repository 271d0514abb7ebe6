#pragma once

#include "stlmpc/predicate_table.hpp"
#include "stlmpc/time_grid.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string_view>
#include <vector>

namespace stlmpc {

enum class RowKind : std::uint8_t {
  stl,           // predicate value pinned nonnegative: z_p(time) >= margin
  epigraph,      // u_x(eval_time) <= averaged robustness of one conjunct
  input_bound,   // box bound on one input entry
  input_linear,  // user supplied linear constraint over the stacked inputs
  slack_bound,   // zeta_p >= 0
  sr_margin,     // t <= z_p(time) in the min-max baseline
};

struct RowTag {
  RowKind kind = RowKind::stl;
  PredicateId pred = 0;
  Step time = 0;       // sample the row refers to
  Step eval_time = 0;  // evaluation step k' for epigraph rows
};

// Decision vector layout: [u(k0) .. u(k0+N-1) | u_x | zeta].
struct DecisionLayout {
  Eigen::Index input_dim = 0;
  Eigen::Index inputs = 0;
  Eigen::Index epigraph = 0;
  Eigen::Index slacks = 0;

  [[nodiscard]] Eigen::Index epigraph_offset() const noexcept { return inputs; }
  [[nodiscard]] Eigen::Index slack_offset() const noexcept { return inputs + epigraph; }
  [[nodiscard]] Eigen::Index size() const noexcept { return inputs + epigraph + slacks; }
};

// minimize 0.5 x'Px + q'x + constant  subject to  lower <= A x <= upper.
// Problems from the builder are negated maximizations, so -objective is the
// robustness-minus-penalty value being maximized.
struct QpProblem {
  Eigen::MatrixXd P;
  Eigen::VectorXd q;
  double constant = 0.0;
  Eigen::MatrixXd A;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  DecisionLayout layout;
  std::vector<RowTag> rows;
  // Column of A that a slack on predicate p receives (slack_columns.col(p)) and
  // the slack's share of the cost before the penalty weight. Both encode the
  // substitution z -> z + zeta in constraints and cost.
  Eigen::MatrixXd slack_columns;
  Eigen::VectorXd slack_cost;
  std::size_t branch = 0;

  [[nodiscard]] Eigen::Index variables() const noexcept { return q.size(); }
  [[nodiscard]] Eigen::Index constraints() const noexcept { return A.rows(); }

  // Throws std::invalid_argument on inconsistent sizes.
  void validate() const;
};

enum class SolveStatus : std::uint8_t { optimal, relaxed, infeasible, dual_infeasible, iteration_limit };

[[nodiscard]] std::string_view to_string(SolveStatus s) noexcept;

struct QpSolution {
  SolveStatus status = SolveStatus::iteration_limit;
  Eigen::VectorXd x;
  // Multipliers: y_i > 0 at an active upper bound, y_i < 0 at an active lower bound.
  Eigen::VectorXd y;
  double objective = 0.0;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  bool polished = false;
  DecisionLayout layout;

  [[nodiscard]] Eigen::VectorXd inputs() const { return x.head(layout.inputs); }
  [[nodiscard]] Eigen::VectorXd epigraph() const { return x.segment(layout.epigraph_offset(), layout.epigraph); }
  [[nodiscard]] Eigen::VectorXd slacks() const { return x.segment(layout.slack_offset(), layout.slacks); }
  [[nodiscard]] bool solved() const noexcept {
    return status == SolveStatus::optimal || status == SolveStatus::relaxed;
  }
};

}  // namespace stlmpc
