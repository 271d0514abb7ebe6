#pragma once

#include "stlmpc/formula.hpp"
#include "stlmpc/predicate_table.hpp"
#include "stlmpc/scheduler.hpp"
#include "stlmpc/time_grid.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

namespace stlmpc {

struct Signal {
  std::vector<Eigen::VectorXd> states;  // x(0) .. x(K)
  SamplingGrid grid;

  [[nodiscard]] Step last() const noexcept { return static_cast<Step>(states.size()) - 1; }
};

class SignalTooShort : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Predicate values z_p(k), one row per predicate and one column per step.
// All evaluators work on this view so tests can perturb predicates directly.
class PredicateTrace {
 public:
  PredicateTrace(Eigen::MatrixXd values, SamplingGrid grid);
  static PredicateTrace of(const Signal& sig, const PredicateTable& table);

  [[nodiscard]] double operator()(PredicateId p, Step k) const {
    return values_(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(k));
  }
  [[nodiscard]] Step last() const noexcept { return values_.cols() - 1; }
  [[nodiscard]] std::size_t predicates() const noexcept { return static_cast<std::size_t>(values_.rows()); }
  [[nodiscard]] const SamplingGrid& grid() const noexcept { return grid_; }
  [[nodiscard]] const Eigen::MatrixXd& values() const noexcept { return values_; }

  // Every sample of predicate p raised by shift(p).
  [[nodiscard]] PredicateTrace shifted(const Eigen::VectorXd& shift) const;

 private:
  Eigen::MatrixXd values_;
  SamplingGrid grid_;
};

// Witness step for eventually/until operator `op` (pre-order index) evaluated at step k.
using WitnessFn = std::function<Step(std::size_t op, Step k)>;
WitnessFn witnesses_of(const Schedule& schedule);

// Each evaluator checks that the trace covers the formula horizon from k.
// Wrappers: G[0,inf] aggregates theta over every step k' >= k whose window the
// trace covers (all / min / mean); event-at-t evaluates theta at the event step.
[[nodiscard]] bool eval_bool(const PredicateTrace& z, Step k, const Formula& f);
[[nodiscard]] double eval_sr(const PredicateTrace& z, Step k, const Formula& f);
[[nodiscard]] double eval_dasr(const PredicateTrace& z, Step k, const Formula& f);
[[nodiscard]] double eval_dsasr(const PredicateTrace& z, Step k, const Formula& f, const WitnessFn& k1);

[[nodiscard]] bool eval_bool(const Signal& sig, Step k, const Formula& f, const PredicateTable& table);
[[nodiscard]] double eval_sr(const Signal& sig, Step k, const Formula& f, const PredicateTable& table);
[[nodiscard]] double eval_dasr(const Signal& sig, Step k, const Formula& f, const PredicateTable& table);
[[nodiscard]] double eval_dsasr(const Signal& sig, Step k, const Formula& f, const PredicateTable& table,
                                const Schedule& schedule);

// Steps k' >= k at which an all-time formula's body can be checked on a trace ending at `last`.
[[nodiscard]] StepRange checkable_steps(const Formula& all_time, Step k, Step last, const SamplingGrid& grid);

// Steps at which predicate `pred` can change the verdict of f at step k. `last`
// bounds the evaluation steps of an all-time wrapper and is required for it.
[[nodiscard]] std::vector<Step> domain_of_influence(const Formula& f, Step k, PredicateId pred,
                                                    const SamplingGrid& grid, std::optional<Step> last = {});

// Sum of predicate values over their domains of influence, keeping positive
// values when f holds at k and negative values otherwise.
[[nodiscard]] double prd(const PredicateTrace& z, const Formula& f, Step k);
[[nodiscard]] double prd(const Signal& sig, const Formula& f, Step k, const PredicateTable& table);

class UnsupportedFormula : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Sup-metric distance to the boundary of the satisfying set, signed positive when
// satisfied. Only conjunctions of always-over-predicate terms with rows +-e_j.
[[nodiscard]] double robustness_degree_axis(const Signal& sig, const Formula& f, Step k,
                                            const PredicateTable& table);

struct RobustnessReadout {
  bool satisfied = false;
  std::optional<double> sr;
  std::optional<double> dasr;
  std::optional<double> dsasr;
  std::optional<double> prd;
  std::optional<double> rd;
};

// All readouts that apply to f; dsasr needs a schedule when f has eventually/until nodes.
[[nodiscard]] RobustnessReadout readout(const Signal& sig, Step k, const Formula& f, const PredicateTable& table,
                                        const Schedule* schedule);

}  // namespace stlmpc
