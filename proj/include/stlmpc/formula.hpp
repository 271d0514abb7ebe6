#pragma once

#include "stlmpc/predicate_table.hpp"
#include "stlmpc/time_grid.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace stlmpc {

enum class Op : std::uint8_t {
  top,
  pred,
  neg_pred,
  negation,  // general negation; absent from fragment formulas and from PNF output
  conj,
  disj,
  until,
  eventually,
  always,
  all_time,  // G[0,inf] theta, root only
  one_time,  // event => theta, root only
};

struct Interval {
  double a = 0.0;
  double b = 0.0;
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct Formula {
  Op op = Op::top;
  PredicateId pred = 0;
  Interval interval{};
  double event_time = 0.0;
  std::vector<Formula> children;

  static Formula top();
  static Formula predicate(PredicateId id);
  static Formula negated_predicate(PredicateId id);
  static Formula negation(Formula f);
  static Formula conjunction(std::vector<Formula> fs);
  static Formula disjunction(std::vector<Formula> fs);
  static Formula until(Formula left, Formula right, double a, double b);
  static Formula eventually(Formula f, double a, double b);
  static Formula always(Formula f, double a, double b);
  static Formula all_time(Formula theta);
  static Formula one_time(Formula theta, double event_time);

  [[nodiscard]] bool is_temporal() const noexcept {
    return op == Op::until || op == Op::eventually || op == Op::always;
  }
  [[nodiscard]] bool is_wrapper() const noexcept { return op == Op::all_time || op == Op::one_time; }
  [[nodiscard]] const Formula& child(std::size_t i = 0) const { return children.at(i); }

  friend bool operator==(const Formula&, const Formula&) = default;
};

class FormulaError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Fragment classes: gamma = T | mu | !mu, psi = gamma U gamma | F gamma | G gamma,
// theta = psi | theta & theta | theta | theta, phi = G[0,inf] theta | event => theta.
[[nodiscard]] bool is_gamma(const Formula& f) noexcept;
[[nodiscard]] bool is_psi(const Formula& f) noexcept;
[[nodiscard]] bool is_theta(const Formula& f) noexcept;
[[nodiscard]] bool is_phi(const Formula& f) noexcept;

// Throws FormulaError naming the offending node when f is neither phi, theta nor gamma.
void validate_fragment(const Formula& f);
// Throws FormulaError when some temporal window contains no sample on the grid.
void validate_windows(const Formula& f, const SamplingGrid& grid);

// theta of a wrapped formula; f itself otherwise.
[[nodiscard]] const Formula& body(const Formula& f) noexcept;

[[nodiscard]] double continuous_length(const Formula& f);
[[nodiscard]] Step discrete_length(const Formula& f, const SamplingGrid& grid);

// Pushes negation onto predicates and turns each negated predicate into a fresh
// predicate -f(x) >= 0 registered in the table.
[[nodiscard]] Formula to_pnf(const Formula& f, PredicateTable& table);
[[nodiscard]] bool is_pnf(const Formula& f) noexcept;

// Eventually and Until nodes in pre-order, which is the order schedules index them by.
[[nodiscard]] std::vector<const Formula*> event_nodes(const Formula& f);
[[nodiscard]] std::vector<Interval> collect_event_ops(const Formula& theta);

// Ascending, unique.
[[nodiscard]] std::vector<PredicateId> referenced_predicates(const Formula& f);

// Concrete syntax accepted by parse().
[[nodiscard]] std::string to_string(const Formula& f, const PredicateTable& table);

}  // namespace stlmpc
