#include "stlmpc/formula.hpp"

#include "stlmpc/number_format.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace stlmpc {

namespace {

void check_interval(double a, double b) {
  if (!(a >= 0.0) || !(b >= a) || !std::isfinite(b)) {
    throw FormulaError("temporal interval must satisfy 0 <= a <= b < inf, got [" + shortest_repr(a) +
                       ", " + shortest_repr(b) + "]");
  }
}

Formula make(Op op, std::vector<Formula> children) {
  Formula f;
  f.op = op;
  f.children = std::move(children);
  return f;
}

Formula make_temporal(Op op, std::vector<Formula> children, double a, double b) {
  check_interval(a, b);
  Formula f = make(op, std::move(children));
  f.interval = {a, b};
  return f;
}

const char* op_name(Op op) {
  switch (op) {
    case Op::top: return "true";
    case Op::pred: return "predicate";
    case Op::neg_pred: return "negated predicate";
    case Op::negation: return "negation";
    case Op::conj: return "conjunction";
    case Op::disj: return "disjunction";
    case Op::until: return "until";
    case Op::eventually: return "eventually";
    case Op::always: return "always";
    case Op::all_time: return "all-time wrapper";
    case Op::one_time: return "one-time wrapper";
  }
  return "?";
}

}  // namespace

Formula Formula::top() { return make(Op::top, {}); }

Formula Formula::predicate(PredicateId id) {
  Formula f = make(Op::pred, {});
  f.pred = id;
  return f;
}

Formula Formula::negated_predicate(PredicateId id) {
  Formula f = make(Op::neg_pred, {});
  f.pred = id;
  return f;
}

Formula Formula::negation(Formula f) { return make(Op::negation, {std::move(f)}); }

Formula Formula::conjunction(std::vector<Formula> fs) {
  if (fs.size() < 2) throw FormulaError("conjunction needs at least two operands");
  return make(Op::conj, std::move(fs));
}

Formula Formula::disjunction(std::vector<Formula> fs) {
  if (fs.size() < 2) throw FormulaError("disjunction needs at least two operands");
  return make(Op::disj, std::move(fs));
}

Formula Formula::until(Formula left, Formula right, double a, double b) {
  return make_temporal(Op::until, {std::move(left), std::move(right)}, a, b);
}

Formula Formula::eventually(Formula f, double a, double b) {
  return make_temporal(Op::eventually, {std::move(f)}, a, b);
}

Formula Formula::always(Formula f, double a, double b) {
  return make_temporal(Op::always, {std::move(f)}, a, b);
}

Formula Formula::all_time(Formula theta) { return make(Op::all_time, {std::move(theta)}); }

Formula Formula::one_time(Formula theta, double event_time) {
  if (!(event_time >= 0.0) || !std::isfinite(event_time)) {
    throw FormulaError("event time must be finite and nonnegative");
  }
  Formula f = make(Op::one_time, {std::move(theta)});
  f.event_time = event_time;
  return f;
}

bool is_gamma(const Formula& f) noexcept {
  return f.op == Op::top || f.op == Op::pred || f.op == Op::neg_pred;
}

bool is_psi(const Formula& f) noexcept {
  if (!f.is_temporal()) return false;
  return std::all_of(f.children.begin(), f.children.end(), [](const Formula& c) { return is_gamma(c); });
}

bool is_theta(const Formula& f) noexcept {
  if (f.op == Op::conj || f.op == Op::disj) {
    return std::all_of(f.children.begin(), f.children.end(), [](const Formula& c) { return is_theta(c); });
  }
  return is_psi(f);
}

bool is_phi(const Formula& f) noexcept { return f.is_wrapper() && is_theta(f.child()); }

void validate_fragment(const Formula& f) {
  const Formula& b = body(f);
  if (is_theta(b) || is_gamma(b)) return;

  // Find the first node that breaks the class rules, for a useful message.
  auto offending = [](const Formula& n, auto&& self) -> const Formula* {
    if (n.op == Op::conj || n.op == Op::disj) {
      for (const auto& c : n.children) {
        if (const Formula* bad = self(c, self)) return bad;
      }
      return nullptr;
    }
    if (n.is_temporal()) {
      for (const auto& c : n.children) {
        if (!is_gamma(c)) return &c;
      }
      return nullptr;
    }
    return &n;
  };
  const Formula* bad = offending(b, offending);
  throw FormulaError(std::string("formula outside the supported fragment: unexpected ") +
                     op_name(bad ? bad->op : b.op) +
                     (bad && bad->is_wrapper() ? " below the root" : " at this position"));
}

void validate_windows(const Formula& f, const SamplingGrid& grid) {
  if (f.is_temporal() && omega_range(f.interval.a, f.interval.b, grid).empty()) {
    throw FormulaError("interval [" + shortest_repr(f.interval.a) + ", " + shortest_repr(f.interval.b) +
                       "] contains no sample for period " + shortest_repr(grid.period));
  }
  if (f.op == Op::one_time && omega_range(f.event_time, f.event_time, grid).empty()) {
    throw FormulaError("event time " + shortest_repr(f.event_time) + " is not a sample time for period " +
                       shortest_repr(grid.period));
  }
  for (const auto& c : f.children) validate_windows(c, grid);
}

const Formula& body(const Formula& f) noexcept { return f.is_wrapper() ? f.children.front() : f; }

double continuous_length(const Formula& f) {
  switch (f.op) {
    case Op::top:
    case Op::pred:
    case Op::neg_pred:
      return 0.0;
    case Op::negation:
      return continuous_length(f.child());
    case Op::conj:
    case Op::disj: {
      double h = 0.0;
      for (const auto& c : f.children) h = std::max(h, continuous_length(c));
      return h;
    }
    case Op::until:
    case Op::eventually:
    case Op::always: {
      double h = 0.0;
      for (const auto& c : f.children) h = std::max(h, continuous_length(c));
      return f.interval.b + h;
    }
    case Op::all_time:
    case Op::one_time:
      break;
  }
  throw FormulaError("formula length is defined for the bounded body only, not a root wrapper");
}

Step discrete_length(const Formula& f, const SamplingGrid& grid) {
  return omega_range(0.0, continuous_length(f), grid).last;
}

namespace {

Formula pnf(const Formula& f, bool negate, PredicateTable& table) {
  auto map_children = [&](bool neg) {
    std::vector<Formula> out;
    out.reserve(f.children.size());
    for (const auto& c : f.children) out.push_back(pnf(c, neg, table));
    return out;
  };
  switch (f.op) {
    case Op::top:
      if (negate) throw FormulaError("negated true has no positive normal form in the fragment");
      return f;
    case Op::pred:
      return negate ? Formula::predicate(table.negation_of(f.pred)) : f;
    case Op::neg_pred:
      return negate ? Formula::predicate(f.pred) : Formula::predicate(table.negation_of(f.pred));
    case Op::negation:
      return pnf(f.child(), !negate, table);
    case Op::conj:
      return negate ? Formula::disjunction(map_children(true)) : Formula::conjunction(map_children(false));
    case Op::disj:
      return negate ? Formula::conjunction(map_children(true)) : Formula::disjunction(map_children(false));
    case Op::eventually:
      return negate ? Formula::always(pnf(f.child(), true, table), f.interval.a, f.interval.b)
                    : Formula::eventually(pnf(f.child(), false, table), f.interval.a, f.interval.b);
    case Op::always:
      return negate ? Formula::eventually(pnf(f.child(), true, table), f.interval.a, f.interval.b)
                    : Formula::always(pnf(f.child(), false, table), f.interval.a, f.interval.b);
    case Op::until:
      if (negate) throw FormulaError("negated until needs a release operator, which the fragment lacks");
      return Formula::until(pnf(f.child(0), false, table), pnf(f.child(1), false, table), f.interval.a,
                            f.interval.b);
    case Op::all_time:
      if (negate) throw FormulaError("negated all-time wrapper is outside the fragment");
      return Formula::all_time(pnf(f.child(), false, table));
    case Op::one_time:
      return Formula::one_time(pnf(f.child(), negate, table), f.event_time);
  }
  return f;
}

}  // namespace

Formula to_pnf(const Formula& f, PredicateTable& table) { return pnf(f, false, table); }

bool is_pnf(const Formula& f) noexcept {
  if (f.op == Op::negation || f.op == Op::neg_pred) return false;
  return std::all_of(f.children.begin(), f.children.end(), [](const Formula& c) { return is_pnf(c); });
}

std::vector<const Formula*> event_nodes(const Formula& f) {
  std::vector<const Formula*> out;
  auto visit = [&out](const Formula& n, auto&& self) -> void {
    if (n.op == Op::eventually || n.op == Op::until) out.push_back(&n);
    for (const auto& c : n.children) self(c, self);
  };
  visit(f, visit);
  return out;
}

std::vector<Interval> collect_event_ops(const Formula& theta) {
  std::vector<Interval> out;
  for (const Formula* n : event_nodes(theta)) out.push_back(n->interval);
  return out;
}

std::vector<PredicateId> referenced_predicates(const Formula& f) {
  std::set<PredicateId> ids;
  auto visit = [&ids](const Formula& n, auto&& self) -> void {
    if (n.op == Op::pred || n.op == Op::neg_pred) ids.insert(n.pred);
    for (const auto& c : n.children) self(c, self);
  };
  visit(f, visit);
  return {ids.begin(), ids.end()};
}

namespace {

std::string interval_text(const Interval& i) {
  return "[" + shortest_repr(i.a) + "," + shortest_repr(i.b) + "]";
}

std::string print(const Formula& f, const PredicateTable& table);

std::string operand(const Formula& f, const PredicateTable& table) {
  switch (f.op) {
    case Op::top:
    case Op::pred:
    case Op::neg_pred:
    case Op::negation:
    case Op::eventually:
    case Op::always:
      return print(f, table);
    default:
      return "(" + print(f, table) + ")";
  }
}

std::string join(const Formula& f, const PredicateTable& table, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < f.children.size(); ++i) {
    if (i) out += sep;
    out += operand(f.children[i], table);
  }
  return out;
}

std::string print(const Formula& f, const PredicateTable& table) {
  switch (f.op) {
    case Op::top: return "true";
    case Op::pred: return describe_predicate(table.normal(f.pred), table.offset(f.pred));
    case Op::neg_pred: return "!(" + describe_predicate(table.normal(f.pred), table.offset(f.pred)) + ")";
    case Op::negation: return "!(" + print(f.child(), table) + ")";
    case Op::conj: return join(f, table, " & ");
    case Op::disj: return join(f, table, " | ");
    case Op::until:
      return "(" + print(f.child(0), table) + ") U" + interval_text(f.interval) + " (" +
             print(f.child(1), table) + ")";
    case Op::eventually: return "F" + interval_text(f.interval) + "(" + print(f.child(), table) + ")";
    case Op::always: return "G" + interval_text(f.interval) + "(" + print(f.child(), table) + ")";
    case Op::all_time: return "G[0,inf](" + print(f.child(), table) + ")";
    case Op::one_time: return "event@" + shortest_repr(f.event_time) + " => " + print(f.child(), table);
  }
  return {};
}

}  // namespace

std::string to_string(const Formula& f, const PredicateTable& table) { return print(f, table); }

}  // namespace stlmpc
