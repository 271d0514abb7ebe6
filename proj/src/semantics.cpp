#include "stlmpc/semantics.hpp"

#include "stlmpc/number_format.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <unordered_map>

namespace stlmpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Step event_step(const Formula& one_time, const SamplingGrid& grid) {
  const StepRange r = omega_range(one_time.event_time, one_time.event_time, grid);
  if (r.empty()) {
    throw FormulaError("event time " + shortest_repr(one_time.event_time) + " is not a sample time");
  }
  return r.first;
}

void require_horizon(const PredicateTrace& z, Step k, const Formula& f) {
  if (k < 0) throw SignalTooShort("evaluation step must be nonnegative");
  Step need = 0;
  Step at = k;
  if (f.op == Op::all_time) {
    if (checkable_steps(f, k, z.last(), z.grid()).empty()) {
      throw SignalTooShort("trace too short to check the all-time formula at step " + std::to_string(k));
    }
    return;
  }
  if (f.op == Op::one_time) {
    at = event_step(f, z.grid());
    need = discrete_length(f.child(), z.grid());
  } else {
    need = discrete_length(f, z.grid());
  }
  if (at + need > z.last()) {
    throw SignalTooShort("formula needs samples up to step " + std::to_string(at + need) + ", trace ends at " +
                         std::to_string(z.last()));
  }
}

StepRange window(const Formula& f, Step k, const SamplingGrid& grid) {
  return window_at(k, f.interval.a, f.interval.b, grid);
}

bool holds(const PredicateTrace& z, Step k, const Formula& f) {
  switch (f.op) {
    case Op::top: return true;
    case Op::pred: return z(f.pred, k) >= 0.0;
    case Op::neg_pred: return z(f.pred, k) < 0.0;
    case Op::negation: return !holds(z, k, f.child());
    case Op::conj:
      return std::all_of(f.children.begin(), f.children.end(), [&](const Formula& c) { return holds(z, k, c); });
    case Op::disj:
      return std::any_of(f.children.begin(), f.children.end(), [&](const Formula& c) { return holds(z, k, c); });
    case Op::eventually: {
      const StepRange w = window(f, k, z.grid());
      for (Step k1 = w.first; k1 <= w.last; ++k1) {
        if (holds(z, k1, f.child())) return true;
      }
      return false;
    }
    case Op::always: {
      const StepRange w = window(f, k, z.grid());
      for (Step k1 = w.first; k1 <= w.last; ++k1) {
        if (!holds(z, k1, f.child())) return false;
      }
      return true;
    }
    case Op::until: {
      const StepRange w = window(f, k, z.grid());
      // Left operand must hold on [k, k1]; track the first step where it fails.
      Step left_ok_until = k - 1;
      while (left_ok_until < w.last && holds(z, left_ok_until + 1, f.child(0))) ++left_ok_until;
      for (Step k1 = w.first; k1 <= std::min(w.last, left_ok_until); ++k1) {
        if (holds(z, k1, f.child(1))) return true;
      }
      return false;
    }
    case Op::all_time: {
      const StepRange r = checkable_steps(f, k, z.last(), z.grid());
      for (Step q = r.first; q <= r.last; ++q) {
        if (!holds(z, q, f.child())) return false;
      }
      return true;
    }
    case Op::one_time: return holds(z, event_step(f, z.grid()), f.child());
  }
  return false;
}

enum class Mode { sr, dasr, dsasr };

class Quantitative {
 public:
  Quantitative(const PredicateTrace& z, Mode mode, const Formula& root, const WitnessFn* k1)
      : z_(z), mode_(mode), k1_(k1) {
    if (mode == Mode::dsasr) {
      const auto nodes = event_nodes(root);
      for (std::size_t i = 0; i < nodes.size(); ++i) ops_.emplace(nodes[i], i);
    }
  }

  double eval(const Formula& f, Step k) const {
    switch (f.op) {
      case Op::top: return kInf;
      case Op::pred: return z_(f.pred, k);
      case Op::neg_pred: return -z_(f.pred, k);
      case Op::negation: return -eval(f.child(), k);
      case Op::conj: {
        double v = kInf;
        for (const auto& c : f.children) v = std::min(v, eval(c, k));
        return v;
      }
      case Op::disj: {
        double v = -kInf;
        for (const auto& c : f.children) v = std::max(v, eval(c, k));
        return v;
      }
      case Op::eventually: return eventually(f, k);
      case Op::always: return always(f, k);
      case Op::until: return until(f, k);
      case Op::all_time: {
        const StepRange r = checkable_steps(f, k, z_.last(), z_.grid());
        double agg = mode_ == Mode::sr ? kInf : 0.0;
        for (Step q = r.first; q <= r.last; ++q) {
          const double v = eval(f.child(), q);
          agg = mode_ == Mode::sr ? std::min(agg, v) : agg + v;
        }
        return mode_ == Mode::sr ? agg : agg / static_cast<double>(r.size());
      }
      case Op::one_time: return eval(f.child(), event_step(f, z_.grid()));
    }
    return 0.0;
  }

 private:
  Step scheduled(const Formula& f, Step k, const StepRange& w) const {
    const Step k1 = (*k1_)(ops_.at(&f), k);
    if (!w.contains(k1)) {
      throw std::invalid_argument("scheduled witness " + std::to_string(k1) + " outside window [" +
                                  std::to_string(w.first) + ", " + std::to_string(w.last) + "] at step " +
                                  std::to_string(k));
    }
    return k1;
  }

  double eventually(const Formula& f, Step k) const {
    const StepRange w = window(f, k, z_.grid());
    if (mode_ == Mode::dsasr) return eval(f.child(), scheduled(f, k, w));
    double v = -kInf;
    for (Step k1 = w.first; k1 <= w.last; ++k1) v = std::max(v, eval(f.child(), k1));
    return v;
  }

  double always(const Formula& f, Step k) const {
    const StepRange w = window(f, k, z_.grid());
    if (mode_ == Mode::sr) {
      double v = kInf;
      for (Step k1 = w.first; k1 <= w.last; ++k1) v = std::min(v, eval(f.child(), k1));
      return v;
    }
    double sum = 0.0;
    for (Step k1 = w.first; k1 <= w.last; ++k1) sum += eval(f.child(), k1);
    return sum / static_cast<double>(w.size());
  }

  double until(const Formula& f, Step k) const {
    const StepRange w = window(f, k, z_.grid());
    const Formula& left = f.child(0);
    const Formula& right = f.child(1);
    if (mode_ == Mode::sr) {
      double best = -kInf;
      double running_min = kInf;
      for (Step k2 = k; k2 <= w.last; ++k2) {
        running_min = std::min(running_min, eval(left, k2));
        if (k2 >= w.first) best = std::max(best, std::min(running_min, eval(right, k2)));
      }
      return best;
    }
    // True on the left reduces until to eventually in the averaged semantics.
    if (left.op == Op::top) {
      if (mode_ == Mode::dsasr) return eval(right, scheduled(f, k, w));
      double v = -kInf;
      for (Step k1 = w.first; k1 <= w.last; ++k1) v = std::max(v, eval(right, k1));
      return v;
    }
    auto averaged = [&](Step k1) {
      double sum = 0.0;
      for (Step k2 = k; k2 <= k1; ++k2) sum += eval(left, k2);
      return 0.5 * (sum / static_cast<double>(k1 - k + 1) + eval(right, k1));
    };
    if (mode_ == Mode::dsasr) return averaged(scheduled(f, k, w));
    double best = -kInf;
    for (Step k1 = w.first; k1 <= w.last; ++k1) best = std::max(best, averaged(k1));
    return best;
  }

  const PredicateTrace& z_;
  Mode mode_;
  const WitnessFn* k1_;
  std::unordered_map<const Formula*, std::size_t> ops_;
};

using InfluenceMap = std::map<PredicateId, std::set<Step>>;

void influence(const Formula& f, Step k, const SamplingGrid& grid, std::optional<Step> last, InfluenceMap& out) {
  auto over = [&](const Formula& child, StepRange r) {
    for (Step q = r.first; q <= r.last; ++q) influence(child, q, grid, last, out);
  };
  switch (f.op) {
    case Op::top: return;
    case Op::pred:
    case Op::neg_pred: out[f.pred].insert(k); return;
    case Op::negation:
    case Op::conj:
    case Op::disj:
      for (const auto& c : f.children) influence(c, k, grid, last, out);
      return;
    case Op::eventually:
    case Op::always: over(f.child(), window(f, k, grid)); return;
    case Op::until: {
      const StepRange w = window(f, k, grid);
      over(f.child(0), {k, w.last});
      over(f.child(1), w);
      return;
    }
    case Op::all_time:
      if (!last) throw std::invalid_argument("all-time influence needs the trace end step");
      over(f.child(), checkable_steps(f, k, *last, grid));
      return;
    case Op::one_time: influence(f.child(), event_step(f, grid), grid, last, out); return;
  }
}

}  // namespace

PredicateTrace::PredicateTrace(Eigen::MatrixXd values, SamplingGrid grid)
    : values_(std::move(values)), grid_(grid) {}

PredicateTrace PredicateTrace::of(const Signal& sig, const PredicateTable& table) {
  Eigen::MatrixXd v(static_cast<Eigen::Index>(table.size()), static_cast<Eigen::Index>(sig.states.size()));
  for (std::size_t k = 0; k < sig.states.size(); ++k) v.col(static_cast<Eigen::Index>(k)) = table.values(sig.states[k]);
  return {std::move(v), sig.grid};
}

PredicateTrace PredicateTrace::shifted(const Eigen::VectorXd& shift) const {
  if (shift.size() != values_.rows()) throw std::invalid_argument("shift needs one entry per predicate");
  return {values_.colwise() + shift, grid_};
}

WitnessFn witnesses_of(const Schedule& schedule) {
  return [&schedule](std::size_t op, Step k) { return schedule.k1_at(op, k); };
}

StepRange checkable_steps(const Formula& all_time, Step k, Step last, const SamplingGrid& grid) {
  const Step h = discrete_length(all_time.child(), grid);
  return {k, last - h};
}

bool eval_bool(const PredicateTrace& z, Step k, const Formula& f) {
  require_horizon(z, k, f);
  return holds(z, k, f);
}

double eval_sr(const PredicateTrace& z, Step k, const Formula& f) {
  require_horizon(z, k, f);
  return Quantitative(z, Mode::sr, f, nullptr).eval(f, k);
}

double eval_dasr(const PredicateTrace& z, Step k, const Formula& f) {
  require_horizon(z, k, f);
  return Quantitative(z, Mode::dasr, f, nullptr).eval(f, k);
}

double eval_dsasr(const PredicateTrace& z, Step k, const Formula& f, const WitnessFn& k1) {
  require_horizon(z, k, f);
  return Quantitative(z, Mode::dsasr, f, &k1).eval(f, k);
}

bool eval_bool(const Signal& sig, Step k, const Formula& f, const PredicateTable& table) {
  return eval_bool(PredicateTrace::of(sig, table), k, f);
}

double eval_sr(const Signal& sig, Step k, const Formula& f, const PredicateTable& table) {
  return eval_sr(PredicateTrace::of(sig, table), k, f);
}

double eval_dasr(const Signal& sig, Step k, const Formula& f, const PredicateTable& table) {
  return eval_dasr(PredicateTrace::of(sig, table), k, f);
}

double eval_dsasr(const Signal& sig, Step k, const Formula& f, const PredicateTable& table,
                  const Schedule& schedule) {
  return eval_dsasr(PredicateTrace::of(sig, table), k, f, witnesses_of(schedule));
}

std::vector<Step> domain_of_influence(const Formula& f, Step k, PredicateId pred, const SamplingGrid& grid,
                                      std::optional<Step> last) {
  const auto ids = referenced_predicates(f);
  if (!std::binary_search(ids.begin(), ids.end(), pred)) {
    throw std::invalid_argument("predicate " + std::to_string(pred) + " does not occur in the formula");
  }
  InfluenceMap map;
  influence(f, k, grid, last, map);
  const auto& steps = map[pred];
  return {steps.begin(), steps.end()};
}

double prd(const PredicateTrace& z, const Formula& f, Step k) {
  const bool sat = eval_bool(z, k, f);
  InfluenceMap map;
  influence(f, k, z.grid(), z.last(), map);
  double total = 0.0;
  for (const auto& [p, steps] : map) {
    for (Step q : steps) {
      const double v = z(p, q);
      // Heaviside gate with h(0) = 1 on the matching side; zero values add nothing either way.
      if (sat ? v >= 0.0 : v <= 0.0) total += v;
    }
  }
  return total;
}

double prd(const Signal& sig, const Formula& f, Step k, const PredicateTable& table) {
  return prd(PredicateTrace::of(sig, table), f, k);
}

namespace {

void require_axis_fragment(const Formula& f, const PredicateTable& table, bool inside_always) {
  switch (f.op) {
    case Op::pred:
      if (!table.axis_form(f.pred)) {
        throw UnsupportedFormula("robustness degree needs predicates of the form +-x_j + c, got " +
                                 table.label(f.pred));
      }
      return;
    case Op::conj:
      if (inside_always) break;
      for (const auto& c : f.children) require_axis_fragment(c, table, false);
      return;
    case Op::always:
      if (inside_always) break;
      require_axis_fragment(f.child(), table, true);
      return;
    case Op::all_time:
    case Op::one_time:
      require_axis_fragment(f.child(), table, false);
      return;
    default:
      break;
  }
  throw UnsupportedFormula("robustness degree is implemented only for conjunctions of always over predicates");
}

}  // namespace

double robustness_degree_axis(const Signal& sig, const Formula& f, Step k, const PredicateTable& table) {
  if (f.is_wrapper() && f.child().is_wrapper()) throw UnsupportedFormula("nested wrappers");
  require_axis_fragment(f, table, false);
  const PredicateTrace z = PredicateTrace::of(sig, table);
  const bool sat = eval_bool(z, k, f);
  InfluenceMap map;
  influence(f, k, sig.grid, sig.last(), map);

  if (sat) {
    double margin = kInf;
    for (const auto& [p, steps] : map) {
      for (Step q : steps) margin = std::min(margin, z(p, q));
    }
    return margin;
  }

  // Per step, each coordinate must land in the intersection of its lower and
  // upper bounds; the distance is the Euclidean norm of the smallest move.
  std::map<Step, std::map<Eigen::Index, std::pair<double, double>>> bounds;
  for (const auto& [p, steps] : map) {
    const auto axis = *table.axis_form(p);
    for (Step q : steps) {
      auto& [lo, hi] = bounds[q].try_emplace(axis.coordinate, -kInf, kInf).first->second;
      // sign * x_j + c >= 0
      if (axis.sign > 0) {
        lo = std::max(lo, -table.offset(p));
      } else {
        hi = std::min(hi, table.offset(p));
      }
    }
  }
  double worst = 0.0;
  for (const auto& [q, coords] : bounds) {
    double sq = 0.0;
    for (const auto& [j, lohi] : coords) {
      const auto [lo, hi] = lohi;
      if (lo > hi) return -kInf;
      const double x = sig.states[static_cast<std::size_t>(q)](j);
      const double move = x < lo ? lo - x : (x > hi ? x - hi : 0.0);
      sq += move * move;
    }
    worst = std::max(worst, std::sqrt(sq));
  }
  return -worst;
}

RobustnessReadout readout(const Signal& sig, Step k, const Formula& f, const PredicateTable& table,
                          const Schedule* schedule) {
  const PredicateTrace z = PredicateTrace::of(sig, table);
  RobustnessReadout r;
  r.satisfied = eval_bool(z, k, f);
  r.sr = eval_sr(z, k, f);
  r.dasr = eval_dasr(z, k, f);
  if (schedule) {
    r.dsasr = eval_dsasr(z, k, f, witnesses_of(*schedule));
  } else if (event_nodes(f).empty()) {
    r.dsasr = r.dasr;
  }
  r.prd = prd(z, f, k);
  try {
    r.rd = robustness_degree_axis(sig, f, k, table);
  } catch (const UnsupportedFormula&) {
  }
  return r;
}

}  // namespace stlmpc
