#include "stlmpc/qp_builder.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace stlmpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Weighted {
  PredicateId pred;
  Step time;
  double weight;
};

Step witness(const PsiTerm& term, const Schedule* schedule, Step k) {
  if (!term.op || !schedule) throw std::invalid_argument("eventually/until term needs a schedule entry");
  return schedule->k1_at(*term.op, k);
}

PredicateId operand(const Formula& f) {
  if (f.op != Op::pred) throw FormulaError("builder expects PNF predicates as temporal operands");
  return f.pred;
}

std::vector<Weighted> cost_terms(const PsiTerm& term, const Schedule* schedule, Step k, const SamplingGrid& grid) {
  const Formula& f = term.psi;
  std::vector<Weighted> out;
  switch (f.op) {
    case Op::always: {
      const StepRange w = window_at(k, f.interval.a, f.interval.b, grid);
      const PredicateId p = operand(f.child());
      for (Step t = w.first; t <= w.last; ++t) out.push_back({p, t, 1.0 / static_cast<double>(w.size())});
      return out;
    }
    case Op::eventually: out.push_back({operand(f.child()), witness(term, schedule, k), 1.0}); return out;
    case Op::until: {
      const Step k1 = witness(term, schedule, k);
      const PredicateId r = operand(f.child(1));
      if (f.child(0).op == Op::top) {
        out.push_back({r, k1, 1.0});
        return out;
      }
      const PredicateId l = operand(f.child(0));
      const double w = 1.0 / (2.0 * static_cast<double>(k1 - k + 1));
      for (Step t = k; t <= k1; ++t) out.push_back({l, t, w});
      out.push_back({r, k1, 0.5});
      return out;
    }
    default: throw FormulaError("cost rows need an always, eventually or until term");
  }
}

std::vector<std::pair<Step, PredicateId>> constraint_terms(const PsiTerm& term, const Schedule* schedule, Step k,
                                                           const SamplingGrid& grid) {
  std::vector<std::pair<Step, PredicateId>> out;
  const Formula& f = term.psi;
  if (f.op == Op::until && f.child(0).op != Op::top) {
    const Step k1 = witness(term, schedule, k);
    const PredicateId l = operand(f.child(0));
    for (Step t = k; t <= k1; ++t) out.emplace_back(t, l);
    out.emplace_back(k1, operand(f.child(1)));
    return out;
  }
  for (const auto& w : cost_terms(term, schedule, k, grid)) out.emplace_back(w.time, w.pred);
  return out;
}

ZLayout window_layout(int N, Step h_d, Step k0, Eigen::Index predicates) {
  if (N < 1 || h_d < 0) throw std::invalid_argument("need N >= 1 and h_d >= 0");
  return {k0 - h_d + 1, k0 + N, predicates};
}

Eigen::MatrixXd scatter(const std::vector<std::vector<Weighted>>& rows, const ZLayout& layout) {
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), layout.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (const auto& w : rows[r]) E(static_cast<Eigen::Index>(r), layout.column(w.time, w.pred)) += w.weight;
  }
  return E;
}

bool trivially_true(const Formula& psi) {
  if (psi.op == Op::until) return psi.child(1).op == Op::top;
  return psi.is_temporal() && psi.child().op == Op::top;
}

// Disjunctive normal form over psi terms.
std::vector<std::vector<const Formula*>> dnf(const Formula& theta) {
  if (theta.op == Op::disj) {
    std::vector<std::vector<const Formula*>> out;
    for (const auto& c : theta.children) {
      auto sub = dnf(c);
      out.insert(out.end(), sub.begin(), sub.end());
    }
    return out;
  }
  if (theta.op == Op::conj) {
    std::vector<std::vector<const Formula*>> acc{{}};
    for (const auto& c : theta.children) {
      const auto sub = dnf(c);
      std::vector<std::vector<const Formula*>> next;
      for (const auto& a : acc) {
        for (const auto& s : sub) {
          auto merged = a;
          merged.insert(merged.end(), s.begin(), s.end());
          next.push_back(std::move(merged));
        }
      }
      acc = std::move(next);
    }
    return acc;
  }
  return {{&theta}};
}

// Rows collected before assembling A.
struct RowBuffer {
  std::vector<Eigen::RowVectorXd> coeffs;
  std::vector<double> lower, upper;
  std::vector<RowTag> tags;
  std::vector<Eigen::RowVectorXd> slack;

  void add(Eigen::RowVectorXd a, double lo, double hi, RowTag tag, Eigen::RowVectorXd s) {
    coeffs.push_back(std::move(a));
    lower.push_back(lo);
    upper.push_back(hi);
    tags.push_back(tag);
    slack.push_back(std::move(s));
  }

  void emit(QpProblem& p, Eigen::Index n, Eigen::Index predicates) const {
    const auto m = static_cast<Eigen::Index>(coeffs.size());
    p.A.resize(m, n);
    p.lower.resize(m);
    p.upper.resize(m);
    p.slack_columns.resize(m, predicates);
    for (Eigen::Index i = 0; i < m; ++i) {
      p.A.row(i) = coeffs[static_cast<std::size_t>(i)];
      p.lower(i) = lower[static_cast<std::size_t>(i)];
      p.upper(i) = upper[static_cast<std::size_t>(i)];
      p.slack_columns.row(i) = slack[static_cast<std::size_t>(i)];
    }
    p.rows = tags;
  }
};

Eigen::MatrixXd input_penalty(const BuilderConfig& config, Eigen::Index m) {
  const int N = config.horizon;
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(N * m, N * m);
  if (config.input_weight.size() == 0) return P;
  const Eigen::MatrixXd& M = config.input_weight;
  if (M.rows() != m || M.cols() != m) throw std::invalid_argument("input weight M must be m x m");
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, M.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("input weight M must be symmetric");
  }
  if (Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(M, Eigen::EigenvaluesOnly).eigenvalues().minCoeff() < -1e-12) {
    throw std::invalid_argument("input weight M must be positive semidefinite");
  }
  // The cost subtracts u'(I (x) M)u; as a minimization with the 1/2 convention P = 2 (I (x) M).
  for (int k = 0; k < N; ++k) P.block(k * m, k * m, m, m) = 2.0 * M;
  return P;
}

void add_input_rows(const BuilderConfig& config, Eigen::Index m, Eigen::Index n, Eigen::Index predicates,
                    RowBuffer& rows) {
  const int N = config.horizon;
  const auto& in = config.inputs;
  const Eigen::RowVectorXd no_slack = Eigen::RowVectorXd::Zero(predicates);
  if (in.lower.size() || in.upper.size()) {
    if ((in.lower.size() && in.lower.size() != m) || (in.upper.size() && in.upper.size() != m)) {
      throw std::invalid_argument("input bounds need one entry per input");
    }
    for (int k = 0; k < N; ++k) {
      for (Eigen::Index j = 0; j < m; ++j) {
        const double lo = in.lower.size() ? in.lower(j) : -kInf;
        const double hi = in.upper.size() ? in.upper(j) : kInf;
        if (lo > hi) throw std::invalid_argument("input lower bound exceeds upper bound");
        if (std::isinf(lo) && std::isinf(hi)) continue;
        Eigen::RowVectorXd a = Eigen::RowVectorXd::Zero(n);
        a(k * m + j) = 1.0;
        rows.add(std::move(a), lo, hi, {RowKind::input_bound, 0, k, 0}, no_slack);
      }
    }
  }
  for (const auto& c : in.linear) {
    if (c.coefficients.size() != N * m) {
      throw std::invalid_argument("linear input constraint needs N*m = " + std::to_string(N * m) + " coefficients");
    }
    Eigen::RowVectorXd a = Eigen::RowVectorXd::Zero(n);
    a.head(N * m) = c.coefficients;
    rows.add(std::move(a), c.lower, c.upper, {RowKind::input_linear, 0, 0, 0}, no_slack);
  }
}

// z_p(t) >= margin as a row over the inputs. Rows on recorded samples are
// constants: satisfied ones are left out, violated ones follow the config.
void add_stl_rows(const ConstraintMatrix& R, const StageModel& stage, const BuilderConfig& config, Eigen::Index n,
                  RowBuffer& rows) {
  const Eigen::Index nu = stage.influence.cols();
  for (const auto& tag : R.tags) {
    const Eigen::Index col = stage.layout.column(tag.time, tag.pred);
    const double known = stage.known(col);
    Eigen::RowVectorXd slack = Eigen::RowVectorXd::Zero(stage.layout.predicates);
    slack(static_cast<Eigen::Index>(tag.pred)) = 1.0;
    Eigen::RowVectorXd a = Eigen::RowVectorXd::Zero(n);
    if (tag.time <= stage.now) {
      if (known >= 0.0 || config.past_violations == BuilderConfig::PastViolations::drop) continue;
      rows.add(std::move(a), -known, kInf, tag, std::move(slack));
      continue;
    }
    a.head(nu) = stage.influence.row(col);
    rows.add(std::move(a), config.constraint_margin - known, kInf, tag, std::move(slack));
  }
}

Eigen::RowVectorXd per_predicate_sum(const Eigen::RowVectorXd& e, const ZLayout& layout) {
  Eigen::RowVectorXd out = Eigen::RowVectorXd::Zero(layout.predicates);
  for (Eigen::Index j = 0; j < e.size(); ++j) out(j % layout.predicates) += e(j);
  return out;
}

}  // namespace

StackedDynamics stack_dynamics(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& C,
                               const Eigen::VectorXd& c, int N) {
  const Eigen::Index n = A.rows();
  const Eigen::Index m = B.cols();
  const Eigen::Index p = C.rows();
  if (A.cols() != n || B.rows() != n || C.cols() != n || c.size() != p) {
    throw std::invalid_argument("stack_dynamics: inconsistent dimensions");
  }
  if (N < 1) throw std::invalid_argument("stack_dynamics: horizon must be positive");
  StackedDynamics s;
  s.horizon = N;
  s.input_dim = m;
  s.H1.resize(N * p, n);
  s.H2 = Eigen::MatrixXd::Zero(N * p, N * m);
  s.offset.resize(N * p);
  // CA^k for k = 1..N, and CA^(i-j)B below the diagonal.
  std::vector<Eigen::MatrixXd> CAk;  // CAk[k] = C A^k
  Eigen::MatrixXd Ak = Eigen::MatrixXd::Identity(n, n);
  for (int k = 0; k <= N; ++k) {
    CAk.push_back(C * Ak);
    Ak = A * Ak;
  }
  for (int i = 0; i < N; ++i) {
    s.H1.block(i * p, 0, p, n) = CAk[static_cast<std::size_t>(i + 1)];
    s.offset.segment(i * p, p) = c;
    for (int j = 0; j <= i; ++j) s.H2.block(i * p, j * m, p, m) = CAk[static_cast<std::size_t>(i - j)] * B;
  }
  return s;
}

Eigen::Index ZLayout::column(Step t, PredicateId p) const {
  if (!covers(t) || static_cast<Eigen::Index>(p) >= predicates) {
    throw std::out_of_range("z_all has no column for predicate " + std::to_string(p) + " at step " + std::to_string(t) +
                            " (covers " + std::to_string(first) + ".." + std::to_string(last) + ")");
  }
  return (t - first) * predicates + static_cast<Eigen::Index>(p);
}

Eigen::MatrixXd build_E(const PsiTerm& term, const Schedule* schedule, const ZLayout& layout, StepRange rows,
                        const SamplingGrid& grid) {
  std::vector<std::vector<Weighted>> terms;
  for (Step k = rows.first; k <= rows.last; ++k) terms.push_back(cost_terms(term, schedule, k, grid));
  return scatter(terms, layout);
}

Eigen::MatrixXd build_E_until(int N, Step h_d, Step k0, const std::function<Step(Step)>& k1) {
  const ZLayout layout = window_layout(N, h_d, k0, 2);
  std::vector<std::vector<Weighted>> rows;
  for (Step ik = layout.first; ik < layout.first + N; ++ik) {
    const Step w = k1(ik);
    if (w < ik) throw std::out_of_range("until witness precedes its evaluation step");
    std::vector<Weighted> r;
    for (Step t = ik; t <= w; ++t) r.push_back({0, t, 1.0 / (2.0 * static_cast<double>(w - ik + 1))});
    r.push_back({1, w, 0.5});
    rows.push_back(std::move(r));
  }
  return scatter(rows, layout);
}

Eigen::MatrixXd build_E_eventually(int N, Step h_d, Step k0, const std::function<Step(Step)>& k1) {
  const ZLayout layout = window_layout(N, h_d, k0, 1);
  std::vector<std::vector<Weighted>> rows;
  for (Step ik = layout.first; ik < layout.first + N; ++ik) rows.push_back({{0, k1(ik), 1.0}});
  return scatter(rows, layout);
}

Eigen::MatrixXd build_E_always(int N, Step h_d, Step k0, const std::function<StepRange(Step)>& window) {
  const ZLayout layout = window_layout(N, h_d, k0, 1);
  std::vector<std::vector<Weighted>> rows;
  for (Step ik = layout.first; ik < layout.first + N; ++ik) {
    const StepRange w = window(ik);
    if (w.empty()) throw std::invalid_argument("always window is empty");
    std::vector<Weighted> r;
    for (Step t = w.first; t <= w.last; ++t) r.push_back({0, t, 1.0 / static_cast<double>(w.size())});
    rows.push_back(std::move(r));
  }
  return scatter(rows, layout);
}

ConstraintMatrix build_R(const std::vector<PsiTerm>& conjunction, const Schedule* schedule, const ZLayout& layout,
                         StepRange rows, const SamplingGrid& grid) {
  std::set<std::pair<Step, PredicateId>> pinned;
  for (const auto& term : conjunction) {
    for (Step k = rows.first; k <= rows.last; ++k) {
      for (const auto& tp : constraint_terms(term, schedule, k, grid)) pinned.insert(tp);
    }
  }
  ConstraintMatrix out;
  out.R = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(pinned.size()), layout.size());
  Eigen::Index i = 0;
  for (const auto& [t, p] : pinned) {
    out.R(i++, layout.column(t, p)) = 1.0;
    out.tags.push_back({RowKind::stl, p, t, 0});
  }
  return out;
}

ConstraintMatrix build_R(const Formula& theta, const Schedule* schedule, const ZLayout& layout, StepRange rows,
                         const SamplingGrid& grid) {
  std::unordered_map<const Formula*, std::size_t> ops;
  const auto nodes = event_nodes(theta);
  for (std::size_t i = 0; i < nodes.size(); ++i) ops.emplace(nodes[i], i);
  std::vector<PsiTerm> terms;
  auto add = [&](const Formula& psi) {
    if (!is_psi(psi)) throw FormulaError("build_R expects a conjunction of psi terms");
    const auto it = ops.find(&psi);
    terms.push_back({psi, it == ops.end() ? std::nullopt : std::optional<std::size_t>(it->second)});
  };
  if (theta.op == Op::conj) {
    for (const auto& c : theta.children) add(c);
  } else {
    add(theta);
  }
  return build_R(terms, schedule, layout, rows, grid);
}

CompiledSpec compile_spec(const Formula& phi, PredicateTable table, const SamplingGrid& grid) {
  if (!phi.is_wrapper()) throw FormulaError("specification must be G[0,inf](...) or event => ...");
  validate_fragment(phi);
  Formula wrapped = phi;
  if (is_gamma(wrapped.child())) {
    if (wrapped.child().op == Op::top) throw FormulaError("specification body is trivially true");
    wrapped.children.front() = Formula::always(wrapped.child(), 0.0, 0.0);
  }

  CompiledSpec spec;
  spec.phi = to_pnf(wrapped, table);
  spec.table = std::move(table);
  spec.grid = grid;
  validate_windows(spec.phi, grid);
  spec.all_time = spec.phi.op == Op::all_time;
  if (!spec.all_time) spec.event_step = omega_range(spec.phi.event_time, spec.phi.event_time, grid).first;

  const Formula& theta = spec.theta();
  spec.horizon = discrete_length(theta, grid);
  const auto windows = collect_event_ops(theta);
  if (!windows.empty()) spec.schedule = compute_schedule(windows, grid);

  std::unordered_map<const Formula*, std::size_t> ops;
  const auto nodes = event_nodes(theta);
  for (std::size_t i = 0; i < nodes.size(); ++i) ops.emplace(nodes[i], i);
  for (const auto& branch : dnf(theta)) {
    std::vector<PsiTerm> terms;
    for (const Formula* psi : branch) {
      if (trivially_true(*psi)) throw FormulaError("temporal operator over true is trivially satisfied");
      const auto it = ops.find(psi);
      terms.push_back({*psi, it == ops.end() ? std::nullopt : std::optional<std::size_t>(it->second)});
    }
    spec.branches.push_back(std::move(terms));
  }
  return spec;
}

StageModel stage_model(const CompiledSpec& spec, const LtiSystem& system, const BuilderConfig& config, Step now,
                       std::span<const Eigen::VectorXd> history) {
  system.validate();
  const int N = config.horizon;
  if (N < spec.horizon || N < 1) {
    throw std::invalid_argument("prediction horizon N = " + std::to_string(N) + " is shorter than the formula horizon " +
                                std::to_string(spec.horizon));
  }
  if (now < 0 || static_cast<Step>(history.size()) != now + 1) {
    throw std::invalid_argument("history must hold x(0) .. x(now)");
  }
  if (spec.table.state_dim() != system.state_dim()) throw std::invalid_argument("predicate table and system disagree on n");

  StageModel st;
  st.now = now;
  if (spec.all_time) {
    st.rows = {std::max<Step>(0, now - spec.horizon + 1), now + N - spec.horizon};
  } else {
    st.rows = {spec.event_step, spec.event_step};
  }
  st.layout = {std::min(st.rows.first, now), now + N, static_cast<Eigen::Index>(spec.table.size())};
  const Eigen::Index np = st.layout.predicates;
  const Eigen::Index m = system.input_dim();

  const StackedDynamics dyn = stack_dynamics(system.A, system.B, spec.table.C(), spec.table.c(), N);
  st.known = Eigen::VectorXd::Zero(st.layout.size());
  st.influence = Eigen::MatrixXd::Zero(st.layout.size(), N * m);
  for (Step t = st.layout.first; t <= now; ++t) {
    st.known.segment(st.layout.column(t, 0), np) = spec.table.values(history[static_cast<std::size_t>(t)]);
  }
  const Eigen::VectorXd future = dyn.H1 * history.back() + dyn.offset;
  const Eigen::Index base = st.layout.column(now + 1, 0);
  st.known.segment(base, N * np) = future;
  st.influence.block(base, 0, N * np, N * m) = dyn.H2;
  return st;
}

std::vector<QpProblem> build_problem(const CompiledSpec& spec, const LtiSystem& system, const BuilderConfig& config,
                                     const StageModel& stage) {
  const Eigen::Index m = system.input_dim();
  const Eigen::Index nu = config.horizon * m;
  const Eigen::Index np = stage.layout.predicates;
  const Schedule* sched = spec.schedule ? &*spec.schedule : nullptr;
  const Eigen::MatrixXd penalty = input_penalty(config, m);

  std::vector<QpProblem> out;
  for (std::size_t b = 0; b < spec.branches.size(); ++b) {
    const auto& terms = spec.branches[b];
    const bool epigraph = terms.size() > 1;
    const Eigen::Index ne = epigraph ? stage.rows.size() : 0;
    const Eigen::Index n = nu + ne;

    QpProblem p;
    p.branch = b;
    p.layout = {m, nu, ne, 0};
    p.P = Eigen::MatrixXd::Zero(n, n);
    p.P.topLeftCorner(nu, nu) = penalty;
    p.q = Eigen::VectorXd::Zero(n);
    p.slack_cost = Eigen::VectorXd::Zero(np);

    RowBuffer rows;
    if (!epigraph) {
      const Eigen::MatrixXd E = build_E(terms.front(), sched, stage.layout, stage.rows, spec.grid);
      const Eigen::RowVectorXd w = E.colwise().sum();
      p.q.head(nu) = -(w * stage.influence).transpose();
      p.constant = -w.dot(stage.known);
      p.slack_cost = -per_predicate_sum(w, stage.layout).transpose();
    } else {
      p.q.tail(ne).setConstant(-1.0);
      for (const auto& term : terms) {
        const Eigen::MatrixXd E = build_E(term, sched, stage.layout, stage.rows, spec.grid);
        for (Eigen::Index r = 0; r < ne; ++r) {
          // u_x(k') - E_r G u <= E_r known
          Eigen::RowVectorXd a = Eigen::RowVectorXd::Zero(n);
          a.head(nu) = -E.row(r) * stage.influence;
          a(nu + r) = 1.0;
          rows.add(std::move(a), -kInf, E.row(r).dot(stage.known),
                   {RowKind::epigraph, 0, stage.rows.first + r, stage.rows.first + r},
                   -per_predicate_sum(E.row(r), stage.layout));
        }
      }
    }
    const ConstraintMatrix R = build_R(terms, sched, stage.layout, stage.rows, spec.grid);
    add_stl_rows(R, stage, config, n, rows);
    add_input_rows(config, m, n, np, rows);
    rows.emit(p, n, np);
    p.validate();
    out.push_back(std::move(p));
  }
  return out;
}

QpProblem add_slack_relaxation(const QpProblem& p, double weight) {
  if (!(weight > 0.0)) throw std::invalid_argument("slack weight must be positive");
  if (p.layout.slacks) throw std::invalid_argument("problem already has slack variables");
  const Eigen::Index n = p.variables();
  const Eigen::Index m = p.constraints();
  const Eigen::Index np = p.slack_cost.size();
  QpProblem r = p;
  r.layout.slacks = np;
  r.P = Eigen::MatrixXd::Zero(n + np, n + np);
  r.P.topLeftCorner(n, n) = p.P;
  r.q.resize(n + np);
  r.q << p.q, p.slack_cost.array() + weight;
  r.A = Eigen::MatrixXd::Zero(m + np, n + np);
  r.A.topLeftCorner(m, n) = p.A;
  r.A.topRightCorner(m, np) = p.slack_columns;
  r.A.bottomRightCorner(np, np).setIdentity();
  r.lower.resize(m + np);
  r.upper.resize(m + np);
  r.lower << p.lower, Eigen::VectorXd::Zero(np);
  r.upper << p.upper, Eigen::VectorXd::Constant(np, kInf);
  r.slack_columns = Eigen::MatrixXd::Zero(m + np, np);
  for (Eigen::Index i = 0; i < np; ++i) r.rows.push_back({RowKind::slack_bound, static_cast<PredicateId>(i), 0, 0});
  r.validate();
  return r;
}

double default_slack_weight(const PredicateTable& table, double state_scale) {
  double c = table.size() ? table.c().cwiseAbs().maxCoeff() : 0.0;
  double row = table.size() ? table.C().rowwise().norm().maxCoeff() : 0.0;
  return 1e3 * std::max(1.0, c + row * state_scale);
}

QpProblem build_sr_baseline(const CompiledSpec& spec, const LtiSystem& system, const BuilderConfig& config,
                            const StageModel& stage, std::optional<double> min_margin) {
  if (spec.branches.size() != 1) throw UnsupportedFormulaForBaseline("min-max baseline needs a conjunction");
  for (const auto& t : spec.branches.front()) {
    if (t.psi.op != Op::always || t.psi.child().op != Op::pred) {
      throw UnsupportedFormulaForBaseline("min-max baseline needs always-over-predicate terms");
    }
  }
  const Eigen::Index m = system.input_dim();
  const Eigen::Index nu = config.horizon * m;
  const Eigen::Index n = nu + 1;
  const Eigen::Index np = stage.layout.predicates;

  QpProblem p;
  p.layout = {m, nu, 1, 0};
  p.P = Eigen::MatrixXd::Zero(n, n);
  p.P.topLeftCorner(nu, nu) = input_penalty(config, m);
  p.q = Eigen::VectorXd::Zero(n);
  p.q(nu) = -1.0;
  p.slack_cost = Eigen::VectorXd::Zero(np);

  RowBuffer rows;
  const ConstraintMatrix R = build_R(spec.branches.front(), nullptr, stage.layout, stage.rows, spec.grid);
  for (const auto& tag : R.tags) {
    const Eigen::Index col = stage.layout.column(tag.time, tag.pred);
    Eigen::RowVectorXd a = Eigen::RowVectorXd::Zero(n);
    a.head(nu) = -stage.influence.row(col);
    a(nu) = 1.0;
    RowTag t = tag;
    t.kind = RowKind::sr_margin;
    rows.add(std::move(a), -kInf, stage.known(col), t, Eigen::RowVectorXd::Zero(np));
  }
  if (min_margin) {
    Eigen::RowVectorXd a = Eigen::RowVectorXd::Zero(n);
    a(nu) = 1.0;
    rows.add(std::move(a), *min_margin, kInf, {RowKind::sr_margin, 0, 0, 0}, Eigen::RowVectorXd::Zero(np));
  }
  add_input_rows(config, m, n, np, rows);
  rows.emit(p, n, np);
  p.validate();
  return p;
}

std::string dump(const QpProblem& p) {
  const Eigen::IOFormat fmt(Eigen::FullPrecision, 0, " ", "\n");
  std::ostringstream os;
  os << "variables " << p.variables() << " constraints " << p.constraints() << " branch " << p.branch << "\n";
  os << "layout inputs " << p.layout.inputs << " epigraph " << p.layout.epigraph << " slacks " << p.layout.slacks << "\n";
  os << "P\n" << p.P.format(fmt) << "\nq\n" << p.q.transpose().format(fmt) << "\nconstant " << p.constant << "\n";
  os << "A\n" << p.A.format(fmt) << "\nlower\n" << p.lower.transpose().format(fmt) << "\nupper\n"
     << p.upper.transpose().format(fmt) << "\n";
  return os.str();
}

}  // namespace stlmpc
