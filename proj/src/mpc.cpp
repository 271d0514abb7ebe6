#include "stlmpc/mpc.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace stlmpc {

std::string_view to_string(StepStatus s) noexcept {
  switch (s) {
    case StepStatus::optimal: return "optimal";
    case StepStatus::relaxed: return "relaxed";
    case StepStatus::iteration_limit: return "iteration_limit";
    case StepStatus::planned: return "planned";
    case StepStatus::idle: return "idle";
    case StepStatus::final: return "final";
  }
  return "unknown";
}

Signal Trace::signal(const SamplingGrid& grid) const {
  Signal s{{}, grid};
  s.states.reserve(steps.size());
  for (const auto& st : steps) s.states.push_back(st.x);
  return s;
}

double snr_db(const Trace& trace) {
  double px = 0.0;
  double pv = 0.0;
  std::size_t nv = 0;
  for (const auto& st : trace.steps) {
    px += st.x.squaredNorm();
    if (st.v.size()) {
      pv += st.v.squaredNorm();
      ++nv;
    }
  }
  if (trace.steps.empty() || nv == 0 || pv == 0.0) return std::numeric_limits<double>::infinity();
  px /= static_cast<double>(trace.steps.size());
  pv /= static_cast<double>(nv);
  return 10.0 * std::log10(px / pv);
}

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

class NoiseSource {
 public:
  NoiseSource(const NoiseModel& model, Eigen::Index n) : model_(model), n_(n), rng_(model.seed) {
    if (model.kind == NoiseModel::Kind::none) return;
    if (model.deviation.size() != 1 && model.deviation.size() != n) {
      throw std::invalid_argument("noise deviation needs one entry or one per state");
    }
    if ((model.deviation.array() < 0.0).any()) throw std::invalid_argument("noise deviation must be nonnegative");
  }

  Eigen::VectorXd draw() {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n_);
    if (model_.kind == NoiseModel::Kind::none) return v;
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index i = 0; i < n_; ++i) {
      v(i) = normal(rng_) * model_.deviation(model_.deviation.size() == 1 ? 0 : i);
    }
    return v;
  }

 private:
  NoiseModel model_;
  Eigen::Index n_;
  std::mt19937_64 rng_;
};

struct Plan {
  Eigen::VectorXd inputs;  // stacked u_st
  StepStatus status = StepStatus::optimal;
  double objective = kNan;
  std::size_t branch = 0;
};

class Controller {
 public:
  Controller(const LtiSystem& system, const CompiledSpec& spec, const RunConfig& config)
      : system_(system), spec_(spec), config_(config) {}

  // Steps at which the controller has something to optimize.
  [[nodiscard]] bool active(Step k) const {
    if (spec_.all_time) return true;
    return k >= spec_.event_step && k <= spec_.event_step + spec_.horizon;
  }

  Plan solve_at(Step now, const std::vector<Eigen::VectorXd>& history) {
    const StageModel stage = stage_model(spec_, system_, config_.builder, now, history);
    std::vector<QpProblem> problems;
    if (config_.semantics == BaselineSemantics::sr_baseline) {
      problems.push_back(build_sr_baseline(spec_, system_, config_.builder, stage));
    } else {
      problems = build_problem(spec_, system_, config_.builder, stage);
    }

    std::optional<Plan> best = pick(problems, false);
    if (!best && config_.slack.enabled) {
      const double s = config_.slack.weight.value_or(default_slack_weight(spec_.table, config_.slack.state_scale));
      std::vector<QpProblem> relaxed;
      for (const auto& p : problems) relaxed.push_back(add_slack_relaxation(p, s));
      best = pick(relaxed, true);
    }
    if (!best) {
      throw MpcError("no feasible problem at step " + std::to_string(now) +
                     (config_.slack.enabled ? "" : " (slack relaxation is off)"));
    }
    return *best;
  }

 private:
  std::optional<Plan> pick(const std::vector<QpProblem>& problems, bool relaxed) const {
    std::optional<Plan> best;
    for (const auto& p : problems) {
      const QpSolution sol = solve(p, config_.solver);
      StepStatus status;
      if (sol.solved()) {
        status = relaxed ? StepStatus::relaxed : StepStatus::optimal;
      } else if (sol.status == SolveStatus::iteration_limit && sol.primal_residual <= 1e-6) {
        status = StepStatus::iteration_limit;
      } else {
        continue;
      }
      const double value = -sol.objective;
      // Strict comparison keeps the lowest branch index on ties.
      if (!best || value > best->objective) best = Plan{sol.inputs(), status, value, p.branch};
    }
    return best;
  }

  const LtiSystem& system_;
  const CompiledSpec& spec_;
  const RunConfig& config_;
};

}  // namespace

Trace run(const LtiSystem& system, const CompiledSpec& spec, const RunConfig& config, const NoiseModel& noise) {
  system.validate();
  if (config.steps < 0) throw std::invalid_argument("simulation steps must be nonnegative");
  if (config.builder.horizon < spec.horizon) {
    throw std::invalid_argument("horizon N = " + std::to_string(config.builder.horizon) +
                                " is shorter than the formula horizon " + std::to_string(spec.horizon));
  }
  if (!spec.all_time && config.steps < spec.event_step + spec.horizon) {
    throw std::invalid_argument("simulation ends before the event formula can be decided (needs " +
                                std::to_string(spec.event_step + spec.horizon) + " steps)");
  }
  const Eigen::Index m = system.input_dim();
  Eigen::VectorXd idle = config.idle_input.size() ? config.idle_input : Eigen::VectorXd::Zero(m);
  if (idle.size() != m) throw std::invalid_argument("idle input needs one entry per input");

  NoiseSource source(noise, system.state_dim());
  Controller controller(system, spec, config);

  Trace trace;
  std::vector<Eigen::VectorXd> history{system.x0};
  Plan plan;
  Step plan_start = 0;
  Step plan_len = 0;

  for (Step k = 0; k < config.steps; ++k) {
    TraceStep row;
    row.k = k;
    row.t = system.grid.time(k);
    row.x = history.back();
    row.objective = kNan;

    if (!controller.active(k)) {
      row.u = idle;
      row.status = StepStatus::idle;
    } else if (config.mode == ControlMode::open_loop && k < plan_start + plan_len) {
      row.u = plan.inputs.segment((k - plan_start) * m, m);
      row.status = StepStatus::planned;
      row.branch = plan.branch;
    } else {
      plan = controller.solve_at(k, history);
      plan_start = k;
      plan_len = config.builder.horizon;
      ++trace.summary.solves;
      if (plan.status == StepStatus::relaxed) ++trace.summary.relaxed_steps;
      row.u = plan.inputs.head(m);
      row.status = plan.status;
      row.objective = plan.objective;
      row.branch = plan.branch;
    }
    row.v = source.draw();
    history.push_back(system.step(row.x, row.u) + row.v);
    trace.steps.push_back(std::move(row));
  }

  TraceStep last;
  last.k = config.steps;
  last.t = system.grid.time(config.steps);
  last.x = history.back();
  last.status = StepStatus::final;
  last.objective = kNan;
  trace.steps.push_back(std::move(last));

  trace.summary.snr_db = snr_db(trace);
  const Schedule* schedule = spec.schedule ? &*spec.schedule : nullptr;
  trace.summary.readout = readout(trace.signal(system.grid), 0, spec.phi, spec.table, schedule);
  return trace;
}

}  // namespace stlmpc
