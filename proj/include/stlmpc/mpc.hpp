#pragma once

#include "stlmpc/lti_system.hpp"
#include "stlmpc/qp_builder.hpp"
#include "stlmpc/qp_solver.hpp"
#include "stlmpc/semantics.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace stlmpc {

struct NoiseModel {
  enum class Kind : std::uint8_t { none, gaussian };
  Kind kind = Kind::none;
  Eigen::VectorXd deviation;  // per state; a single entry applies to every state
  std::uint64_t seed = 0;
};

enum class ControlMode : std::uint8_t {
  receding,   // re-solve every step and apply the first input
  open_loop,  // apply a whole plan, re-solving only when it runs out
};

enum class BaselineSemantics : std::uint8_t { dsasr, sr_baseline };

struct SlackPolicy {
  bool enabled = false;
  std::optional<double> weight;  // default_slack_weight when unset
  double state_scale = 10.0;
};

struct RunConfig {
  BuilderConfig builder;
  Step steps = 0;  // simulated transitions; the trace holds steps + 1 states
  ControlMode mode = ControlMode::receding;
  BaselineSemantics semantics = BaselineSemantics::dsasr;
  SlackPolicy slack;
  Eigen::VectorXd idle_input;  // applied when nothing is left to optimize; zero when empty
  SolverSettings solver;
};

enum class StepStatus : std::uint8_t { optimal, relaxed, iteration_limit, planned, idle, final };
[[nodiscard]] std::string_view to_string(StepStatus s) noexcept;

struct TraceStep {
  Step k = 0;
  double t = 0.0;
  Eigen::VectorXd x;
  Eigen::VectorXd u;  // empty on the final row
  Eigen::VectorXd v;
  StepStatus status = StepStatus::idle;
  double objective = 0.0;  // maximized value of the solved problem, nan when not solved
  std::size_t branch = 0;
};

struct TraceSummary {
  double snr_db = 0.0;
  RobustnessReadout readout;
  Step solves = 0;
  Step relaxed_steps = 0;
};

struct Trace {
  std::vector<TraceStep> steps;
  TraceSummary summary;

  [[nodiscard]] Signal signal(const SamplingGrid& grid) const;
};

class MpcError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Trace run(const LtiSystem& system, const CompiledSpec& spec, const RunConfig& config, const NoiseModel& noise);

// 10 log10(mean |x|^2 / mean |v|^2) over the states and noise samples; +inf without noise.
double snr_db(const Trace& trace);

}  // namespace stlmpc
