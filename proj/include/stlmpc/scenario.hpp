#pragma once

#include "stlmpc/mpc.hpp"
#include "stlmpc/parser.hpp"

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace stlmpc {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A configuration file or preset before the formula is compiled.
struct ScenarioConfig {
  std::string name;
  LtiSystem system;
  std::string formula;
  std::vector<std::string> labels;  // predicate labels in id order
  int horizon = 0;
  double duration = 0.0;  // seconds
  RunConfig run;          // builder.horizon and steps are filled from horizon and duration
  NoiseModel noise;
  std::string trace_path;
};

// INI text with sections [system], [formula], [controller], [noise], [slack],
// [output] and any number of [constraint.<name>] sections.
ScenarioConfig parse_config(std::istream& in, std::string name = {});
ScenarioConfig load_config_file(const std::string& path);

[[nodiscard]] std::vector<std::string> preset_names();
[[nodiscard]] std::optional<std::string> preset_text(std::string_view name);
// A preset name or a path to a config file.
ScenarioConfig resolve_config(const std::string& preset_or_path);

struct Scenario {
  ScenarioConfig config;
  CompiledSpec spec;
};

// Parses the formula, applies labels and checks the horizon. ParseError and FormulaError propagate.
Scenario compile_scenario(ScenarioConfig config);

Trace run_scenario(const Scenario& scenario);

// CSV: k,t,x1..xn,u1..um,v1..vn,status,objective with 17 significant digits,
// followed by '# ' summary lines.
void emit_trace(const Trace& trace, std::ostream& out);
void write_summary(const Trace& trace, std::ostream& out, std::string_view prefix = "# ");

struct RecordedTrace {
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::VectorXd> inputs;
  std::vector<Eigen::VectorXd> noise;
  std::vector<std::string> status;
  std::vector<double> objective;
};

// Reads a CSV written by emit_trace; summary lines are skipped.
RecordedTrace read_trace(std::istream& in);

}  // namespace stlmpc
