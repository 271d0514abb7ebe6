// Command line entry point: run presets or config files, check them, monitor recorded traces.

#include "stlmpc/scenario.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <iostream>

using namespace stlmpc;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitInput = 2;

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("stlmpc");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("STLMPC_LOG_LEVEL")) spdlog::set_level(spdlog::level::from_str(env));
}

void print_check(const Scenario& s) {
  const auto& spec = s.spec;
  std::cout << "formula: " << to_string(spec.phi, spec.table) << '\n';
  std::cout << "predicates: " << spec.table.size() << '\n';
  for (PredicateId i = 0; i < spec.table.size(); ++i) std::cout << "  z" << i << ": " << spec.table.label(i) << '\n';
  std::cout << "h_d: " << spec.horizon << "\nN: " << s.config.horizon << "\nsteps: " << s.config.run.steps << '\n';
  if (spec.schedule) {
    std::cout << "delta: " << spec.schedule->delta << "\neta: " << spec.schedule->eta << "\nk0:";
    for (Step b : spec.schedule->baselines) std::cout << ' ' << b;
    std::cout << '\n';
  }
  const Step now = spec.all_time ? 0 : spec.event_step;
  std::vector<Eigen::VectorXd> history(static_cast<std::size_t>(now + 1), s.config.system.x0);
  const auto stage = stage_model(spec, s.config.system, s.config.run.builder, now, history);
  std::vector<QpProblem> problems;
  if (s.config.run.semantics == BaselineSemantics::sr_baseline) {
    problems.push_back(build_sr_baseline(spec, s.config.system, s.config.run.builder, stage));
  } else {
    problems = build_problem(spec, s.config.system, s.config.run.builder, stage);
  }
  for (const auto& p : problems) {
    std::cout << "branch " << p.branch << ": " << p.variables() << " variables, " << p.constraints()
              << " constraints" << (p.P.isZero() ? " (LP)" : "") << '\n';
  }
}

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const ParseError& e) {
    spdlog::error("{}", e.what());
    return kExitInput;
  } catch (const FormulaError& e) {
    spdlog::error("formula: {}", e.what());
    return kExitInput;
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    return kExitInput;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"STL model predictive control with averaged robustness"};
  app.require_subcommand(1);

  std::string target;
  std::string output;
  std::optional<std::uint64_t> seed;
  std::vector<double> noise_std;
  bool slack = false;
  auto* run_cmd = app.add_subcommand("run", "Simulate a preset or config file and write the trace CSV");
  run_cmd->add_option("config", target, "Preset name or config path")->required();
  run_cmd->add_option("-o,--output", output, "Trace CSV path (default: config output.trace, else stdout)");
  run_cmd->add_option("--seed", seed, "Noise seed");
  run_cmd->add_option("--noise-std", noise_std, "Gaussian noise deviation, one value or one per state");
  run_cmd->add_flag("--slack", slack, "Enable slack relaxation when a step is infeasible");

  auto* check_cmd = app.add_subcommand("check", "Validate a config and print horizon, schedule and problem sizes");
  check_cmd->add_option("config", target, "Preset name or config path")->required();

  std::string trace_path;
  auto* monitor_cmd = app.add_subcommand("monitor", "Evaluate the config formula on a recorded trace");
  monitor_cmd->add_option("config", target, "Preset name or config path")->required();
  monitor_cmd->add_option("trace", trace_path, "Trace CSV")->required()->check(CLI::ExistingFile);

  app.add_subcommand("presets", "List built-in presets");

  CLI11_PARSE(app, argc, argv);

  if (app.got_subcommand("presets")) {
    for (const auto& n : preset_names()) std::cout << n << '\n';
    return 0;
  }

  return guarded([&]() -> int {
    auto config = resolve_config(target);
    if (seed) config.noise.seed = *seed;
    if (!noise_std.empty()) {
      config.noise.kind = NoiseModel::Kind::gaussian;
      config.noise.deviation = Eigen::Map<Eigen::VectorXd>(noise_std.data(), static_cast<Eigen::Index>(noise_std.size()));
    }
    if (slack) config.run.slack.enabled = true;
    const Scenario scenario = compile_scenario(std::move(config));
    spdlog::info("scenario {}: h_d = {}, N = {}", scenario.config.name, scenario.spec.horizon, scenario.config.horizon);

    if (app.got_subcommand("check")) {
      print_check(scenario);
      return 0;
    }

    if (app.got_subcommand("monitor")) {
      std::ifstream in(trace_path);
      const auto rec = read_trace(in);
      const Signal sig{rec.states, scenario.config.system.grid};
      const Schedule* sched = scenario.spec.schedule ? &*scenario.spec.schedule : nullptr;
      Trace t;
      t.summary.readout = readout(sig, 0, scenario.spec.phi, scenario.spec.table, sched);
      for (const auto& x : rec.states) t.steps.push_back({0, 0.0, x, {}, {}, StepStatus::final, 0.0, 0});
      for (std::size_t i = 0; i < rec.noise.size(); ++i) {
        if (rec.noise[i].allFinite()) t.steps[i].v = rec.noise[i];
      }
      t.summary.snr_db = snr_db(t);
      write_summary(t, std::cout, "");
      return 0;
    }

    const Trace trace = run_scenario(scenario);
    const std::string path = output.empty() ? scenario.config.trace_path : output;
    if (path.empty()) {
      emit_trace(trace, std::cout);
    } else {
      std::ofstream out(path);
      if (!out) throw ConfigError("cannot write '" + path + "'");
      emit_trace(trace, out);
      write_summary(trace, std::cout, "");
    }
    return 0;
  });
}
