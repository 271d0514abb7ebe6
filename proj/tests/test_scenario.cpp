#include "stlmpc/scenario.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

using namespace stlmpc;

namespace {

std::string minimal_config(const std::string& formula) {
  return "[system]\nA = 1\nB = 1\nx0 = 0\nperiod = 1\n[formula]\ntext = " + formula +
         "\n[controller]\nhorizon = 2\nduration = 3\ninput_lower = -1\ninput_upper = 1\n";
}

ScenarioConfig from_text(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, "inline");
}

std::vector<std::string> data_lines(const std::string& csv) {
  std::vector<std::string> out;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') out.push_back(line);
  }
  return out;
}

}  // namespace

TEST(Presets, AllShipped) {
  const auto names = preset_names();
  for (const char* n : {"two_tank_phi1", "two_tank_phi2", "two_tank_phi3", "example2_dasr", "example2_sr"}) {
    EXPECT_NE(std::find(names.begin(), names.end(), n), names.end()) << n;
  }
  for (const auto& n : names) EXPECT_NO_THROW(compile_scenario(resolve_config(n))) << n;
}

TEST(Presets, TwoTankUntilTrace) {
  const auto s = compile_scenario(resolve_config("two_tank_phi2"));
  const auto trace = run_scenario(s);
  std::ostringstream out;
  emit_trace(trace, out);
  EXPECT_EQ(data_lines(out.str()).size(), 51u);
  EXPECT_NE(out.str().find("# satisfied = true"), std::string::npos);
}

TEST(Presets, ExampleTwoPrd) {
  const auto trace = run_scenario(compile_scenario(resolve_config("example2_dasr")));
  ASSERT_TRUE(trace.summary.readout.prd);
  EXPECT_NEAR(*trace.summary.readout.prd, 5.12, 0.10);
}

TEST(Config, ParsesSections) {
  const auto c = from_text(minimal_config("G[0,inf](x1 >= 0)") +
                           "mode = open_loop\ninput_weight = 0.5\n[constraint.budget]\ncoefficients = ones\nupper = 4\n"
                           "[noise]\nkind = gaussian\ndeviation = 0.2\nseed = 9\n[slack]\nenabled = true\nweight = 50\n");
  EXPECT_EQ(c.run.steps, 3);
  EXPECT_EQ(c.run.mode, ControlMode::open_loop);
  EXPECT_EQ(c.run.builder.input_weight(0, 0), 0.5);
  ASSERT_EQ(c.run.builder.inputs.linear.size(), 1u);
  EXPECT_EQ(c.run.builder.inputs.linear[0].coefficients.size(), 2);
  EXPECT_EQ(c.run.builder.inputs.linear[0].upper, 4.0);
  EXPECT_EQ(c.noise.kind, NoiseModel::Kind::gaussian);
  EXPECT_EQ(c.noise.seed, 9u);
  EXPECT_TRUE(c.run.slack.enabled);
  EXPECT_EQ(*c.run.slack.weight, 50.0);
}

TEST(Config, Errors) {
  EXPECT_THROW(from_text("[system]\nA = 1\n"), ConfigError);
  EXPECT_THROW(from_text(minimal_config("x1 >= 0") + "mode = sideways\n"), ConfigError);
  EXPECT_THROW(from_text("[system]\nA = 1 0; 1\nB = 1\nperiod = 1\n"), ConfigError);
  auto bad_duration = minimal_config("G[0,inf](x1 >= 0)");
  bad_duration.replace(bad_duration.find("duration = 3"), 12, "duration = 2.5");
  EXPECT_THROW(from_text(bad_duration), ConfigError);
  try {
    compile_scenario(from_text(minimal_config("G[0,inf](x1 >= 0 &)")));
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_GT(e.position(), 0u);
    EXPECT_NE(std::string(e.what()).find("position"), std::string::npos);
  }
  EXPECT_THROW(compile_scenario(from_text(minimal_config("G[0,inf](G[0,5](x1 >= 0))"))), ConfigError);
  EXPECT_THROW(resolve_config("/nonexistent/config.ini"), ConfigError);
}

TEST(TraceCsv, ShapeAndSummary) {
  Trace t;
  for (Step k = 0; k < 3; ++k) {
    TraceStep s;
    s.k = k;
    s.t = static_cast<double>(k);
    s.x = Eigen::Vector2d(0.1 * k, -0.2 * k);
    s.u = Eigen::VectorXd::Constant(1, 1.0 / 3.0);
    s.v = Eigen::Vector2d(1e-3, 0.0);
    s.status = StepStatus::optimal;
    s.objective = 2.0;
    t.steps.push_back(s);
  }
  TraceStep last;
  last.k = 3;
  last.t = 3;
  last.x = Eigen::Vector2d(1.0 / 7.0, 2.0 / 3.0);
  last.status = StepStatus::final;
  last.objective = std::numeric_limits<double>::quiet_NaN();
  t.steps.push_back(last);

  std::ostringstream out;
  emit_trace(t, out);
  const std::string csv = out.str();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "k,t,x1,x2,u1,v1,v2,status,objective");
  const auto lines = data_lines(csv);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(std::count(lines[0].begin(), lines[0].end(), ','), 8);
  std::istringstream body(csv);
  std::string line;
  int summary = 0;
  while (std::getline(body, line)) {
    if (line[0] == '#') {
      EXPECT_EQ(line.substr(0, 2), "# ");
      ++summary;
    }
  }
  EXPECT_GT(summary, 0);

  std::istringstream in(csv);
  const auto rec = read_trace(in);
  ASSERT_EQ(rec.states.size(), 4u);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(rec.states[k], t.steps[k].x);
  EXPECT_EQ(rec.inputs[0](0), 1.0 / 3.0);
  EXPECT_TRUE(std::isnan(rec.inputs[3](0)));
  EXPECT_EQ(rec.status[3], "final");
}

TEST(TraceCsv, IdenticalConfigIdenticalOutput) {
  auto text = minimal_config("G[0,inf](F[0,1](x1 >= 0.5))") + "[noise]\nkind = gaussian\ndeviation = 0.1\nseed = 3\n[slack]\nenabled = true\n";
  std::ostringstream a;
  std::ostringstream b;
  emit_trace(run_scenario(compile_scenario(from_text(text))), a);
  emit_trace(run_scenario(compile_scenario(from_text(text))), b);
  EXPECT_EQ(a.str(), b.str());
}
