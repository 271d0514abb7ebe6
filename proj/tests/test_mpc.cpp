#include "stlmpc/mpc.hpp"
#include "stlmpc/parser.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace stlmpc;

namespace {

LtiSystem two_tank() {
  LtiSystem s;
  s.A = (Eigen::MatrixXd(2, 2) << 0.79, 0.0, 0.176, 0.0296).finished();
  s.B = (Eigen::MatrixXd(2, 1) << 0.281, 0.0296).finished();
  s.x0 = Eigen::VectorXd::Zero(2);
  s.grid = SamplingGrid(12.0);
  return s;
}

CompiledSpec compile(const std::string& text, const LtiSystem& sys) {
  auto p = parse(text, {.state_dim = sys.state_dim()});
  return compile_spec(p.formula, p.table, sys.grid);
}

RunConfig case_study(int N) {
  RunConfig c;
  c.builder.horizon = N;
  c.builder.inputs.lower = Eigen::VectorXd::Zero(1);
  c.builder.inputs.upper = Eigen::VectorXd::Constant(1, 6.0);
  c.steps = 50;
  return c;
}

TraceStep row(double x, double v) {
  TraceStep s;
  s.x = Eigen::VectorXd::Constant(1, x);
  s.v = Eigen::VectorXd::Constant(1, v);
  return s;
}

}  // namespace

TEST(Snr, Examples) {
  Trace t;
  t.steps = {row(1, 1), row(-1, 1)};
  EXPECT_NEAR(snr_db(t), 0.0, 1e-12);
  t.steps = {row(std::sqrt(10.0), 1), row(std::sqrt(10.0), -1)};
  EXPECT_NEAR(snr_db(t), 10.0, 1e-12);
  t.steps = {row(1, 0)};
  EXPECT_TRUE(std::isinf(snr_db(t)));
}

TEST(Mpc, UntilCaseStudySatisfied) {
  const auto sys = two_tank();
  const auto spec = compile("G[0,inf]((x1 >= 0) U[120,240] (x1 <= 5))", sys);
  const auto trace = run(sys, spec, case_study(20), {});
  ASSERT_EQ(trace.steps.size(), 51u);
  EXPECT_TRUE(trace.summary.readout.satisfied);
  EXPECT_TRUE(std::isinf(trace.summary.snr_db));
  for (std::size_t k = 0; k + 1 < trace.steps.size(); ++k) EXPECT_EQ(trace.steps[k].status, StepStatus::optimal);
  EXPECT_EQ(trace.steps.back().status, StepStatus::final);
}

TEST(Mpc, ClosedLoopHoldsAtEveryCheckableStep) {
  const auto sys = two_tank();
  const auto spec = compile("G[0,inf](F[120,240](x1 >= 2) & (x1 <= 4) U[180,420] (x2 <= 2.5))", sys);
  const auto trace = run(sys, spec, case_study(35), {});
  ASSERT_TRUE(trace.summary.readout.satisfied);
  const auto z = PredicateTrace::of(trace.signal(sys.grid), spec.table);
  const StepRange checkable = checkable_steps(spec.phi, 0, z.last(), sys.grid);
  ASSERT_FALSE(checkable.empty());
  for (Step k = checkable.first; k <= checkable.last; ++k) EXPECT_TRUE(eval_bool(z, k, spec.theta())) << k;
}

TEST(Mpc, EventFormulaIdlesThenReachesLevel) {
  const auto sys = two_tank();
  const auto spec = compile("event@120 => F[120,240](x1 >= 2)", sys);
  const auto trace = run(sys, spec, case_study(20), {});
  EXPECT_TRUE(trace.summary.readout.satisfied);
  for (Step k = 0; k < 10; ++k) {
    EXPECT_EQ(trace.steps[static_cast<std::size_t>(k)].status, StepStatus::idle);
    EXPECT_EQ(trace.steps[static_cast<std::size_t>(k)].u(0), 0.0);
  }
  bool crossed = false;
  for (Step k = 20; k <= 30; ++k) crossed = crossed || trace.steps[static_cast<std::size_t>(k)].x(0) >= 2.0;
  EXPECT_TRUE(crossed);
  EXPECT_EQ(trace.steps[31].status, StepStatus::idle);
}

TEST(Mpc, FrozenSystemHoldsInputsAtZero) {
  LtiSystem sys;
  sys.A = Eigen::MatrixXd::Identity(1, 1);
  sys.B = Eigen::MatrixXd::Zero(1, 1);
  sys.x0 = Eigen::VectorXd::Constant(1, 1.5);
  sys.grid = SamplingGrid(1.0);
  const auto spec = compile("G[0,inf](G[0,2](x1 >= 1))", sys);
  RunConfig cfg;
  cfg.builder.horizon = 3;
  cfg.builder.input_weight = Eigen::MatrixXd::Identity(1, 1);
  cfg.steps = 6;
  const auto trace = run(sys, spec, cfg, {});
  EXPECT_TRUE(trace.summary.readout.satisfied);
  for (std::size_t k = 0; k + 1 < trace.steps.size(); ++k) EXPECT_NEAR(trace.steps[k].u(0), 0.0, 1e-6);
}

TEST(Mpc, SeededNoiseIsDeterministicAndReplays) {
  const auto sys = two_tank();
  const auto spec = compile("G[0,inf]((x1 >= 0) U[120,240] (x1 <= 5))", sys);
  auto cfg = case_study(20);
  cfg.slack.enabled = true;
  NoiseModel noise{NoiseModel::Kind::gaussian, (Eigen::VectorXd(2) << 0.3, 0.06).finished(), 42};
  const auto a = run(sys, spec, cfg, noise);
  const auto b = run(sys, spec, cfg, noise);
  ASSERT_EQ(a.steps.size(), b.steps.size());
  for (std::size_t k = 0; k < a.steps.size(); ++k) {
    EXPECT_EQ(a.steps[k].x, b.steps[k].x);
    EXPECT_EQ(a.steps[k].u, b.steps[k].u);
  }
  for (std::size_t k = 0; k + 1 < a.steps.size(); ++k) {
    EXPECT_EQ(a.steps[k + 1].x, sys.step(a.steps[k].x, a.steps[k].u) + a.steps[k].v);
  }
  EXPECT_TRUE(std::isfinite(a.summary.snr_db));
}

TEST(Mpc, RelaxedOnlyWhenPlainProblemIsInfeasible) {
  const auto sys = two_tank();
  const auto spec = compile("G[0,inf]((x1 >= 0) U[120,240] (x1 <= 5))", sys);
  auto cfg = case_study(20);
  cfg.slack.enabled = true;
  int relaxed = 0;
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    NoiseModel noise{NoiseModel::Kind::gaussian, (Eigen::VectorXd(2) << 1.2, 0.24).finished(), seed};
    const auto t = run(sys, spec, cfg, noise);
    std::vector<Eigen::VectorXd> hist;
    for (const auto& st : t.steps) {
      hist.push_back(st.x);
      if (st.status != StepStatus::relaxed) continue;
      ++relaxed;
      const auto stage = stage_model(spec, sys, cfg.builder, st.k, hist);
      for (const auto& p : build_problem(spec, sys, cfg.builder, stage)) EXPECT_FALSE(solve(p).solved());
    }
  }
  EXPECT_GT(relaxed, 0);
}

TEST(Mpc, InfeasibleWithoutSlackFails) {
  const auto sys = two_tank();
  const auto spec = compile("G[0,inf](x1 <= -1)", sys);
  EXPECT_THROW(run(sys, spec, case_study(1), {}), MpcError);
  auto cfg = case_study(1);
  cfg.slack.enabled = true;
  const auto t = run(sys, spec, cfg, {});
  EXPECT_EQ(t.summary.relaxed_steps, 50);
  EXPECT_FALSE(t.summary.readout.satisfied);
}

TEST(Mpc, ConfigurationErrors) {
  const auto sys = two_tank();
  const auto spec = compile("G[0,inf](F[0,120](x1 >= 1))", sys);
  EXPECT_THROW(run(sys, spec, case_study(5), {}), std::invalid_argument);
  const auto ev = compile("event@120 => F[120,240](x1 >= 2)", sys);
  auto cfg = case_study(20);
  cfg.steps = 25;
  EXPECT_THROW(run(sys, ev, cfg, {}), std::invalid_argument);
  NoiseModel bad{NoiseModel::Kind::gaussian, Eigen::VectorXd::Constant(3, 0.1), 1};
  EXPECT_THROW(run(sys, ev, case_study(20), bad), std::invalid_argument);
}
