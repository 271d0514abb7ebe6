#include "stlmpc/scheduler.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace stlmpc;

TEST(Schedule, TwoEqualWindows) {
  const Schedule s = compute_schedule({{5, 15}, {5, 15}}, SamplingGrid(1));
  EXPECT_EQ(s.delta, 11);
  EXPECT_EQ(s.eta, 5);
  EXPECT_EQ(s.baselines, (std::vector<Step>{5, 10}));
}

TEST(Schedule, SingleWindow) {
  const Schedule s = compute_schedule({{5, 15}}, SamplingGrid(1));
  EXPECT_EQ(s.delta, 11);
  EXPECT_EQ(s.eta, 11);
  EXPECT_EQ(s.baselines, std::vector<Step>{5});
}

TEST(Schedule, InfeasibleWhenTooManyOperators) {
  EXPECT_THROW((void)compute_schedule({{0, 0}, {0, 0}}, SamplingGrid(1)), InfeasibleSchedule);
  EXPECT_THROW((void)compute_schedule({}, SamplingGrid(1)), std::invalid_argument);
  EXPECT_THROW((void)compute_schedule({{1, 2}}, SamplingGrid(5)), std::invalid_argument);
}

TEST(Schedule, ShortestWindowSetsPeriod) {
  const Schedule s = compute_schedule({{120, 240}, {180, 420}}, SamplingGrid(12));
  EXPECT_EQ(s.delta, 11);
  EXPECT_EQ(s.eta, 5);
  EXPECT_EQ(s.baselines, (std::vector<Step>{10, 15}));
}

TEST(K1, BaselineFifteen) {
  Schedule s = compute_schedule({{5, 15}}, SamplingGrid(1));
  s.baselines = {15};
  for (Step k = 0; k <= 10; ++k) EXPECT_EQ(s.k1_at(0, k), 15) << k;
  for (Step k = 11; k <= 20; ++k) EXPECT_EQ(s.k1_at(0, k), 26) << k;
}

TEST(K1, BaselineFive) {
  const Schedule s = compute_schedule({{5, 15}}, SamplingGrid(1));
  EXPECT_EQ(s.k1_at(0, 0), 5);
  EXPECT_EQ(s.k1_at(0, 10), 16);
  EXPECT_THROW((void)s.k1_at(1, 0), std::out_of_range);
}

namespace {

std::vector<Schedule> random_schedules() {
  std::mt19937_64 rng(99);
  std::vector<Schedule> out;
  while (out.size() < 200) {
    const double T = std::uniform_int_distribution<int>(1, 3)(rng);
    const int n = std::uniform_int_distribution<int>(1, 4)(rng);
    std::vector<Interval> ws;
    for (int i = 0; i < n; ++i) {
      const int a = std::uniform_int_distribution<int>(0, 20)(rng);
      const int b = a + std::uniform_int_distribution<int>(0, 15)(rng);
      ws.push_back({a * T, b * T});
    }
    try {
      out.push_back(compute_schedule(ws, SamplingGrid(T)));
    } catch (const InfeasibleSchedule&) {
    }
  }
  return out;
}

}  // namespace

TEST(K1, WitnessAlwaysInsideWindow) {
  for (const auto& s : random_schedules()) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      for (Step k = 0; k < 10 * s.delta; ++k) {
        const Step k1 = s.k1_at(i, k);
        EXPECT_TRUE(s.offsets[i].shifted(k).contains(k1));
      }
    }
  }
}

TEST(K1, OperatorsUseDistinctSlots) {
  for (const auto& s : random_schedules()) {
    for (Step k = 0; k < 3 * s.delta; ++k) {
      for (std::size_t i = 0; i < s.size(); ++i) {
        for (std::size_t j = i + 1; j < s.size(); ++j) EXPECT_NE(s.k1_at(i, k), s.k1_at(j, k));
      }
    }
  }
}

TEST(K1, PeriodicOnceWindowsPassBaseline) {
  // Before the window start passes k0 - delta, the first grid point is k0
  // itself, which is why periodicity is asserted from there on.
  for (const auto& s : random_schedules()) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      const Step from = std::max<Step>(0, s.baselines[i] - s.delta - s.offsets[i].first + 1);
      for (Step k = from; k < from + 5 * s.delta; ++k) EXPECT_EQ(s.k1_at(i, k + s.delta), s.k1_at(i, k) + s.delta);
    }
  }
}
