#pragma once

#include <cstdint>
#include <vector>

namespace stlmpc {

using Step = std::int64_t;

// Uniform sampling: step k sits at time k * period seconds.
struct SamplingGrid {
  double period = 1.0;

  explicit SamplingGrid(double period_s = 1.0);

  [[nodiscard]] double time(Step k) const noexcept { return static_cast<double>(k) * period; }
};

// Closed range of step indices. Empty when first > last.
struct StepRange {
  Step first = 0;
  Step last = -1;

  [[nodiscard]] bool empty() const noexcept { return first > last; }
  [[nodiscard]] Step size() const noexcept { return empty() ? 0 : last - first + 1; }
  [[nodiscard]] bool contains(Step k) const noexcept { return k >= first && k <= last; }
  [[nodiscard]] StepRange shifted(Step by) const noexcept { return {first + by, last + by}; }

  friend bool operator==(const StepRange&, const StepRange&) = default;
};

// {k >= 0 : a <= kT <= b} as a contiguous range. Throws on a < 0 or a > b.
StepRange omega_range(double a, double b, const SamplingGrid& grid);

// Same set, materialized in ascending order.
std::vector<Step> omega(double a, double b, const SamplingGrid& grid);

// Steps k that satisfy tau(k0) + a <= tau(k) <= tau(k0) + b.
// Since the grid is uniform this is omega(a, b) shifted by k0.
StepRange window_at(Step k0, double a, double b, const SamplingGrid& grid);

}  // namespace stlmpc
