#include "stlmpc/time_grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace stlmpc {

namespace {

// Interval bounds usually come from decimal text (e.g. 0.1 * 3), so a
// relative slack keeps 0.3 inside Omega(0.3, 0.3) on a 0.1 grid.
constexpr double kRatioSlack = 1e-9;

}  // namespace

SamplingGrid::SamplingGrid(double period_s) : period(period_s) {
  if (!(period_s > 0.0) || !std::isfinite(period_s)) {
    throw std::invalid_argument("sampling period must be positive and finite, got " +
                                std::to_string(period_s));
  }
}

StepRange omega_range(double a, double b, const SamplingGrid& grid) {
  if (!(a >= 0.0) || !(b >= a) || !std::isfinite(b)) {
    throw std::invalid_argument("omega needs 0 <= a <= b < inf, got [" + std::to_string(a) + ", " +
                                std::to_string(b) + "]");
  }
  const double lo = a / grid.period;
  const double hi = b / grid.period;
  const auto first = static_cast<Step>(std::ceil(lo - kRatioSlack * std::max(1.0, lo)));
  const auto last = static_cast<Step>(std::floor(hi + kRatioSlack * std::max(1.0, hi)));
  return {std::max<Step>(first, 0), last};
}

std::vector<Step> omega(double a, double b, const SamplingGrid& grid) {
  const StepRange r = omega_range(a, b, grid);
  std::vector<Step> out;
  out.reserve(static_cast<std::size_t>(r.size()));
  for (Step k = r.first; k <= r.last; ++k) out.push_back(k);
  return out;
}

StepRange window_at(Step k0, double a, double b, const SamplingGrid& grid) {
  return omega_range(a, b, grid).shifted(k0);
}

}  // namespace stlmpc
