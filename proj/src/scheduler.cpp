#include "stlmpc/scheduler.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace stlmpc {

Schedule compute_schedule(const std::vector<Interval>& windows, const SamplingGrid& grid) {
  if (windows.empty()) throw std::invalid_argument("schedule needs at least one eventually/until window");

  Schedule s;
  s.grid = grid;
  s.windows = windows;
  Step d_min = std::numeric_limits<Step>::max();
  Step k_first = std::numeric_limits<Step>::max();
  for (const auto& w : windows) {
    const StepRange r = omega_range(w.a, w.b, grid);
    if (r.empty()) throw std::invalid_argument("window contains no sample on the grid");
    s.offsets.push_back(r);
    d_min = std::min(d_min, r.last - r.first);
    k_first = std::min(k_first, r.first);
  }
  s.delta = d_min + 1;
  const auto n = static_cast<Step>(windows.size());
  if (n > s.delta) {
    throw InfeasibleSchedule("schedule infeasible: " + std::to_string(n) + " eventually/until operators but period " +
                             std::to_string(s.delta));
  }
  s.eta = s.delta / n;
  for (Step i = 0; i < n; ++i) s.baselines.push_back(k_first + i * s.eta);
  return s;
}

Step Schedule::k1_at(std::size_t op, Step k_prime) const {
  if (op >= baselines.size()) throw std::out_of_range("schedule has no operator " + std::to_string(op));
  const StepRange w = offsets[op].shifted(k_prime);
  const Step k0 = baselines[op];
  Step k1 = k0;
  if (w.first > k0) k1 = k0 + (w.first - k0 + delta - 1) / delta * delta;
  if (!w.contains(k1)) {
    throw std::logic_error("no scheduled witness for operator " + std::to_string(op) + " at step " +
                           std::to_string(k_prime));
  }
  return k1;
}

}  // namespace stlmpc
