#pragma once

#include "stlmpc/formula.hpp"
#include "stlmpc/time_grid.hpp"

#include <stdexcept>
#include <vector>

namespace stlmpc {

class InfeasibleSchedule : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Witness times for the eventually/until operators of a formula. Operator i is
// served by the grid {baselines[i] + j * delta : j >= 0}; at evaluation step k'
// it uses the first grid point inside its window.
struct Schedule {
  Step delta = 1;
  Step eta = 1;
  std::vector<Step> baselines;
  std::vector<Interval> windows;
  std::vector<StepRange> offsets;  // omega(a_i, b_i) for each window
  SamplingGrid grid;

  [[nodiscard]] std::size_t size() const noexcept { return baselines.size(); }
  [[nodiscard]] Step k1_at(std::size_t op, Step k_prime) const;
};

Schedule compute_schedule(const std::vector<Interval>& windows, const SamplingGrid& grid);

}  // namespace stlmpc
