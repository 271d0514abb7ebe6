#include "stlmpc/lti_system.hpp"

#include <stdexcept>

namespace stlmpc {

void LtiSystem::validate() const {
  if (A.rows() == 0 || A.rows() != A.cols()) throw std::invalid_argument("A must be a nonempty square matrix");
  if (B.rows() != A.rows() || B.cols() == 0) throw std::invalid_argument("B must have one row per state and at least one column");
  if (x0.size() != A.rows()) throw std::invalid_argument("x0 must have one entry per state");
  if (!A.allFinite() || !B.allFinite() || !x0.allFinite()) throw std::invalid_argument("system data must be finite");
}

}  // namespace stlmpc
