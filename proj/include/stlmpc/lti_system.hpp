#pragma once

#include "stlmpc/time_grid.hpp"

#include <Eigen/Dense>

namespace stlmpc {

// x(k+1) = A x(k) + B u(k).
struct LtiSystem {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::VectorXd x0;
  SamplingGrid grid;

  [[nodiscard]] Eigen::Index state_dim() const noexcept { return A.rows(); }
  [[nodiscard]] Eigen::Index input_dim() const noexcept { return B.cols(); }
  [[nodiscard]] Eigen::VectorXd step(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const { return A * x + B * u; }

  // Throws std::invalid_argument on inconsistent dimensions.
  void validate() const;
};

}  // namespace stlmpc
