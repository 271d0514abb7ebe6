#pragma once

#include "stlmpc/qp_problem.hpp"
#include "support/generators.hpp"

#include <limits>

namespace stlmpc::gen {

// Strictly convex QP with a known interior-ish feasible point; some bounds one-sided.
inline QpProblem random_qp(Rng& rng, int n, int m) {
  const double inf = std::numeric_limits<double>::infinity();
  QpProblem p;
  const Eigen::MatrixXd L = Eigen::MatrixXd::NullaryExpr(n, n, [&]() { return uniform_real(rng, -1, 1); });
  p.P = L * L.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n);
  p.q = Eigen::VectorXd::NullaryExpr(n, [&]() { return uniform_real(rng, -5, 5); });
  p.A = Eigen::MatrixXd::NullaryExpr(m, n, [&]() { return uniform_real(rng, -2, 2); });
  const Eigen::VectorXd x0 = Eigen::VectorXd::NullaryExpr(n, [&]() { return uniform_real(rng, -1, 1); });
  const Eigen::VectorXd ax = p.A * x0;
  p.lower.resize(m);
  p.upper.resize(m);
  for (int i = 0; i < m; ++i) {
    const int kind = uniform_int(rng, 0, 3);
    p.lower(i) = kind == 1 ? -inf : ax(i) - uniform_real(rng, 0.0, 1.0);
    p.upper(i) = kind == 2 ? inf : ax(i) + uniform_real(rng, 0.0, 1.0);
  }
  p.layout.inputs = n;
  p.layout.input_dim = 1;
  return p;
}

}  // namespace stlmpc::gen
