#pragma once

// Accelerated proximal gradient on the dual of
//   min 0.5 x'Px + q'x  s.t.  l <= Ax <= u,   P positive definite.
// Any dual point gives a lower bound on the optimum (weak duality), so
// f(x_feasible) - best_dual bounds the suboptimality of x_feasible.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace stlmpc::oracle {

struct DualResult {
  double best_dual = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd x;  // primal point recovered from the best dual iterate
  Eigen::VectorXd y;
};

inline DualResult dual_fista(const Eigen::MatrixXd& P, const Eigen::VectorXd& q, const Eigen::MatrixXd& A,
                             const Eigen::VectorXd& l, const Eigen::VectorXd& u, int iterations) {
  const Eigen::LLT<Eigen::MatrixXd> chol(P);
  const Eigen::MatrixXd G = A * chol.solve(A.transpose());
  const double L = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(G, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
  const double t = 1.0 / std::max(L, 1e-12);

  auto primal_of = [&](const Eigen::VectorXd& y) -> Eigen::VectorXd { return -chol.solve(q + A.transpose() * y); };
  auto dual_value = [&](const Eigen::VectorXd& y) {
    const Eigen::VectorXd x = primal_of(y);
    double support = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      if (y(i) > 0) support += y(i) * u(i);
      if (y(i) < 0) support += y(i) * l(i);
    }
    return 0.5 * x.dot(P * x) + q.dot(x) + y.dot(A * x) - support;
  };
  auto prox = [&](const Eigen::VectorXd& v) {
    // Moreau decomposition: prox of t * support(C) is v - t * proj_C(v / t).
    return Eigen::VectorXd(v - t * (v / t).cwiseMax(l).cwiseMin(u));
  };

  DualResult best;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(A.rows());
  Eigen::VectorXd w = y;
  double theta = 1.0;
  for (int k = 0; k < iterations; ++k) {
    const Eigen::VectorXd y_next = prox(w + t * (A * primal_of(w)));
    const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    w = y_next + ((theta - 1.0) / theta_next) * (y_next - y);
    y = y_next;
    theta = theta_next;
    if (k % 50 == 0 || k + 1 == iterations) {
      const double g = dual_value(y);
      if (g > best.best_dual) {
        best.best_dual = g;
        best.y = y;
      }
    }
  }
  best.x = primal_of(best.y);
  return best;
}

}  // namespace stlmpc::oracle
