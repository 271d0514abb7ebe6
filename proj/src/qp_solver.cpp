#include "stlmpc/qp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace stlmpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMinScale = 1e-4;
constexpr double kMaxScale = 1e4;
constexpr double kRhoMin = 1e-6;
constexpr double kRhoMax = 1e6;
constexpr double kEqualityRhoFactor = 1e3;

double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

double clamp_scale(double norm) {
  if (norm < kMinScale) return 1.0;
  return std::min(norm, kMaxScale);
}

void check_convex(const Eigen::MatrixXd& P) {
  if (P.size() == 0) return;
  const double scale = std::max(1.0, P.cwiseAbs().maxCoeff());
  if ((P - P.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw std::invalid_argument("quadratic block is not symmetric");
  }
  if (P.isZero(0.0)) return;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(P, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-9 * scale) {
    throw std::invalid_argument("quadratic block is not positive semidefinite");
  }
}

struct Scaling {
  Eigen::VectorXd D;  // x = D * x_scaled
  Eigen::VectorXd E;  // A_scaled = E A D
  double c = 1.0;     // cost scale
};

class Admm {
 public:
  Admm(const QpProblem& p, const SolverSettings& s) : p_(p), s_(s), n_(p.variables()), m_(p.constraints()) {
    equilibrate();
    x_ = Eigen::VectorXd::Zero(n_);
    z_ = Eigen::VectorXd::Zero(m_);
    y_ = Eigen::VectorXd::Zero(m_);
    z_ = z_.cwiseMax(l_).cwiseMin(u_);
    rho_base_ = s.rho;
    set_rho();
    factor();
  }

  QpSolution run() {
    QpSolution out;
    out.layout = p_.layout;
    for (int it = 1; it <= s_.max_iterations; ++it) {
      const Eigen::VectorXd x_prev = x_;
      const Eigen::VectorXd y_prev = y_;
      step();
      if (it % s_.check_interval != 0 && it != s_.max_iterations) continue;

      const Residuals r = residuals(x_, z_, y_);
      if (r.primal <= r.eps_primal && r.dual <= r.eps_dual) {
        finish(out, SolveStatus::optimal, it, r);
        if (s_.polish) try_polish(out);
        return out;
      }
      if (s_.polish && try_polish(out)) {
        out.iterations = it;
        return out;
      }
      if (primal_infeasible(y_ - y_prev)) {
        finish(out, SolveStatus::infeasible, it, r);
        return out;
      }
      if (dual_infeasible(x_ - x_prev)) {
        finish(out, SolveStatus::dual_infeasible, it, r);
        return out;
      }
      if (s_.adaptive_rho) adapt_rho(r);
    }
    finish(out, SolveStatus::iteration_limit, s_.max_iterations, residuals(x_, z_, y_));
    return out;
  }

 private:
  struct Residuals {
    double primal = 0, dual = 0, eps_primal = 0, eps_dual = 0;
    // Scaled-space norms for the rho update.
    double primal_scaled = 0, dual_scaled = 0, primal_ref = 1, dual_ref = 1;
  };

  void equilibrate() {
    Ps_ = p_.P;
    qs_ = p_.q;
    As_ = p_.A;
    sc_.D = Eigen::VectorXd::Ones(n_);
    sc_.E = Eigen::VectorXd::Ones(m_);
    for (int k = 0; k < s_.scaling_iterations; ++k) {
      Eigen::VectorXd d(n_), e(m_);
      for (Eigen::Index j = 0; j < n_; ++j) {
        double nrm = Ps_.col(j).lpNorm<Eigen::Infinity>();
        if (m_) nrm = std::max(nrm, As_.col(j).lpNorm<Eigen::Infinity>());
        d(j) = 1.0 / std::sqrt(clamp_scale(nrm));
      }
      for (Eigen::Index i = 0; i < m_; ++i) e(i) = 1.0 / std::sqrt(clamp_scale(As_.row(i).lpNorm<Eigen::Infinity>()));
      Ps_ = d.asDiagonal() * Ps_ * d.asDiagonal();
      qs_ = d.cwiseProduct(qs_);
      As_ = e.asDiagonal() * As_ * d.asDiagonal();
      sc_.D = sc_.D.cwiseProduct(d);
      sc_.E = sc_.E.cwiseProduct(e);

      double pnorm = 0.0;
      for (Eigen::Index j = 0; j < n_; ++j) pnorm += Ps_.col(j).lpNorm<Eigen::Infinity>();
      pnorm = n_ ? pnorm / static_cast<double>(n_) : 0.0;
      const double c = 1.0 / clamp_scale(std::max(pnorm, inf_norm(qs_)));
      Ps_ *= c;
      qs_ *= c;
      sc_.c *= c;
    }
    l_ = sc_.E.cwiseProduct(p_.lower);
    u_ = sc_.E.cwiseProduct(p_.upper);
  }

  void set_rho() {
    rho_ = Eigen::VectorXd(m_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (std::isinf(p_.lower(i)) && std::isinf(p_.upper(i))) {
        rho_(i) = kRhoMin;
      } else if (p_.lower(i) == p_.upper(i)) {
        rho_(i) = kEqualityRhoFactor * rho_base_;
      } else {
        rho_(i) = rho_base_;
      }
    }
  }

  void factor() {
    Eigen::MatrixXd K = Ps_;
    K.diagonal().array() += s_.sigma;
    if (m_) K.noalias() += As_.transpose() * rho_.asDiagonal() * As_;
    llt_.compute(K);
    if (llt_.info() != Eigen::Success) throw std::runtime_error("ADMM linear system factorization failed");
  }

  void step() {
    const Eigen::VectorXd rhs = s_.sigma * x_ - qs_ + As_.transpose() * (rho_.cwiseProduct(z_) - y_);
    const Eigen::VectorXd xt = llt_.solve(rhs);
    const Eigen::VectorXd zt = As_ * xt;
    x_ = s_.alpha * xt + (1.0 - s_.alpha) * x_;
    const Eigen::VectorXd zr = s_.alpha * zt + (1.0 - s_.alpha) * z_;
    const Eigen::VectorXd z_new = (zr + y_.cwiseQuotient(rho_)).cwiseMax(l_).cwiseMin(u_);
    y_ += rho_.cwiseProduct(zr - z_new);
    z_ = z_new;
  }

  Residuals residuals(const Eigen::VectorXd& x, const Eigen::VectorXd& z, const Eigen::VectorXd& y) const {
    Residuals r;
    const Eigen::VectorXd Ax = As_ * x;
    const Eigen::VectorXd Px = Ps_ * x;
    const Eigen::VectorXd Aty = As_.transpose() * y;
    const Eigen::VectorXd Einv = sc_.E.cwiseInverse();
    const Eigen::VectorXd Dinv = sc_.D.cwiseInverse();
    r.primal = inf_norm(Einv.cwiseProduct(Ax - z));
    r.dual = inf_norm(Dinv.cwiseProduct(Px + qs_ + Aty)) / sc_.c;
    r.eps_primal = s_.eps_abs + s_.eps_rel * std::max(inf_norm(Einv.cwiseProduct(Ax)), inf_norm(Einv.cwiseProduct(z)));
    r.eps_dual = s_.eps_abs + s_.eps_rel / sc_.c *
                                  std::max({inf_norm(Dinv.cwiseProduct(Px)), inf_norm(Dinv.cwiseProduct(Aty)),
                                            inf_norm(Dinv.cwiseProduct(qs_))});
    r.primal_scaled = inf_norm(Ax - z);
    r.dual_scaled = inf_norm(Px + qs_ + Aty);
    r.primal_ref = std::max({inf_norm(Ax), inf_norm(z), 1e-12});
    r.dual_ref = std::max({inf_norm(Px), inf_norm(Aty), inf_norm(qs_), 1e-12});
    return r;
  }

  void adapt_rho(const Residuals& r) {
    if (m_ == 0) return;
    const double ratio = (r.primal_scaled / r.primal_ref) / std::max(r.dual_scaled / r.dual_ref, 1e-30);
    const double rho_new = std::clamp(rho_base_ * std::sqrt(ratio), kRhoMin, kRhoMax);
    if (rho_new > 5.0 * rho_base_ || rho_new < 0.2 * rho_base_) {
      rho_base_ = rho_new;
      set_rho();
      factor();
    }
  }

  // A^T dy ~ 0 with u'max(dy,0) + l'min(dy,0) < 0 certifies an empty feasible set.
  bool primal_infeasible(const Eigen::VectorXd& dy_scaled) const {
    if (m_ == 0) return false;
    Eigen::VectorXd dy = sc_.E.cwiseProduct(dy_scaled);
    const double nrm = inf_norm(dy);
    if (nrm < 1e-30) return false;
    const double tol = s_.eps_infeasible * nrm;
    double support = 0.0;
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (std::abs(dy(i)) <= tol) {
        dy(i) = 0.0;
        continue;
      }
      const double bound = dy(i) > 0 ? p_.upper(i) : p_.lower(i);
      if (std::isinf(bound)) return false;
      support += bound * dy(i);
    }
    return inf_norm(p_.A.transpose() * dy) <= tol && support < -tol;
  }

  // P dx ~ 0, q'dx < 0 and A dx inside the recession cone certifies unboundedness.
  bool dual_infeasible(const Eigen::VectorXd& dx_scaled) const {
    const Eigen::VectorXd dx = sc_.D.cwiseProduct(dx_scaled);
    const double nrm = inf_norm(dx);
    if (nrm < 1e-30) return false;
    const double tol = s_.eps_infeasible * nrm;
    if (inf_norm(p_.P * dx) > tol || p_.q.dot(dx) >= -tol) return false;
    const Eigen::VectorXd Adx = p_.A * dx;
    for (Eigen::Index i = 0; i < m_; ++i) {
      const bool lo = std::isfinite(p_.lower(i));
      const bool up = std::isfinite(p_.upper(i));
      if (up && Adx(i) > tol) return false;
      if (lo && Adx(i) < -tol) return false;
    }
    return true;
  }

  void finish(QpSolution& out, SolveStatus status, int it, const Residuals& r) const {
    out.status = status;
    out.iterations = it;
    out.x = sc_.D.cwiseProduct(x_);
    out.y = sc_.E.cwiseProduct(y_) / sc_.c;
    out.primal_residual = r.primal;
    out.dual_residual = r.dual;
    out.polished = false;
    out.objective = objective(out.x);
  }

  double objective(const Eigen::VectorXd& x) const { return 0.5 * x.dot(p_.P * x) + p_.q.dot(x) + p_.constant; }

  // Solve the equality-constrained problem on the guessed active set; accept it
  // only when it meets the tolerances and the multiplier signs are right.
  bool try_polish(QpSolution& out) {
    std::vector<Eigen::Index> act;
    std::vector<int> side;  // -1 lower, +1 upper, 0 equality
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (l_(i) == u_(i)) {
        act.push_back(i);
        side.push_back(0);
      } else if (z_(i) - l_(i) < -y_(i)) {
        act.push_back(i);
        side.push_back(-1);
      } else if (u_(i) - z_(i) < y_(i)) {
        act.push_back(i);
        side.push_back(1);
      }
    }
    std::vector<Eigen::Index> signature;
    for (std::size_t k = 0; k < act.size(); ++k) signature.push_back(act[k] * 3 + side[k] + 1);
    if (signature == last_polish_) return false;
    last_polish_ = signature;

    const auto na = static_cast<Eigen::Index>(act.size());
    const Eigen::Index dim = n_ + na;
    Eigen::MatrixXd K0 = Eigen::MatrixXd::Zero(dim, dim);
    K0.topLeftCorner(n_, n_) = Ps_;
    Eigen::VectorXd rhs(dim);
    rhs.head(n_) = -qs_;
    for (Eigen::Index k = 0; k < na; ++k) {
      const Eigen::Index i = act[static_cast<std::size_t>(k)];
      K0.block(n_ + k, 0, 1, n_) = As_.row(i);
      K0.block(0, n_ + k, n_, 1) = As_.row(i).transpose();
      rhs(n_ + k) = side[static_cast<std::size_t>(k)] > 0 ? u_(i) : l_(i);
    }
    constexpr double delta = 1e-7;
    Eigen::MatrixXd Kd = K0;
    Kd.diagonal().head(n_).array() += delta;
    Kd.diagonal().tail(na).array() -= delta;
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(Kd);
    Eigen::VectorXd sol = lu.solve(rhs);
    for (int r = 0; r < 25; ++r) {
      const Eigen::VectorXd res = rhs - K0 * sol;
      if (!res.allFinite()) return false;
      if (inf_norm(res) < 1e-14 * std::max(1.0, inf_norm(rhs))) break;
      sol += lu.solve(res);
    }
    if (!sol.allFinite()) return false;

    const Eigen::VectorXd x = sol.head(n_);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(m_);
    for (Eigen::Index k = 0; k < na; ++k) y(act[static_cast<std::size_t>(k)]) = sol(n_ + k);
    const Eigen::VectorXd z = (As_ * x).cwiseMax(l_).cwiseMin(u_);
    const Residuals r = residuals(x, z, y);
    if (r.primal > r.eps_primal || r.dual > r.eps_dual) return false;
    const double sign_tol = 1e-9 * std::max(1.0, inf_norm(y));
    for (Eigen::Index k = 0; k < na; ++k) {
      const double yk = y(act[static_cast<std::size_t>(k)]);
      const int sd = side[static_cast<std::size_t>(k)];
      if ((sd < 0 && yk > sign_tol) || (sd > 0 && yk < -sign_tol)) return false;
    }

    out.status = SolveStatus::optimal;
    out.x = sc_.D.cwiseProduct(x);
    out.y = sc_.E.cwiseProduct(y) / sc_.c;
    out.primal_residual = r.primal;
    out.dual_residual = r.dual;
    out.polished = true;
    out.objective = objective(out.x);
    return true;
  }

  const QpProblem& p_;
  const SolverSettings& s_;
  Eigen::Index n_;
  Eigen::Index m_;
  Scaling sc_;
  Eigen::MatrixXd Ps_, As_;
  Eigen::VectorXd qs_, l_, u_;
  Eigen::VectorXd x_, z_, y_, rho_;
  double rho_base_ = 0.1;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  std::vector<Eigen::Index> last_polish_{-1};
};

}  // namespace

std::string_view to_string(SolveStatus s) noexcept {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::relaxed: return "relaxed";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::dual_infeasible: return "unbounded";
    case SolveStatus::iteration_limit: return "iteration_limit";
  }
  return "?";
}

void QpProblem::validate() const {
  const Eigen::Index n = q.size();
  const Eigen::Index m = A.rows();
  if (P.rows() != n || P.cols() != n) throw std::invalid_argument("P must be square with one row per variable");
  if (A.cols() != n && m > 0) throw std::invalid_argument("A must have one column per variable");
  if (lower.size() != m || upper.size() != m) throw std::invalid_argument("bounds need one entry per constraint row");
  if (!rows.empty() && static_cast<Eigen::Index>(rows.size()) != m) {
    throw std::invalid_argument("row metadata must describe every constraint row");
  }
  if (layout.size() != n) throw std::invalid_argument("decision layout does not match the variable count");
  if (slack_columns.size() && slack_columns.rows() != m) throw std::invalid_argument("slack columns need one row per constraint");
  if (!P.allFinite() || !q.allFinite() || !A.allFinite()) throw std::invalid_argument("problem data must be finite");
}

QpSolution solve(const QpProblem& problem, const SolverSettings& settings) {
  if (!(settings.eps_abs > 0) || !(settings.eps_rel >= 0) || settings.max_iterations < 1 || settings.check_interval < 1) {
    throw std::invalid_argument("solver tolerances must be positive");
  }
  problem.validate();
  check_convex(problem.P);

  const Eigen::Index m = problem.constraints();
  QpSolution out;
  out.layout = problem.layout;
  for (Eigen::Index i = 0; i < m; ++i) {
    const bool empty_row = problem.A.row(i).isZero(0.0);
    if (problem.lower(i) > problem.upper(i) ||
        (empty_row && (problem.lower(i) > 0.0 || problem.upper(i) < 0.0))) {
      out.status = SolveStatus::infeasible;
      out.x = Eigen::VectorXd::Zero(problem.variables());
      out.y = Eigen::VectorXd::Zero(m);
      out.objective = kInf;
      return out;
    }
  }
  if (problem.variables() == 0) {
    out.status = SolveStatus::optimal;
    out.x = Eigen::VectorXd(0);
    out.y = Eigen::VectorXd::Zero(m);
    out.objective = problem.constant;
    return out;
  }
  return Admm(problem, settings).run();
}

}  // namespace stlmpc
