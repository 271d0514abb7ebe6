#include "stlmpc/predicate_table.hpp"

#include "stlmpc/number_format.hpp"

#include <cmath>
#include <stdexcept>

namespace stlmpc {

PredicateTable::PredicateTable(Eigen::Index state_dim)
    : state_dim_(state_dim), C_(0, state_dim), c_(0) {
  if (state_dim < 0) throw std::invalid_argument("negative state dimension");
}

PredicateId PredicateTable::add(const Eigen::RowVectorXd& normal, double offset, std::string label) {
  if (normal.size() != state_dim_) {
    throw std::invalid_argument("predicate row has " + std::to_string(normal.size()) +
                                " entries, table expects " + std::to_string(state_dim_));
  }
  for (Eigen::Index i = 0; i < C_.rows(); ++i) {
    if (c_(i) == offset && C_.row(i) == normal) return static_cast<PredicateId>(i);
  }
  const Eigen::Index n = C_.rows();
  C_.conservativeResize(n + 1, state_dim_);
  c_.conservativeResize(n + 1);
  C_.row(n) = normal;
  c_(n) = offset;
  labels_.push_back(label.empty() ? describe_predicate(normal, offset) : std::move(label));
  return static_cast<PredicateId>(n);
}

PredicateId PredicateTable::negation_of(PredicateId id) {
  check_id(id);
  const Eigen::RowVectorXd row = -C_.row(static_cast<Eigen::Index>(id));
  return add(row, -c_(static_cast<Eigen::Index>(id)));
}

Eigen::RowVectorXd PredicateTable::normal(PredicateId id) const {
  check_id(id);
  return C_.row(static_cast<Eigen::Index>(id));
}

double PredicateTable::offset(PredicateId id) const {
  check_id(id);
  return c_(static_cast<Eigen::Index>(id));
}

const std::string& PredicateTable::label(PredicateId id) const {
  check_id(id);
  return labels_[id];
}

std::optional<PredicateTable::AxisForm> PredicateTable::axis_form(PredicateId id) const {
  check_id(id);
  const auto row = C_.row(static_cast<Eigen::Index>(id));
  std::optional<AxisForm> found;
  for (Eigen::Index j = 0; j < row.size(); ++j) {
    if (row(j) == 0.0) continue;
    if (found || (row(j) != 1.0 && row(j) != -1.0)) return std::nullopt;
    found = AxisForm{j, row(j)};
  }
  return found;
}

double PredicateTable::value(PredicateId id, const Eigen::VectorXd& x) const {
  check_id(id);
  const auto i = static_cast<Eigen::Index>(id);
  return C_.row(i).dot(x) + c_(i);
}

Eigen::VectorXd PredicateTable::values(const Eigen::VectorXd& x) const {
  if (x.size() != state_dim_) throw std::invalid_argument("state dimension mismatch");
  return C_ * x + c_;
}

void PredicateTable::check_id(PredicateId id) const {
  if (id >= labels_.size()) {
    throw std::out_of_range("predicate id " + std::to_string(id) + " not in table of size " +
                            std::to_string(labels_.size()));
  }
}

std::string describe_predicate(const Eigen::RowVectorXd& normal, double offset) {
  // Print -0 as 0; both parse back to an offset that compares equal.
  const auto num = [](double v) { return v == 0.0 ? std::string("0") : shortest_repr(v); };
  Eigen::Index nonzero = 0;
  Eigen::Index axis = 0;
  for (Eigen::Index j = 0; j < normal.size(); ++j) {
    if (normal(j) != 0.0) {
      ++nonzero;
      axis = j;
    }
  }
  const std::string var = "x" + std::to_string(axis + 1);
  if (nonzero == 1 && normal(axis) == 1.0) return var + " >= " + num(-offset);
  if (nonzero == 1 && normal(axis) == -1.0) return var + " <= " + num(offset);

  std::string out;
  for (Eigen::Index j = 0; j < normal.size(); ++j) {
    const double a = normal(j);
    if (a == 0.0 && !(nonzero == 0 && j == 0)) continue;
    const bool negative = std::signbit(a);
    const double mag = negative ? -a : a;
    if (out.empty()) {
      if (negative) out += "-";
    } else {
      out += negative ? " - " : " + ";
    }
    if (mag != 1.0) out += shortest_repr(mag) + "*";
    out += "x" + std::to_string(j + 1);
  }
  return out + " >= " + num(-offset);
}

}  // namespace stlmpc
