#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace stlmpc {

using PredicateId = std::size_t;

// Affine predicate functions z(x) = C x + c, one row per distinct predicate.
// Rows are deduplicated on exact (row, offset) equality.
class PredicateTable {
 public:
  PredicateTable() = default;
  explicit PredicateTable(Eigen::Index state_dim);

  // Returns the id of an existing identical row, or appends a new one.
  PredicateId add(const Eigen::RowVectorXd& normal, double offset, std::string label = {});
  // Id of the predicate -f(x) >= 0, created on demand.
  PredicateId negation_of(PredicateId id);

  [[nodiscard]] std::size_t size() const noexcept { return labels_.size(); }
  [[nodiscard]] Eigen::Index state_dim() const noexcept { return state_dim_; }
  [[nodiscard]] const Eigen::MatrixXd& C() const noexcept { return C_; }
  [[nodiscard]] const Eigen::VectorXd& c() const noexcept { return c_; }
  [[nodiscard]] Eigen::RowVectorXd normal(PredicateId id) const;
  [[nodiscard]] double offset(PredicateId id) const;
  [[nodiscard]] const std::string& label(PredicateId id) const;

  // Single coordinate j and sign s with row = s * e_j, if the row has that shape.
  struct AxisForm {
    Eigen::Index coordinate;
    double sign;
  };
  [[nodiscard]] std::optional<AxisForm> axis_form(PredicateId id) const;

  [[nodiscard]] double value(PredicateId id, const Eigen::VectorXd& x) const;
  [[nodiscard]] Eigen::VectorXd values(const Eigen::VectorXd& x) const;

  friend bool operator==(const PredicateTable& l, const PredicateTable& r) {
    return l.state_dim_ == r.state_dim_ && l.C_ == r.C_ && l.c_ == r.c_ && l.labels_ == r.labels_;
  }

 private:
  void check_id(PredicateId id) const;

  Eigen::Index state_dim_ = 0;
  Eigen::MatrixXd C_;
  Eigen::VectorXd c_;
  std::vector<std::string> labels_;
};

// "x1 >= 2", "x2 <= 0.5", or a general "0.5*x1 - x2 >= -1" rendering.
std::string describe_predicate(const Eigen::RowVectorXd& normal, double offset);

}  // namespace stlmpc
