#pragma once

#include "stlmpc/formula.hpp"
#include "stlmpc/predicate_table.hpp"

#include <cstddef>
#include <string_view>

namespace stlmpc {

// Grammar (whitespace insensitive):
//   root      := 'event' ['@' num] '=>' expr | expr
//   expr      := conj ('|' conj)*
//   conj      := until ('&' until)*
//   until     := unary ['U' interval unary]
//   unary     := '!' unary | ('F' | 'G') interval unary | '(' expr ')' | 'true' | predicate
//   interval  := '[' num ',' (num | 'inf') ']'          ('inf' only in G[0,inf] at the root)
//   predicate := linear ('>=' | '<=') num
//   linear    := ['-'] term (('+' | '-') term)*,  term := [num ['*']] 'x'<index>   (index from 1)
struct ParseOptions {
  // 0 infers the dimension from the largest x index.
  Eigen::Index state_dim = 0;
  // Reject formulas outside the gamma/psi/theta/phi classes.
  bool fragment = true;
};

struct ParsedFormula {
  Formula formula;
  PredicateTable table;
};

class ParseError : public std::invalid_argument {
 public:
  ParseError(std::size_t position, const std::string& message);
  [[nodiscard]] std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

ParsedFormula parse(std::string_view text, const ParseOptions& options = {});

}  // namespace stlmpc
