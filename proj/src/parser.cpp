#include "stlmpc/parser.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>

namespace stlmpc {

ParseError::ParseError(std::size_t position, const std::string& message)
    : std::invalid_argument("parse error at position " + std::to_string(position) + ": " + message),
      position_(position) {}

namespace {

struct RawPredicate {
  std::map<Eigen::Index, double> coefficients;  // zero-based coordinate -> weight
  double offset = 0.0;
  std::string text;
  std::size_t position = 0;
};

class Parser {
 public:
  Parser(std::string_view text, const ParseOptions& options) : s_(text), opts_(options) {}

  ParsedFormula run() {
    skip_ws();
    Formula root;
    if (peek_word() == "event") {
      pos_ += 5;
      double t = 0.0;
      if (accept('@')) t = number("event time");
      if (!accept("=>")) fail("expected '=>' after event");
      const std::size_t body_pos = here();
      Formula theta = expr();
      check_wrapper_body(theta, body_pos);
      root = Formula::one_time(std::move(theta), t);
    } else {
      root = expr();
    }
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    if (first_all_time_ && (root.op != Op::all_time || all_time_count_ > 1)) {
      throw ParseError(*first_all_time_, "G[0,inf] may only wrap the whole formula");
    }
    if (opts_.fragment && !root.is_wrapper() && !is_theta(root) && !is_gamma(root)) {
      throw ParseError(0, "formula outside the supported fragment");
    }
    PredicateTable table = build_table();
    return {remap(std::move(root)), std::move(table)};
  }

 private:
  Formula expr() {
    std::vector<Formula> parts{conj()};
    while (accept('|')) parts.push_back(conj());
    return parts.size() == 1 ? std::move(parts.front()) : Formula::disjunction(std::move(parts));
  }

  Formula conj() {
    std::vector<Formula> parts{until()};
    while (accept('&')) parts.push_back(until());
    return parts.size() == 1 ? std::move(parts.front()) : Formula::conjunction(std::move(parts));
  }

  Formula until() {
    const std::size_t left_pos = here();
    Formula left = unary();
    skip_ws();
    if (peek_word() != "U") return left;
    pos_ += 1;
    const Interval iv = interval(false);
    const std::size_t right_pos = here();
    Formula right = unary();
    temporal_operand(left, left_pos);
    temporal_operand(right, right_pos);
    skip_ws();
    if (peek_word() == "U") fail("chained until is ambiguous, add parentheses");
    return Formula::until(std::move(left), std::move(right), iv.a, iv.b);
  }

  Formula unary() {
    skip_ws();
    const std::size_t start = here();
    if (accept('!')) {
      const std::size_t operand_pos = here();
      Formula f = unary();
      if (f.op == Op::pred) return Formula::negated_predicate(f.pred);
      if (opts_.fragment) throw ParseError(operand_pos, "negation applies only to predicates");
      return Formula::negation(std::move(f));
    }
    const std::string_view word = peek_word();
    if ((word == "F" || word == "G") && next_non_ws(pos_ + 1) == '[') {
      pos_ += 1;
      const bool is_g = word == "G";
      const Interval iv = interval(is_g);
      const std::size_t operand_pos = here();
      Formula f = unary();
      if (std::isinf(iv.b)) {
        if (iv.a != 0.0) throw ParseError(start, "unbounded always must start at 0");
        ++all_time_count_;
        if (!first_all_time_) first_all_time_ = start;
        check_wrapper_body(f, operand_pos);
        return Formula::all_time(std::move(f));
      }
      temporal_operand(f, operand_pos);
      return is_g ? Formula::always(std::move(f), iv.a, iv.b) : Formula::eventually(std::move(f), iv.a, iv.b);
    }
    if (accept('(')) {
      Formula f = expr();
      if (!accept(')')) fail("expected ')'");
      return f;
    }
    if (word == "true") {
      pos_ += 4;
      return Formula::top();
    }
    if (word == "inf" || word == "event" || word == "U") fail("unexpected '" + std::string(word) + "'");
    return predicate();
  }

  Formula predicate() {
    skip_ws();
    RawPredicate p;
    p.position = here();
    std::map<Eigen::Index, double> coeffs;
    bool first = true;
    while (true) {
      skip_ws();
      double sign = 1.0;
      if (accept('-')) {
        sign = -1.0;
      } else if (!first && !accept('+')) {
        break;
      }
      skip_ws();
      double weight = 1.0;
      if (starts_number()) {
        weight = number("coefficient");
        accept('*');
      }
      const Eigen::Index idx = variable();
      coeffs[idx] += sign * weight;
      first = false;
    }
    skip_ws();
    bool geq = false;
    if (accept(">=")) {
      geq = true;
    } else if (accept("<=")) {
      geq = false;
    } else if (here() < s_.size() && (s_[pos_] == '>' || s_[pos_] == '<')) {
      fail("strict comparisons are not supported, use >= or <=");
    } else {
      fail("expected '>=' or '<=' after linear term");
    }
    skip_ws();
    double sign = 1.0;
    if (accept('-')) {
      sign = -1.0;
    } else {
      accept('+');
    }
    skip_ws();
    const double r = sign * number("threshold");
    for (auto& [j, w] : coeffs) p.coefficients[j] = geq ? w : -w;
    p.offset = geq ? -r : r;
    p.text = trim(s_.substr(p.position, pos_ - p.position));
    raw_.push_back(std::move(p));
    return Formula::predicate(raw_.size() - 1);
  }

  Eigen::Index variable() {
    skip_ws();
    const std::size_t start = here();
    if (!accept('x')) fail("expected a state variable like x1");
    if (here() >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      throw ParseError(start, "state variable needs an index, e.g. x1");
    }
    long idx = 0;
    const char* b = s_.data() + pos_;
    auto [end, ec] = std::from_chars(b, s_.data() + s_.size(), idx);
    if (ec != std::errc{} || idx < 1) throw ParseError(start, "state indices start at 1");
    pos_ += static_cast<std::size_t>(end - b);
    if (here() < s_.size() && is_word_char(s_[pos_])) throw ParseError(start, "malformed state variable");
    max_index_ = std::max<Eigen::Index>(max_index_, idx);
    return idx - 1;
  }

  Interval interval(bool allow_inf) {
    skip_ws();
    const std::size_t start = here();
    if (!accept('[')) fail("expected '[' to open an interval");
    const double a = number("interval start");
    if (!accept(',')) fail("expected ',' in interval");
    skip_ws();
    double b = 0.0;
    if (peek_word() == "inf") {
      if (!allow_inf) throw ParseError(here(), "unbounded interval is only allowed in G[0,inf] at the root");
      pos_ += 3;
      b = std::numeric_limits<double>::infinity();
    } else {
      b = number("interval end");
    }
    if (!accept(']')) fail("expected ']' to close an interval");
    if (b < a) throw ParseError(start, "interval end precedes its start");
    return {a, b};
  }

  void temporal_operand(const Formula& f, std::size_t position) const {
    if (opts_.fragment && !is_gamma(f)) {
      throw ParseError(position, "temporal operands must be true, a predicate, or a negated predicate");
    }
  }

  void check_wrapper_body(const Formula& f, std::size_t position) const {
    if (opts_.fragment && !is_theta(f) && !is_gamma(f)) {
      throw ParseError(position, "wrapped formula is outside the supported fragment");
    }
    if (f.is_wrapper()) throw ParseError(position, "wrappers cannot be nested");
  }

  double number(const char* what) {
    skip_ws();
    if (!starts_number()) fail(std::string("expected a number for the ") + what);
    const char* b = s_.data() + pos_;
    double v = 0.0;
    auto [end, ec] = std::from_chars(b, s_.data() + s_.size(), v);
    if (ec != std::errc{}) fail(std::string("malformed number for the ") + what);
    pos_ += static_cast<std::size_t>(end - b);
    return v;
  }

  bool starts_number() const {
    if (pos_ >= s_.size()) return false;
    const char ch = s_[pos_];
    return std::isdigit(static_cast<unsigned char>(ch)) || ch == '.';
  }

  static bool is_word_char(char ch) { return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_'; }

  std::string_view peek_word() {
    skip_ws();
    std::size_t e = pos_;
    while (e < s_.size() && is_word_char(s_[e])) ++e;
    return s_.substr(pos_, e - pos_);
  }

  char next_non_ws(std::size_t from) const {
    while (from < s_.size() && std::isspace(static_cast<unsigned char>(s_[from]))) ++from;
    return from < s_.size() ? s_[from] : '\0';
  }

  bool accept(char ch) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == ch) {
      ++pos_;
      return true;
    }
    return false;
  }

  bool accept(std::string_view tok) {
    skip_ws();
    if (s_.substr(pos_, tok.size()) == tok) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  std::size_t here() {
    skip_ws();
    return pos_;
  }

  [[noreturn]] void fail(const std::string& msg) { throw ParseError(here(), msg); }

  static std::string trim(std::string_view v) {
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.remove_suffix(1);
    return std::string(v);
  }

  PredicateTable build_table() {
    Eigen::Index dim = max_index_;
    if (opts_.state_dim > 0) {
      if (max_index_ > opts_.state_dim) {
        for (const auto& p : raw_) {
          if (!p.coefficients.empty() && p.coefficients.rbegin()->first >= opts_.state_dim) {
            throw ParseError(p.position, "state index exceeds the system dimension " +
                                             std::to_string(opts_.state_dim));
          }
        }
      }
      dim = opts_.state_dim;
    }
    PredicateTable table(dim);
    for (const auto& p : raw_) {
      Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(dim);
      for (const auto& [j, w] : p.coefficients) row(j) = w;
      ids_.push_back(table.add(row, p.offset, p.text));
    }
    return table;
  }

  Formula remap(Formula f) {
    if (f.op == Op::pred || f.op == Op::neg_pred) f.pred = ids_.at(f.pred);
    for (auto& c : f.children) c = remap(std::move(c));
    return f;
  }

  std::string_view s_;
  ParseOptions opts_;
  std::size_t pos_ = 0;
  std::vector<RawPredicate> raw_;
  std::vector<PredicateId> ids_;
  Eigen::Index max_index_ = 0;
  int all_time_count_ = 0;
  std::optional<std::size_t> first_all_time_;
};

}  // namespace

ParsedFormula parse(std::string_view text, const ParseOptions& options) {
  return Parser(text, options).run();
}

}  // namespace stlmpc
