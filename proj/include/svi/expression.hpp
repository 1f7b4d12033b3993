#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "svi/errors.hpp"
#include "svi/measures.hpp"

namespace svi {

/// Parse failure, with the 1-based column of the offending character.
class ExpressionError : public InvalidParams {
 public:
  ExpressionError(const std::string& msg, std::size_t column)
      : InvalidParams(msg + " at column " + std::to_string(column)), column_{column} {}
  std::size_t column() const { return column_; }

 private:
  std::size_t column_;
};

/// Arithmetic expression in the variables t and x and the measure mu.
///
/// Grammar:
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := '-' unary | power
///   power   := primary ('^' unary)?
///   primary := number | 'x' | 't' | '(' expr ')'
///            | ('abs') '(' expr ')' | ('min' | 'max') '(' expr ',' expr ')'
///            | ('mean' | 'w1_to_dirac0') '(' 'mu' ')'
class Expression {
 public:
  static Expression parse(std::string_view source);

  double eval(double t, double x, const EmpiricalMeasure& mu) const;
  bool uses_measure() const { return uses_measure_; }
  const std::string& source() const { return source_; }

  struct Node;

 private:
  Expression(std::string src, std::shared_ptr<const Node> root, bool uses_mu)
      : source_{std::move(src)}, root_{std::move(root)}, uses_measure_{uses_mu} {}

  std::string source_;
  std::shared_ptr<const Node> root_;
  bool uses_measure_;
};

}  // namespace svi
