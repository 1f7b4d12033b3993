#include "svi/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <vector>

namespace svi {

struct Expression::Node {
  enum class Op { Number, VarX, VarT, Neg, Add, Sub, Mul, Div, Pow, Abs, Min, Max, Mean, W1Dirac0 };
  Op op;
  double number = 0.0;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make(Node::Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}

class Parser {
 public:
  explicit Parser(std::string_view s) : src_{s} {}

  NodePtr parse_all() {
    auto e = expr();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected trailing input");
    return e;
  }

  bool uses_measure() const { return uses_measure_; }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ExpressionError(msg, pos_ + 1); }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  std::string identifier() {
    skip_ws();
    const auto start = pos_;
    while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
    return std::string(src_.substr(start, pos_ - start));
  }

  NodePtr expr() {
    auto lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make(Node::Op::Add, lhs, term());
      } else if (accept('-')) {
        lhs = make(Node::Op::Sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    auto lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = make(Node::Op::Mul, lhs, unary());
      } else if (accept('/')) {
        lhs = make(Node::Op::Div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Node::Op::Neg, unary());
    return power();
  }

  NodePtr power() {
    auto base = primary();
    if (accept('^')) return make(Node::Op::Pow, base, unary());
    return base;
  }

  NodePtr measure_arg(Node::Op op) {
    expect('(');
    const auto at = pos_;
    if (identifier() != "mu") {
      pos_ = at;
      skip_ws();
      fail("expected 'mu'");
    }
    expect(')');
    uses_measure_ = true;
    return make(op);
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of expression");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      auto e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* first = src_.data() + pos_;
      const char* last = src_.data() + src_.size();
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc{}) fail("malformed number");
      pos_ += static_cast<std::size_t>(ptr - first);
      auto n = std::make_shared<Node>();
      n->op = Node::Op::Number;
      n->number = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const auto at = pos_;
      const auto name = identifier();
      if (name == "x") return make(Node::Op::VarX);
      if (name == "t") return make(Node::Op::VarT);
      if (name == "abs") {
        expect('(');
        auto a = expr();
        expect(')');
        return make(Node::Op::Abs, a);
      }
      if (name == "min" || name == "max") {
        expect('(');
        auto a = expr();
        expect(',');
        auto b = expr();
        expect(')');
        return make(name == "min" ? Node::Op::Min : Node::Op::Max, a, b);
      }
      if (name == "mean") return measure_arg(Node::Op::Mean);
      if (name == "w1_to_dirac0") return measure_arg(Node::Op::W1Dirac0);
      pos_ = at;
      fail("unknown identifier '" + name + "'");
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  bool uses_measure_ = false;
};

double eval_node(const Node& n, double t, double x, const EmpiricalMeasure& mu) {
  switch (n.op) {
    case Node::Op::Number: return n.number;
    case Node::Op::VarX: return x;
    case Node::Op::VarT: return t;
    case Node::Op::Neg: return -eval_node(*n.lhs, t, x, mu);
    case Node::Op::Add: return eval_node(*n.lhs, t, x, mu) + eval_node(*n.rhs, t, x, mu);
    case Node::Op::Sub: return eval_node(*n.lhs, t, x, mu) - eval_node(*n.rhs, t, x, mu);
    case Node::Op::Mul: return eval_node(*n.lhs, t, x, mu) * eval_node(*n.rhs, t, x, mu);
    case Node::Op::Div: return eval_node(*n.lhs, t, x, mu) / eval_node(*n.rhs, t, x, mu);
    case Node::Op::Pow: {
      const double b = eval_node(*n.lhs, t, x, mu);
      const double e = eval_node(*n.rhs, t, x, mu);
      if (e == 2.0) return b * b;
      if (e == 3.0) return b * b * b;
      return std::pow(b, e);
    }
    case Node::Op::Abs: return std::abs(eval_node(*n.lhs, t, x, mu));
    case Node::Op::Min: return std::min(eval_node(*n.lhs, t, x, mu), eval_node(*n.rhs, t, x, mu));
    case Node::Op::Max: return std::max(eval_node(*n.lhs, t, x, mu), eval_node(*n.rhs, t, x, mu));
    case Node::Op::Mean: return mu.mean();
    case Node::Op::W1Dirac0: return mu.abs_mean();
  }
  return std::nan("");
}

}  // namespace

Expression Expression::parse(std::string_view source) {
  Parser p{source};
  auto root = p.parse_all();
  return Expression{std::string(source), std::move(root), p.uses_measure()};
}

double Expression::eval(double t, double x, const EmpiricalMeasure& mu) const { return eval_node(*root_, t, x, mu); }

}  // namespace svi
