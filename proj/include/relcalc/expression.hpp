#pragma once

#include <cctype>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "relcalc/core.hpp"

namespace relcalc {

/// Tiny arithmetic expression over the variables `i` (1-based index) and `n`
/// (truncation size), used by family specifications: numbers, + - * / ^,
/// parentheses, and the functions sqrt exp log sin cos abs min max pow.
class Expression {
 public:
  static Expression parse(const std::string& src) {
    Parser p{src, 0};
    Expression e;
    e.root_ = p.parse_expr(e.nodes_);
    p.skip_ws();
    if (p.pos != src.size())
      throw ParseError("expression: trailing characters at position " + std::to_string(p.pos));
    return e;
  }

  double eval(double i, double n) const { return eval_node(root_, i, n); }

 private:
  enum class Op { Const, VarI, VarN, Add, Sub, Mul, Div, Pow, Neg, Fn1, Fn2 };
  enum class Fn { Sqrt, Exp, Log, Sin, Cos, Abs, Min, Max, Pow };

  struct Node {
    Op op;
    double value = 0;
    Fn fn = Fn::Sqrt;
    int a = -1, b = -1;
  };

  struct Parser {
    const std::string& src;
    size_t pos;

    void skip_ws() {
      while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
    }
    bool eat(char c) {
      skip_ws();
      if (pos < src.size() && src[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }
    [[noreturn]] void fail(const std::string& what) {
      throw ParseError("expression: " + what + " at position " + std::to_string(pos));
    }

    int parse_expr(std::vector<Node>& nodes) {
      int lhs = parse_term(nodes);
      for (;;) {
        if (eat('+')) lhs = binary(nodes, Op::Add, lhs, parse_term(nodes));
        else if (eat('-')) lhs = binary(nodes, Op::Sub, lhs, parse_term(nodes));
        else return lhs;
      }
    }

    int parse_term(std::vector<Node>& nodes) {
      int lhs = parse_factor(nodes);
      for (;;) {
        if (eat('*')) lhs = binary(nodes, Op::Mul, lhs, parse_factor(nodes));
        else if (eat('/')) lhs = binary(nodes, Op::Div, lhs, parse_factor(nodes));
        else return lhs;
      }
    }

    int parse_factor(std::vector<Node>& nodes) {
      int base = parse_unary(nodes);
      if (eat('^')) return binary(nodes, Op::Pow, base, parse_factor(nodes));  // right assoc
      return base;
    }

    int parse_unary(std::vector<Node>& nodes) {
      if (eat('-')) {
        Node n;
        n.op = Op::Neg;
        n.a = parse_unary(nodes);
        nodes.push_back(n);
        return static_cast<int>(nodes.size()) - 1;
      }
      (void)eat('+');
      return parse_primary(nodes);
    }

    int parse_primary(std::vector<Node>& nodes) {
      skip_ws();
      if (pos >= src.size()) fail("unexpected end of input");
      const char c = src[pos];
      if (c == '(') {
        ++pos;
        int inner = parse_expr(nodes);
        if (!eat(')')) fail("expected ')'");
        return inner;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        size_t consumed = 0;
        double v;
        try {
          v = std::stod(src.substr(pos), &consumed);
        } catch (const std::exception&) {
          fail("malformed number");
        }
        pos += consumed;
        Node n;
        n.op = Op::Const;
        n.value = v;
        nodes.push_back(n);
        return static_cast<int>(nodes.size()) - 1;
      }
      if (std::isalpha(static_cast<unsigned char>(c))) {
        size_t start = pos;
        while (pos < src.size() && std::isalpha(static_cast<unsigned char>(src[pos]))) ++pos;
        const std::string word = src.substr(start, pos - start);
        if (word == "i" || word == "n") {
          Node n;
          n.op = word == "i" ? Op::VarI : Op::VarN;
          nodes.push_back(n);
          return static_cast<int>(nodes.size()) - 1;
        }
        return parse_call(nodes, word);
      }
      fail(std::string("unexpected character '") + c + "'");
    }

    int parse_call(std::vector<Node>& nodes, const std::string& word) {
      Fn fn;
      int arity = 1;
      if (word == "sqrt") fn = Fn::Sqrt;
      else if (word == "exp") fn = Fn::Exp;
      else if (word == "log") fn = Fn::Log;
      else if (word == "sin") fn = Fn::Sin;
      else if (word == "cos") fn = Fn::Cos;
      else if (word == "abs") fn = Fn::Abs;
      else if (word == "min") { fn = Fn::Min; arity = 2; }
      else if (word == "max") { fn = Fn::Max; arity = 2; }
      else if (word == "pow") { fn = Fn::Pow; arity = 2; }
      else fail("unknown function '" + word + "'");
      if (!eat('(')) fail("expected '(' after function name");
      Node n;
      n.op = arity == 1 ? Op::Fn1 : Op::Fn2;
      n.fn = fn;
      n.a = parse_expr(nodes);
      if (arity == 2) {
        if (!eat(',')) fail("expected ',' between arguments");
        n.b = parse_expr(nodes);
      }
      if (!eat(')')) fail("expected ')'");
      nodes.push_back(n);
      return static_cast<int>(nodes.size()) - 1;
    }

    int binary(std::vector<Node>& nodes, Op op, int a, int b) {
      Node n;
      n.op = op;
      n.a = a;
      n.b = b;
      nodes.push_back(n);
      return static_cast<int>(nodes.size()) - 1;
    }
  };

  double eval_node(int idx, double i, double n) const {
    const Node& nd = nodes_[static_cast<size_t>(idx)];
    switch (nd.op) {
      case Op::Const: return nd.value;
      case Op::VarI: return i;
      case Op::VarN: return n;
      case Op::Add: return eval_node(nd.a, i, n) + eval_node(nd.b, i, n);
      case Op::Sub: return eval_node(nd.a, i, n) - eval_node(nd.b, i, n);
      case Op::Mul: return eval_node(nd.a, i, n) * eval_node(nd.b, i, n);
      case Op::Div: return eval_node(nd.a, i, n) / eval_node(nd.b, i, n);
      case Op::Pow: return std::pow(eval_node(nd.a, i, n), eval_node(nd.b, i, n));
      case Op::Neg: return -eval_node(nd.a, i, n);
      case Op::Fn1: {
        const double x = eval_node(nd.a, i, n);
        switch (nd.fn) {
          case Fn::Sqrt: return std::sqrt(x);
          case Fn::Exp: return std::exp(x);
          case Fn::Log: return std::log(x);
          case Fn::Sin: return std::sin(x);
          case Fn::Cos: return std::cos(x);
          default: return std::abs(x);
        }
      }
      case Op::Fn2: {
        const double x = eval_node(nd.a, i, n), y = eval_node(nd.b, i, n);
        switch (nd.fn) {
          case Fn::Min: return std::min(x, y);
          case Fn::Max: return std::max(x, y);
          default: return std::pow(x, y);
        }
      }
    }
    return 0;  // unreachable
  }

  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace relcalc
