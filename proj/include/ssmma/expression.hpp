#pragma once

// Small arithmetic expression language for user functions in config files.
//
//   expr    := compare
//   compare := sum [('<' | '<=' | '>' | '>=' | '==' | '!=') sum]
//   sum     := product (('+' | '-') product)*
//   product := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ['^' unary]
//   primary := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
//
// Comparisons yield 1 or 0. ppow(a, p) is a^p for a > 0 and 0 otherwise.

#include <cctype>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "error.hpp"

namespace ssmma {

/// Values an expression can read. Which names bind to which slot is fixed at
/// compile time by the Binding.
struct ExprEnv {
  double fiber = 0.0;  // x, y, z
  double coord = 0.0;  // v (and u in point mode)
  double arg = 0.0;    // u in kernel mode, the time argument of G(x, u)
  double roof = 0.0;   // q
};

enum class Binding {
  Point,   // u and v both read the point's coordinate
  Kernel,  // u is the kernel argument, v the coordinate of x
  Fiber,   // only x, y, z and q are available
  Scalar,  // u reads arg; used for functions of one real variable
  Constant
};

class Expression {
 public:
  Expression() = default;

  static Expression parse(std::string_view text, Binding binding, const std::map<std::string, double>& constants = {}) {
    Parser p{text, binding, constants};
    auto node = p.parse_all();
    return Expression(std::string(text), std::move(node));
  }

  /// Evaluates an expression with no variables, e.g. "exp(2)" in a list entry.
  static double constant(std::string_view text, const std::map<std::string, double>& constants = {}) {
    return parse(text, Binding::Constant, constants)({});
  }

  double operator()(const ExprEnv& env) const {
    if (!root_) throw InvalidArgument("empty expression");
    return root_->eval(env);
  }

  const std::string& text() const { return text_; }
  bool empty() const { return !root_; }

 private:
  enum class Op {
    Num, Fiber, Coord, Arg, Roof, Neg, Add, Sub, Mul, Div, Pow,
    Lt, Le, Gt, Ge, Eq, Ne, Call
  };
  enum class Fn { Sin, Cos, Tan, Exp, Log, Sqrt, Abs, Sign, Floor, Pos, Ind, Pow, Ppow, Min, Max, Mod };

  struct Node {
    Op op = Op::Num;
    Fn fn = Fn::Sin;
    double value = 0.0;
    std::vector<std::shared_ptr<const Node>> kids;

    double eval(const ExprEnv& e) const {
      switch (op) {
        case Op::Num: return value;
        case Op::Fiber: return e.fiber;
        case Op::Coord: return e.coord;
        case Op::Arg: return e.arg;
        case Op::Roof: return e.roof;
        case Op::Neg: return -kids[0]->eval(e);
        case Op::Add: return kids[0]->eval(e) + kids[1]->eval(e);
        case Op::Sub: return kids[0]->eval(e) - kids[1]->eval(e);
        case Op::Mul: return kids[0]->eval(e) * kids[1]->eval(e);
        case Op::Div: return kids[0]->eval(e) / kids[1]->eval(e);
        case Op::Pow: return std::pow(kids[0]->eval(e), kids[1]->eval(e));
        case Op::Lt: return kids[0]->eval(e) < kids[1]->eval(e) ? 1.0 : 0.0;
        case Op::Le: return kids[0]->eval(e) <= kids[1]->eval(e) ? 1.0 : 0.0;
        case Op::Gt: return kids[0]->eval(e) > kids[1]->eval(e) ? 1.0 : 0.0;
        case Op::Ge: return kids[0]->eval(e) >= kids[1]->eval(e) ? 1.0 : 0.0;
        case Op::Eq: return kids[0]->eval(e) == kids[1]->eval(e) ? 1.0 : 0.0;
        case Op::Ne: return kids[0]->eval(e) != kids[1]->eval(e) ? 1.0 : 0.0;
        case Op::Call: return call(e);
      }
      return 0.0;
    }

    double call(const ExprEnv& e) const {
      const double a = kids[0]->eval(e);
      switch (fn) {
        case Fn::Sin: return std::sin(a);
        case Fn::Cos: return std::cos(a);
        case Fn::Tan: return std::tan(a);
        case Fn::Exp: return std::exp(a);
        case Fn::Log: return std::log(a);
        case Fn::Sqrt: return std::sqrt(a);
        case Fn::Abs: return std::fabs(a);
        case Fn::Sign: return a > 0.0 ? 1.0 : (a < 0.0 ? -1.0 : 0.0);
        case Fn::Floor: return std::floor(a);
        case Fn::Pos: return a > 0.0 ? a : 0.0;
        case Fn::Ind: return a > 0.0 ? 1.0 : 0.0;
        case Fn::Pow: return std::pow(a, kids[1]->eval(e));
        case Fn::Ppow: return a > 0.0 ? std::pow(a, kids[1]->eval(e)) : 0.0;
        case Fn::Min: return std::fmin(a, kids[1]->eval(e));
        case Fn::Max: return std::fmax(a, kids[1]->eval(e));
        case Fn::Mod: {
          const double b = kids[1]->eval(e);
          return a - b * std::floor(a / b);
        }
      }
      return 0.0;
    }
  };
  using NodePtr = std::shared_ptr<const Node>;

  struct Parser {
    std::string_view s;
    Binding binding;
    const std::map<std::string, double>& constants;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& what) const {
      throw InvalidArgument("expression '" + std::string(s) + "': " + what + " at offset " + std::to_string(pos));
    }

    void skip() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(std::string_view tok) {
      skip();
      if (s.substr(pos, tok.size()) == tok) {
        pos += tok.size();
        return true;
      }
      return false;
    }

    static NodePtr make(Op op, std::vector<NodePtr> kids = {}, double value = 0.0) {
      auto n = std::make_shared<Node>();
      n->op = op;
      n->kids = std::move(kids);
      n->value = value;
      return n;
    }

    NodePtr parse_all() {
      auto n = compare();
      skip();
      if (pos != s.size()) fail("unexpected '" + std::string(1, s[pos]) + "'");
      return n;
    }

    NodePtr compare() {
      auto lhs = sum();
      static const std::pair<std::string_view, Op> ops[] = {
          {"<=", Op::Le}, {">=", Op::Ge}, {"==", Op::Eq}, {"!=", Op::Ne}, {"<", Op::Lt}, {">", Op::Gt}};
      for (const auto& [tok, op] : ops)
        if (eat(tok)) return make(op, {lhs, sum()});
      return lhs;
    }

    NodePtr sum() {
      auto lhs = product();
      for (;;) {
        if (eat("+")) lhs = make(Op::Add, {lhs, product()});
        else if (eat("-")) lhs = make(Op::Sub, {lhs, product()});
        else return lhs;
      }
    }

    NodePtr product() {
      auto lhs = unary();
      for (;;) {
        if (eat("*")) lhs = make(Op::Mul, {lhs, unary()});
        else if (eat("/")) lhs = make(Op::Div, {lhs, unary()});
        else return lhs;
      }
    }

    NodePtr unary() {
      if (eat("-")) return make(Op::Neg, {unary()});
      if (eat("+")) return unary();
      return power();
    }

    NodePtr power() {
      auto base = primary();
      if (eat("^")) return make(Op::Pow, {base, unary()});
      return base;
    }

    NodePtr primary() {
      skip();
      if (pos >= s.size()) fail("unexpected end");
      const char ch = s[pos];
      if (eat("(")) {
        auto n = compare();
        if (!eat(")")) fail("expected ')'");
        return n;
      }
      if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') return number();
      if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') return name();
      fail("unexpected '" + std::string(1, ch) + "'");
    }

    NodePtr number() {
      const std::string rest(s.substr(pos));
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(rest, &used);
      } catch (const std::exception&) {
        fail("malformed number");
      }
      pos += used;
      return make(Op::Num, {}, v);
    }

    NodePtr name() {
      const std::size_t start = pos;
      while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) ++pos;
      const std::string id(s.substr(start, pos - start));
      skip();
      if (pos < s.size() && s[pos] == '(') return call(id);
      return variable(id);
    }

    NodePtr variable(const std::string& id) {
      if (auto it = constants.find(id); it != constants.end()) return make(Op::Num, {}, it->second);
      if (id == "pi") return make(Op::Num, {}, std::numbers::pi);
      if (id == "e") return make(Op::Num, {}, std::numbers::e);
      const bool fibered = binding != Binding::Constant && binding != Binding::Scalar;
      if (fibered && (id == "x" || id == "y" || id == "z")) return make(Op::Fiber);
      if (fibered && id == "q") return make(Op::Roof);
      if ((binding == Binding::Point || binding == Binding::Kernel) && id == "v") return make(Op::Coord);
      if (id == "u") {
        if (binding == Binding::Point) return make(Op::Coord);
        if (binding == Binding::Kernel || binding == Binding::Scalar) return make(Op::Arg);
      }
      fail("unknown name '" + id + "'");
    }

    NodePtr call(const std::string& id) {
      static const std::map<std::string, std::pair<Fn, int>> fns = {
          {"sin", {Fn::Sin, 1}},   {"cos", {Fn::Cos, 1}},     {"tan", {Fn::Tan, 1}},   {"exp", {Fn::Exp, 1}},
          {"log", {Fn::Log, 1}},   {"sqrt", {Fn::Sqrt, 1}},   {"abs", {Fn::Abs, 1}},   {"sign", {Fn::Sign, 1}},
          {"floor", {Fn::Floor, 1}}, {"pos", {Fn::Pos, 1}},   {"ind", {Fn::Ind, 1}},   {"pow", {Fn::Pow, 2}},
          {"ppow", {Fn::Ppow, 2}}, {"min", {Fn::Min, 2}},     {"max", {Fn::Max, 2}},   {"mod", {Fn::Mod, 2}}};
      const auto it = fns.find(id);
      if (it == fns.end()) fail("unknown function '" + id + "'");
      eat("(");
      std::vector<NodePtr> args{compare()};
      while (eat(",")) args.push_back(compare());
      if (!eat(")")) fail("expected ')'");
      if (static_cast<int>(args.size()) != it->second.second)
        fail(id + " takes " + std::to_string(it->second.second) + " argument(s)");
      auto n = std::make_shared<Node>();
      n->op = Op::Call;
      n->fn = it->second.first;
      n->kids = std::move(args);
      return n;
    }
  };

  Expression(std::string text, NodePtr root) : text_(std::move(text)), root_(std::move(root)) {}

  std::string text_;
  NodePtr root_;
};

}  // namespace ssmma
