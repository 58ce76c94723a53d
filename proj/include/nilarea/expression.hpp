#pragma once

/**
 * @file
 * @brief Small arithmetic expression language with symbolic differentiation.
 *
 * Grammar: expr := term (('+'|'-') term)*, term := unary (('*'|'/') unary)*,
 * unary := '-' unary | power, power := atom ('^' unary)?, atom := number | name |
 * name '(' args ')' | '(' expr ')'.  Exponentiation is right associative and binds
 * tighter than unary minus, so -y1^2 = -(y1^2).
 *
 * Trees are immutable and shared.  `Program` turns a tree into postfix code for
 * fast repeated evaluation.
 */

#include "nilarea/numeric.hpp"

#include <array>
#include <cctype>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

namespace nilarea::expr {

enum class Op
{
  Const,
  Var,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Neg,
  Sin,
  Cos,
  Tan,
  Exp,
  Log,
  Sqrt,
  Abs,
  Sign,
  Step,
  Max,
  Min,
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node
{
  Op op;
  double value = 0.0;
  int var = -1;
  NodePtr a;
  NodePtr b;
};

inline NodePtr constant(double v) { return std::make_shared<const Node>(Node{Op::Const, v, -1, nullptr, nullptr}); }
inline NodePtr variable(int i) { return std::make_shared<const Node>(Node{Op::Var, 0.0, i, nullptr, nullptr}); }

inline bool is_const(const NodePtr & n, double v) { return n->op == Op::Const && n->value == v; }

inline double apply(Op op, double x, double y)
{
  switch (op) {
    case Op::Add: return x + y;
    case Op::Sub: return x - y;
    case Op::Mul: return x * y;
    case Op::Div: return x / y;
    case Op::Pow: return std::pow(x, y);
    case Op::Neg: return -x;
    case Op::Sin: return std::sin(x);
    case Op::Cos: return std::cos(x);
    case Op::Tan: return std::tan(x);
    case Op::Exp: return std::exp(x);
    case Op::Log: return std::log(x);
    case Op::Sqrt: return std::sqrt(x);
    case Op::Abs: return std::abs(x);
    case Op::Sign: return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
    case Op::Step: return x >= 0.0 ? 1.0 : 0.0;
    case Op::Max: return std::max(x, y);
    case Op::Min: return std::min(x, y);
    default: return 0.0;
  }
}

inline bool is_binary(Op op)
{
  return op == Op::Add || op == Op::Sub || op == Op::Mul || op == Op::Div || op == Op::Pow || op == Op::Max || op == Op::Min;
}

/// Builds op(a, b) with constant folding and the usual 0/1 identities.
inline NodePtr make(Op op, NodePtr a, NodePtr b = nullptr)
{
  const bool ca = a->op == Op::Const;
  const bool cb = b && b->op == Op::Const;
  if (ca && (b == nullptr || cb)) { return constant(apply(op, a->value, cb ? b->value : 0.0)); }
  switch (op) {
    case Op::Add:
      if (is_const(a, 0)) { return b; }
      if (is_const(b, 0)) { return a; }
      break;
    case Op::Sub:
      if (is_const(b, 0)) { return a; }
      if (is_const(a, 0)) { return make(Op::Neg, b); }
      break;
    case Op::Mul:
      if (is_const(a, 0) || is_const(b, 0)) { return constant(0.0); }
      if (is_const(a, 1)) { return b; }
      if (is_const(b, 1)) { return a; }
      break;
    case Op::Div:
      if (is_const(a, 0)) { return constant(0.0); }
      if (is_const(b, 1)) { return a; }
      break;
    case Op::Pow:
      if (is_const(b, 0)) { return constant(1.0); }
      if (is_const(b, 1)) { return a; }
      break;
    case Op::Neg:
      if (a->op == Op::Neg) { return a->a; }
      break;
    default: break;
  }
  return std::make_shared<const Node>(Node{op, 0.0, -1, std::move(a), std::move(b)});
}

inline double evaluate(const NodePtr & n, const double * vars)
{
  switch (n->op) {
    case Op::Const: return n->value;
    case Op::Var: return vars[n->var];
    default: {
      const double x = evaluate(n->a, vars);
      const double y = n->b ? evaluate(n->b, vars) : 0.0;
      return apply(n->op, x, y);
    }
  }
}

/// d n / d var_i, simplified.
inline NodePtr derivative(const NodePtr & n, int i)
{
  const auto d = [i](const NodePtr & m) { return derivative(m, i); };
  switch (n->op) {
    case Op::Const: return constant(0.0);
    case Op::Var: return constant(n->var == i ? 1.0 : 0.0);
    case Op::Add: return make(Op::Add, d(n->a), d(n->b));
    case Op::Sub: return make(Op::Sub, d(n->a), d(n->b));
    case Op::Mul: return make(Op::Add, make(Op::Mul, d(n->a), n->b), make(Op::Mul, n->a, d(n->b)));
    case Op::Div:
      return make(Op::Div, make(Op::Sub, make(Op::Mul, d(n->a), n->b), make(Op::Mul, n->a, d(n->b))), make(Op::Mul, n->b, n->b));
    case Op::Pow: {
      const NodePtr da = d(n->a);
      const NodePtr db = d(n->b);
      if (n->b->op == Op::Const || is_const(db, 0)) {
        // b a^{b-1} a'
        return make(Op::Mul, make(Op::Mul, n->b, make(Op::Pow, n->a, make(Op::Sub, n->b, constant(1.0)))), da);
      }
      // a^b (b' log a + b a' / a)
      return make(Op::Mul, n, make(Op::Add, make(Op::Mul, db, make(Op::Log, n->a)), make(Op::Div, make(Op::Mul, n->b, da), n->a)));
    }
    case Op::Neg: return make(Op::Neg, d(n->a));
    case Op::Sin: return make(Op::Mul, make(Op::Cos, n->a), d(n->a));
    case Op::Cos: return make(Op::Neg, make(Op::Mul, make(Op::Sin, n->a), d(n->a)));
    case Op::Tan: return make(Op::Div, d(n->a), make(Op::Pow, make(Op::Cos, n->a), constant(2.0)));
    case Op::Exp: return make(Op::Mul, n, d(n->a));
    case Op::Log: return make(Op::Div, d(n->a), n->a);
    case Op::Sqrt: return make(Op::Div, d(n->a), make(Op::Mul, constant(2.0), n));
    case Op::Abs: return make(Op::Mul, make(Op::Sign, n->a), d(n->a));
    case Op::Sign:
    case Op::Step: return constant(0.0);
    case Op::Max:
    case Op::Min: {
      // Step(a - b) selects a for max, b for min.
      const NodePtr s = make(Op::Step, make(Op::Sub, n->a, n->b));
      const NodePtr first = n->op == Op::Max ? d(n->a) : d(n->b);
      const NodePtr second = n->op == Op::Max ? d(n->b) : d(n->a);
      return make(Op::Add, make(Op::Mul, s, first), make(Op::Mul, make(Op::Sub, constant(1.0), s), second));
    }
  }
  return constant(0.0);
}

/// Replaces variable i by `repl[i]` when non-null.
inline NodePtr substitute(const NodePtr & n, const std::vector<NodePtr> & repl)
{
  if (n->op == Op::Var) {
    const auto i = static_cast<std::size_t>(n->var);
    return i < repl.size() && repl[i] ? repl[i] : n;
  }
  if (n->op == Op::Const) { return n; }
  return make(n->op, substitute(n->a, repl), n->b ? substitute(n->b, repl) : nullptr);
}

inline bool uses_variable(const NodePtr & n, int i)
{
  if (n->op == Op::Var) { return n->var == i; }
  if (n->op == Op::Const) { return false; }
  return uses_variable(n->a, i) || (n->b && uses_variable(n->b, i));
}

/**
 * @brief True when the tree is nondecreasing in every variable on [0, inf)^k.
 *
 * Accepted: nonnegative constants, variables, +, *, max, min, sqrt, division by a
 * positive constant and powers with a positive constant exponent.
 */
inline bool monotone_safe(const NodePtr & n)
{
  switch (n->op) {
    case Op::Const: return n->value >= 0.0;
    case Op::Var: return true;
    case Op::Add:
    case Op::Mul:
    case Op::Max:
    case Op::Min: return monotone_safe(n->a) && monotone_safe(n->b);
    case Op::Sqrt: return monotone_safe(n->a);
    case Op::Div: return monotone_safe(n->a) && n->b->op == Op::Const && n->b->value > 0.0;
    case Op::Pow: return monotone_safe(n->a) && n->b->op == Op::Const && n->b->value > 0.0;
    default: return false;
  }
}

/// Postfix program; evaluation uses a fixed-size stack.
class Program
{
public:
  Program() = default;
  explicit Program(const NodePtr & root)
  {
    emit(root);
    int depth = 0;
    for (const auto & ins : code_) {
      if (ins.op == Op::Const || ins.op == Op::Var) {
        ++depth;
      } else if (is_binary(ins.op)) {
        --depth;
      }
      max_depth_ = std::max(max_depth_, depth);
    }
    if (max_depth_ > kStack) { throw ConfigError("expression too deeply nested"); }
  }

  [[nodiscard]] double operator()(const double * vars) const
  {
    std::array<double, kStack> stack{};
    int top = -1;
    for (const auto & ins : code_) {
      switch (ins.op) {
        case Op::Const: stack[static_cast<std::size_t>(++top)] = ins.value; break;
        case Op::Var: stack[static_cast<std::size_t>(++top)] = vars[ins.var]; break;
        default:
          if (is_binary(ins.op)) {
            const double y = stack[static_cast<std::size_t>(top--)];
            auto & x = stack[static_cast<std::size_t>(top)];
            x = apply(ins.op, x, y);
          } else {
            auto & x = stack[static_cast<std::size_t>(top)];
            x = apply(ins.op, x, 0.0);
          }
      }
    }
    return stack[0];
  }

  [[nodiscard]] bool is_constant() const { return code_.size() == 1 && code_[0].op == Op::Const; }
  [[nodiscard]] double constant_value() const { return code_[0].value; }

private:
  static constexpr int kStack = 64;
  struct Instr
  {
    Op op;
    double value;
    int var;
  };

  void emit(const NodePtr & n)
  {
    if (n->a) { emit(n->a); }
    if (n->b) { emit(n->b); }
    code_.push_back({n->op, n->value, n->var});
  }

  std::vector<Instr> code_;
  int max_depth_ = 0;
};

/// Recursive-descent parser over a fixed variable table.
class Parser
{
public:
  Parser(std::string_view src, const std::vector<std::string> & vars, std::size_t base_offset = 0)
      : src_(src), vars_(vars), base_(base_offset)
  {}

  NodePtr parse()
  {
    skip();
    if (pos_ >= src_.size()) { fail("empty expression"); }
    NodePtr n = parse_expr();
    skip();
    if (pos_ < src_.size()) { fail(std::string("unexpected '") + src_[pos_] + "'"); }
    return n;
  }

private:
  [[noreturn]] void fail(const std::string & msg) const { throw ParseError(base_ + pos_, msg); }

  void skip()
  {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])) != 0) { ++pos_; }
  }

  bool accept(char c)
  {
    skip();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr parse_expr()
  {
    NodePtr n = parse_term();
    while (true) {
      if (accept('+')) {
        n = make(Op::Add, n, parse_term());
      } else if (accept('-')) {
        n = make(Op::Sub, n, parse_term());
      } else {
        return n;
      }
    }
  }

  NodePtr parse_term()
  {
    NodePtr n = parse_unary();
    while (true) {
      if (accept('*')) {
        n = make(Op::Mul, n, parse_unary());
      } else if (accept('/')) {
        n = make(Op::Div, n, parse_unary());
      } else {
        return n;
      }
    }
  }

  NodePtr parse_unary()
  {
    if (accept('-')) { return make(Op::Neg, parse_unary()); }
    return parse_power();
  }

  NodePtr parse_power()
  {
    NodePtr base = parse_atom();
    if (accept('^')) { return make(Op::Pow, base, parse_unary()); }
    return base;
  }

  NodePtr parse_atom()
  {
    skip();
    if (pos_ >= src_.size()) { fail("unexpected end of expression"); }
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr n = parse_expr();
      if (!accept(')')) { fail("expected ')'"); }
      return n;
    }
    if ((std::isdigit(static_cast<unsigned char>(c)) != 0) || c == '.') { return parse_number(); }
    if ((std::isalpha(static_cast<unsigned char>(c)) != 0) || c == '_') { return parse_name(); }
    fail(std::string("unexpected '") + c + "'");
  }

  NodePtr parse_number()
  {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && ((std::isdigit(static_cast<unsigned char>(src_[pos_])) != 0) || src_[pos_] == '.')) { ++pos_; }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) { ++p; }
      if (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p])) != 0) {
        pos_ = p;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])) != 0) { ++pos_; }
      }
    }
    const std::string text(src_.substr(start, pos_ - start));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception &) {
      pos_ = start;
      fail("malformed number '" + text + "'");
    }
    if (used != text.size()) {
      pos_ = start;
      fail("malformed number '" + text + "'");
    }
    return constant(v);
  }

  NodePtr parse_name()
  {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && ((std::isalnum(static_cast<unsigned char>(src_[pos_])) != 0) || src_[pos_] == '_')) { ++pos_; }
    const std::string name(src_.substr(start, pos_ - start));
    skip();
    if (pos_ < src_.size() && src_[pos_] == '(') {
      ++pos_;
      std::vector<NodePtr> args;
      if (!accept(')')) {
        do { args.push_back(parse_expr()); } while (accept(','));
        if (!accept(')')) { fail("expected ')' after arguments of " + name); }
      }
      return call(name, args, start);
    }
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (vars_[i] == name) { return variable(static_cast<int>(i)); }
    }
    if (name == "pi") { return constant(std::numbers::pi); }
    if (name == "e") { return constant(std::numbers::e); }
    pos_ = start;
    fail("unknown variable '" + name + "'");
  }

  NodePtr call(const std::string & name, const std::vector<NodePtr> & args, std::size_t start)
  {
    struct Unary
    {
      const char * name;
      Op op;
    };
    static constexpr std::array<Unary, 7> unary{{{"sin", Op::Sin},
                                                 {"cos", Op::Cos},
                                                 {"tan", Op::Tan},
                                                 {"exp", Op::Exp},
                                                 {"log", Op::Log},
                                                 {"sqrt", Op::Sqrt},
                                                 {"abs", Op::Abs}}};
    for (const auto & u : unary) {
      if (name == u.name) {
        if (args.size() != 1) {
          pos_ = start;
          fail(name + " takes one argument");
        }
        return make(u.op, args[0]);
      }
    }
    Op op = Op::Const;
    if (name == "pow") { op = Op::Pow; }
    if (name == "max") { op = Op::Max; }
    if (name == "min") { op = Op::Min; }
    if (op == Op::Const) {
      pos_ = start;
      fail("unknown function '" + name + "'");
    }
    if (args.size() < 2 || (op == Op::Pow && args.size() != 2)) {
      pos_ = start;
      fail(name + " needs two arguments");
    }
    NodePtr n = args[0];
    for (std::size_t k = 1; k < args.size(); ++k) { n = make(op, n, args[k]); }
    return n;
  }

  std::string_view src_;
  const std::vector<std::string> & vars_;
  std::size_t base_;
  std::size_t pos_ = 0;
};

inline NodePtr parse(std::string_view src, const std::vector<std::string> & vars, std::size_t base_offset = 0)
{
  return Parser(src, vars, base_offset).parse();
}

/// Splits on ';' and parses each part; ParseError positions refer to the whole source.
inline std::vector<NodePtr> parse_list(std::string_view src, const std::vector<std::string> & vars)
{
  std::vector<NodePtr> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = src.find(';', start);
    const std::string_view part = src.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    out.push_back(parse(part, vars, start));
    if (end == std::string_view::npos) { break; }
    start = end + 1;
  }
  return out;
}

inline std::vector<std::string> numbered(const std::string & prefix, int count)
{
  std::vector<std::string> names;
  for (int i = 1; i <= count; ++i) { names.push_back(prefix + std::to_string(i)); }
  return names;
}

}  // namespace nilarea::expr
