#pragma once

// Expression language for first integrals, slope fields and vector fields.
//
//   expr    := term (("+" | "-") term)*
//   term    := unary (("*" | "/") unary)*
//   unary   := ("-" | "+") unary | power
//   power   := primary ("^" unary)?          (right associative)
//   primary := number | name | name "(" expr ")" | "(" expr ")"
//
// Names resolve to variables first, then to caller-supplied constants, then
// to `pi`. Constants are substituted as numerals while parsing, so an AST
// only ever holds numbers, variable indices and operators. Functions: exp,
// log, sin, cos, sqrt (one argument each).

#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "webgeom/error.hpp"
#include "webgeom/jet.hpp"

namespace webgeom {

namespace expr {

enum class BinaryOp { Add, Sub, Mul, Div, Pow };
enum class Function { Exp, Log, Sin, Cos, Sqrt };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

/// Always finite and non-negative; negative constants become Negate(Number).
struct Number {
  double value;
};
struct Variable {
  std::size_t index;
};
struct Negate {
  NodePtr operand;
};
struct Binary {
  BinaryOp op;
  NodePtr lhs, rhs;
};
struct Call {
  Function fn;
  NodePtr arg;
};

struct Node {
  std::variant<Number, Variable, Negate, Binary, Call> value;
  SourceSpan span;
};

inline const char* function_name(Function f) {
  switch (f) {
    case Function::Exp: return "exp";
    case Function::Log: return "log";
    case Function::Sin: return "sin";
    case Function::Cos: return "cos";
    case Function::Sqrt: return "sqrt";
  }
  return "?";
}

inline bool lookup_function(std::string_view name, Function& out) {
  static constexpr std::pair<std::string_view, Function> table[] = {
      {"exp", Function::Exp}, {"log", Function::Log}, {"sin", Function::Sin},
      {"cos", Function::Cos}, {"sqrt", Function::Sqrt}};
  for (auto [n, f] : table) {
    if (n == name) {
      out = f;
      return true;
    }
  }
  return false;
}

/// Structural equality, ignoring source spans.
inline bool equivalent(const Node& a, const Node& b) {
  if (a.value.index() != b.value.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.value);
        if constexpr (std::is_same_v<T, Number>) {
          return x.value == y.value;
        } else if constexpr (std::is_same_v<T, Variable>) {
          return x.index == y.index;
        } else if constexpr (std::is_same_v<T, Negate>) {
          return equivalent(*x.operand, *y.operand);
        } else if constexpr (std::is_same_v<T, Binary>) {
          return x.op == y.op && equivalent(*x.lhs, *y.lhs) && equivalent(*x.rhs, *y.rhs);
        } else {
          return x.fn == y.fn && equivalent(*x.arg, *y.arg);
        }
      },
      a.value);
}

namespace detail {

// Binding strength used by both the parser and the printer.
enum Level { kSum = 1, kProduct = 2, kUnary = 3, kPower = 4, kAtom = 5 };

inline int level(const Node& n) {
  if (const auto* b = std::get_if<Binary>(&n.value)) {
    switch (b->op) {
      case BinaryOp::Add:
      case BinaryOp::Sub: return kSum;
      case BinaryOp::Mul:
      case BinaryOp::Div: return kProduct;
      case BinaryOp::Pow: return kPower;
    }
  }
  if (std::holds_alternative<Negate>(n.value)) return kUnary;
  return kAtom;
}

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void print(const Node& n, std::span<const std::string> names, std::string& out);

inline void print_child(const Node& child, bool parens, std::span<const std::string> names, std::string& out) {
  if (parens) out += '(';
  print(child, names, out);
  if (parens) out += ')';
}

inline void print(const Node& n, std::span<const std::string> names, std::string& out) {
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Number>) {
          out += format_number(x.value);
        } else if constexpr (std::is_same_v<T, Variable>) {
          out += names[x.index];
        } else if constexpr (std::is_same_v<T, Negate>) {
          out += '-';
          print_child(*x.operand, level(*x.operand) < kUnary, names, out);
        } else if constexpr (std::is_same_v<T, Binary>) {
          const int lv = level(n);
          if (x.op == BinaryOp::Pow) {
            print_child(*x.lhs, level(*x.lhs) <= kPower, names, out);
            out += '^';
            print_child(*x.rhs, level(*x.rhs) < kUnary, names, out);
            return;
          }
          print_child(*x.lhs, level(*x.lhs) < lv, names, out);
          static constexpr const char* symbols[] = {" + ", " - ", "*", "/", "^"};
          out += symbols[static_cast<int>(x.op)];
          print_child(*x.rhs, level(*x.rhs) <= lv, names, out);
        } else {
          out += function_name(x.fn);
          out += '(';
          print(*x.arg, names, out);
          out += ')';
        }
      },
      n.value);
}

class Parser {
 public:
  Parser(std::string_view text, std::span<const std::string> variables, const std::map<std::string, double>& bindings)
      : text_(text), variables_(variables), bindings_(bindings) {}

  NodePtr parse() {
    skip_space();
    auto root = parse_sum();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected input", "operator or end of input");
    return root;
  }

 private:
  static constexpr const char* kOperand = "number, name, '(' or sign";

  [[noreturn]] void fail(const std::string& what, const char* expected) const {
    throw SyntaxError(what, pos_, expected);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static NodePtr make(decltype(Node::value) v, SourceSpan span) {
    return std::make_shared<const Node>(Node{std::move(v), span});
  }

  NodePtr parse_sum() {
    auto lhs = parse_product();
    for (;;) {
      skip_space();
      if (pos_ >= text_.size()) return lhs;
      const char c = text_[pos_];
      if (c != '+' && c != '-') return lhs;
      ++pos_;
      auto rhs = parse_product();
      lhs = make(Binary{c == '+' ? BinaryOp::Add : BinaryOp::Sub, lhs, rhs}, {lhs->span.begin, rhs->span.end});
    }
  }

  NodePtr parse_product() {
    auto lhs = parse_unary();
    for (;;) {
      skip_space();
      if (pos_ >= text_.size()) return lhs;
      const char c = text_[pos_];
      if (c != '*' && c != '/') return lhs;
      ++pos_;
      auto rhs = parse_unary();
      lhs = make(Binary{c == '*' ? BinaryOp::Mul : BinaryOp::Div, lhs, rhs}, {lhs->span.begin, rhs->span.end});
    }
  }

  NodePtr parse_unary() {
    skip_space();
    const std::size_t start = pos_;
    if (accept('-')) {
      auto operand = parse_unary();
      return make(Negate{operand}, {start, operand->span.end});
    }
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  NodePtr parse_power() {
    auto base = parse_primary();
    if (accept('^')) {
      auto exponent = parse_unary();
      return make(Binary{BinaryOp::Pow, base, exponent}, {base->span.begin, exponent->span.end});
    }
    return base;
  }

  NodePtr parse_primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input", kOperand);
    const std::size_t start = pos_;
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      auto inner = parse_sum();
      if (!accept(')')) fail("missing closing parenthesis", "')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
        ++pos_;
      }
      const std::string name(text_.substr(start, pos_ - start));
      const SourceSpan span{start, pos_};
      skip_space();
      if (pos_ < text_.size() && text_[pos_] == '(') return parse_call(name, span);
      return resolve(name, span);
    }
    fail(std::string("unexpected character '") + c + "'", kOperand);
  }

  NodePtr parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_, ++n;
      return n;
    };
    std::size_t count = digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      count += digits();
    }
    if (count == 0) fail("malformed number", "digit");
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (digits() == 0) fail("malformed exponent", "digit");
    }
    const std::string literal(text_.substr(start, pos_ - start));
    const double v = std::strtod(literal.c_str(), nullptr);
    if (!std::isfinite(v)) {
      pos_ = start;
      fail("numeric literal out of range", "finite number");
    }
    return make(Number{v}, {start, pos_});
  }

  NodePtr parse_call(const std::string& name, SourceSpan name_span) {
    Function fn{};
    if (!lookup_function(name, fn)) throw UnknownIdentifier(name, name_span);
    ++pos_;  // '('
    std::vector<NodePtr> args;
    skip_space();
    if (!accept(')')) {
      do {
        args.push_back(parse_sum());
      } while (accept(','));
      if (!accept(')')) fail("missing closing parenthesis", "',' or ')'");
    }
    if (args.size() != 1) {
      throw SyntaxError("function '" + name + "' takes 1 argument, got " + std::to_string(args.size()),
                        name_span.begin, "");
    }
    return make(Call{fn, args.front()}, {name_span.begin, pos_});
  }

  NodePtr resolve(const std::string& name, SourceSpan span) {
    for (std::size_t i = 0; i < variables_.size(); ++i) {
      if (variables_[i] == name) return make(Variable{i}, span);
    }
    double value = 0.0;
    if (auto it = bindings_.find(name); it != bindings_.end()) {
      value = it->second;
    } else if (name == "pi") {
      value = std::numbers::pi;
    } else {
      throw UnknownIdentifier(name, span);
    }
    if (!std::isfinite(value)) throw InputError("constant '" + name + "' is not finite");
    auto literal = make(Number{std::abs(value)}, span);
    return value < 0.0 || std::signbit(value) ? make(Negate{literal}, span) : literal;
  }

  std::string_view text_;
  std::span<const std::string> variables_;
  const std::map<std::string, double>& bindings_;
  std::size_t pos_ = 0;
};

}  // namespace detail
}  // namespace expr

using ConstantTable = std::map<std::string, double>;

/// A parsed, immutable scalar expression over `nvars()` named variables.
class ScalarField {
 public:
  ScalarField() = default;

  static ScalarField parse(std::string text, std::vector<std::string> variables, const ConstantTable& constants = {}) {
    for (const auto& [name, value] : constants) {
      for (const auto& v : variables) {
        if (v == name) throw InputError("constant '" + name + "' shadows a variable");
      }
    }
    ScalarField f;
    f.root_ = expr::detail::Parser(text, variables, constants).parse();
    f.variables_ = std::move(variables);
    f.source_ = std::move(text);
    return f;
  }

  std::size_t nvars() const noexcept { return variables_.size(); }
  const std::vector<std::string>& variables() const noexcept { return variables_; }
  const std::string& source() const noexcept { return source_; }
  const expr::Node& root() const { return *root_; }
  bool empty() const noexcept { return !root_; }

  /// Re-parsable text with minimal parentheses.
  std::string print() const {
    std::string out;
    expr::detail::print(*root_, variables_, out);
    return out;
  }

  bool equivalent(const ScalarField& other) const {
    return variables_ == other.variables_ && expr::equivalent(*root_, *other.root_);
  }

  /// f(g_1, ..., g_n): every variable i is replaced by replacements[i]; the
  /// result lives over the replacements' variables.
  ScalarField compose(std::span<const ScalarField> replacements) const {
    if (replacements.size() != nvars()) throw ShapeMismatch("composition needs one expression per variable");
    const auto& target_vars = replacements.front().variables();
    std::vector<std::string> texts;
    for (const auto& g : replacements) {
      if (g.variables() != target_vars) throw ShapeMismatch("composition expressions disagree on variables");
      texts.push_back("(" + g.print() + ")");
    }
    std::string out;
    expr::detail::print(*root_, texts, out);
    return parse(out, target_vars);
  }

 private:
  expr::NodePtr root_;
  std::vector<std::string> variables_;
  std::string source_;
};

namespace expr::detail {

template <typename T>
struct Evaluator;

template <JetScalar Scalar>
struct Evaluator<Jet<Scalar>> {
  using Value = Jet<Scalar>;
  std::span<const Value> inputs;

  Value number(double v) const { return Value::constant(inputs[0].nvars(), inputs[0].order(), Scalar{v}); }
  Value variable(std::size_t i) const { return inputs[i]; }

  static Value power(const Value& base, const Value& exponent) {
    if (exponent.is_constant()) {
      const Scalar e = exponent[0];
      double r = 0.0;
      if constexpr (is_complex<Scalar>::value) {
        if (e.imag() != 0.0) return webgeom::exp(exponent * webgeom::log(base));
        r = e.real();
      } else {
        r = e;
      }
      return webgeom::pow(base, r);
    }
    return webgeom::exp(exponent * webgeom::log(base));
  }

  static Value call(Function f, const Value& a) {
    switch (f) {
      case Function::Exp: return webgeom::exp(a);
      case Function::Log: return webgeom::log(a);
      case Function::Sin: return webgeom::sin(a);
      case Function::Cos: return webgeom::cos(a);
      case Function::Sqrt: return webgeom::sqrt(a);
    }
    return a;
  }
};

template <JetScalar Scalar>
struct Evaluator<Scalar> {
  using Value = Scalar;
  std::span<const Value> inputs;

  Value number(double v) const { return Value{v}; }
  Value variable(std::size_t i) const { return inputs[i]; }

  static Value power(const Value& base, const Value& exponent) {
    // Same rules and domain as the jet path, evaluated at order 0.
    auto one = Jet<Scalar>::constant(1, 0, base);
    auto e = Jet<Scalar>::constant(1, 0, exponent);
    return Evaluator<Jet<Scalar>>::power(one, e)[0];
  }

  static Value call(Function f, const Value& a) {
    return Evaluator<Jet<Scalar>>::call(f, Jet<Scalar>::constant(1, 0, a))[0];
  }
};

template <typename Eval>
typename Eval::Value evaluate(const Node& n, const Eval& ev) {
  try {
    return std::visit(
        [&](const auto& x) -> typename Eval::Value {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, Number>) {
            return ev.number(x.value);
          } else if constexpr (std::is_same_v<T, Variable>) {
            return ev.variable(x.index);
          } else if constexpr (std::is_same_v<T, Negate>) {
            return -evaluate(*x.operand, ev);
          } else if constexpr (std::is_same_v<T, Binary>) {
            auto a = evaluate(*x.lhs, ev);
            auto b = evaluate(*x.rhs, ev);
            switch (x.op) {
              case BinaryOp::Add: return a + b;
              case BinaryOp::Sub: return a - b;
              case BinaryOp::Mul: return a * b;
              case BinaryOp::Div:
                if constexpr (std::is_same_v<typename Eval::Value, double> ||
                              std::is_same_v<typename Eval::Value, std::complex<double>>) {
                  if (!(std::abs(b) >= kDefaultPivotTol)) throw DivisionByNonUnit("division by zero");
                  return a / b;
                } else {
                  return a / b;
                }
              case BinaryOp::Pow: return Eval::power(a, b);
            }
            throw Error("bad operator");
          } else {
            return Eval::call(x.fn, evaluate(*x.arg, ev));
          }
        },
        n.value);
  } catch (Error& e) {
    e.set_span(n.span);
    throw;
  }
}

}  // namespace expr::detail

/// Taylor expansion of f composed with the given input jets (one per variable).
template <JetScalar Scalar>
Jet<Scalar> eval_jet(const ScalarField& f, std::span<const Jet<Scalar>> inputs) {
  if (inputs.size() != f.nvars() || inputs.empty()) {
    throw ShapeMismatch("expression over " + std::to_string(f.nvars()) + " variables given " +
                        std::to_string(inputs.size()) + " inputs");
  }
  for (const auto& in : inputs) {
    if (!in.same_shape(inputs[0])) throw ShapeMismatch("input jets differ in shape");
  }
  return expr::detail::evaluate(f.root(), expr::detail::Evaluator<Jet<Scalar>>{inputs});
}

template <JetScalar Scalar>
Jet<Scalar> eval_jet(const ScalarField& f, const std::vector<Jet<Scalar>>& inputs) {
  return eval_jet<Scalar>(f, std::span<const Jet<Scalar>>(inputs));
}

/// Taylor expansion of f at x0 truncated at `order`.
template <JetScalar Scalar = double>
Jet<Scalar> eval_jet(const ScalarField& f, std::span<const Scalar> x0, int order) {
  if (x0.size() != f.nvars()) throw ShapeMismatch("point dimension does not match expression");
  return eval_jet<Scalar>(f, seed_point<Scalar>(x0, order));
}

template <JetScalar Scalar = double>
Jet<Scalar> eval_jet(const ScalarField& f, const std::vector<Scalar>& x0, int order) {
  return eval_jet<Scalar>(f, std::span<const Scalar>(x0), order);
}

/// Plain pointwise value of f at x.
template <JetScalar Scalar = double>
Scalar evaluate(const ScalarField& f, std::span<const Scalar> x) {
  if (x.size() != f.nvars()) throw ShapeMismatch("point dimension does not match expression");
  return expr::detail::evaluate(f.root(), expr::detail::Evaluator<Scalar>{x});
}

template <JetScalar Scalar = double>
Scalar evaluate(const ScalarField& f, const std::vector<Scalar>& x) {
  return evaluate<Scalar>(f, std::span<const Scalar>(x));
}

}  // namespace webgeom
