#include "biasbench/expression.hpp"

#include <fmt/format.h>

#include <cctype>
#include <charconv>
#include <cmath>
#include <set>

#include "biasbench/error.hpp"

namespace biasbench {

NumericExpr::NumericExpr(ExprPtr root, std::string source)
    : root_(std::move(root)), source_(std::move(source)) {}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_integral(double v) { return std::isfinite(v) && v == std::floor(v); }

ExprPtr make(std::size_t pos, auto node) {
  auto n = std::make_shared<ExprNode>();
  n->node = std::move(node);
  n->position = pos;
  return n;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  ExprPtr parse() {
    skip_ws();
    if (at_end()) fail("empty expression");
    ExprPtr e = parse_expr();
    skip_ws();
    if (!at_end()) fail(fmt::format("unexpected '{}'", src_[pos_]));
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, "", pos_); }

  bool at_end() const { return pos_ >= src_.size(); }

  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  // Returns the operator at the cursor (ASCII or UTF-8 alias) and its byte length.
  std::pair<char, std::size_t> peek_op() const {
    if (at_end()) return {'\0', 0};
    char c = src_[pos_];
    if (c == '+' || c == '-' || c == '*' || c == '/') return {c, 1};
    auto rest = src_.substr(pos_);
    if (rest.starts_with("\xE2\x88\x92")) return {'-', 3};  // U+2212 minus
    if (rest.starts_with("\xC3\x97")) return {'*', 2};      // U+00D7 multiplication
    if (rest.starts_with("\xC3\xB7")) return {'/', 2};      // U+00F7 division
    return {'\0', 0};
  }

  void expect(char c) {
    skip_ws();
    if (at_end() || src_[pos_] != c) fail(fmt::format("expected '{}'", c));
    ++pos_;
  }

  ExprPtr parse_expr() {
    ExprPtr lhs = parse_term();
    for (;;) {
      skip_ws();
      auto [op, len] = peek_op();
      if (op != '+' && op != '-') return lhs;
      std::size_t at = pos_;
      pos_ += len;
      ExprPtr rhs = parse_term();
      lhs = make(at, BinaryNode{op == '+' ? BinaryOp::Add : BinaryOp::Sub, lhs, rhs});
    }
  }

  ExprPtr parse_term() {
    ExprPtr lhs = parse_unary();
    for (;;) {
      skip_ws();
      auto [op, len] = peek_op();
      if (op != '*' && op != '/') return lhs;
      std::size_t at = pos_;
      pos_ += len;
      ExprPtr rhs = parse_unary();
      lhs = make(at, BinaryNode{op == '*' ? BinaryOp::Mul : BinaryOp::Div, lhs, rhs});
    }
  }

  ExprPtr parse_unary() {
    skip_ws();
    auto [op, len] = peek_op();
    if (op == '-') {
      std::size_t at = pos_;
      pos_ += len;
      return make(at, NegateNode{parse_unary()});
    }
    return parse_primary();
  }

  double parse_number_literal(bool allow_sign, bool* integral) {
    skip_ws();
    std::size_t start = pos_;
    bool negative = false;
    if (allow_sign) {
      auto [op, len] = peek_op();
      if (op == '-' || op == '+') {
        negative = op == '-';
        pos_ += len;
        skip_ws();
      }
    }
    std::size_t digits_start = pos_;
    bool seen_dot = false;
    while (!at_end() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) ||
                         (src_[pos_] == '.' && !seen_dot))) {
      if (src_[pos_] == '.') seen_dot = true;
      ++pos_;
    }
    if (pos_ == digits_start) {
      pos_ = start;
      fail("expected number");
    }
    std::string text(src_.substr(digits_start, pos_ - digits_start));
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      pos_ = start;
      fail("malformed number");
    }
    if (integral != nullptr) *integral = !seen_dot || is_integral(v);
    return negative ? -v : v;
  }

  ExprPtr parse_primary() {
    skip_ws();
    if (at_end()) fail("unexpected end of expression");
    std::size_t at = pos_;
    char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      bool integral = false;
      double v = parse_number_literal(false, &integral);
      return make(at, LiteralNode{v, integral});
    }
    if (c == '[') {
      ++pos_;
      double lo = parse_number_literal(true, nullptr);
      expect(',');
      double hi = parse_number_literal(true, nullptr);
      expect(']');
      if (lo > hi) {
        pos_ = at;
        fail(fmt::format("range lower bound {} exceeds upper bound {}", lo, hi));
      }
      return make(at, RangeNode{lo, hi});
    }
    if (c == '(') {
      ++pos_;
      ExprPtr inner = parse_expr();
      expect(')');
      return inner;
    }
    if (is_ident_start(c)) {
      std::size_t start = pos_;
      while (!at_end() && is_ident_char(src_[pos_])) ++pos_;
      std::string name(src_.substr(start, pos_ - start));
      skip_ws();
      if (name == "round" && !at_end() && src_[pos_] == '(') {
        ++pos_;
        ExprPtr inner = parse_expr();
        int digits = 0;
        skip_ws();
        if (!at_end() && src_[pos_] == ',') {
          ++pos_;
          bool integral = false;
          double d = parse_number_literal(false, &integral);
          if (!integral || d > 12) fail("round() digits must be an integer in [0, 12]");
          digits = static_cast<int>(d);
        }
        expect(')');
        return make(at, RoundNode{inner, digits});
      }
      return make(at, RefNode{std::move(name)});
    }
    fail(fmt::format("unexpected '{}'", c));
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

void collect_refs(const ExprNode& n, std::vector<std::string>& out, std::set<std::string>& seen) {
  std::visit(overloaded{
                 [](const LiteralNode&) {},
                 [](const RangeNode&) {},
                 [&](const RefNode& r) {
                   if (seen.insert(r.name).second) out.push_back(r.name);
                 },
                 [&](const NegateNode& u) { collect_refs(*u.operand, out, seen); },
                 [&](const BinaryNode& b) {
                   collect_refs(*b.lhs, out, seen);
                   collect_refs(*b.rhs, out, seen);
                 },
                 [&](const RoundNode& r) { collect_refs(*r.operand, out, seen); },
             },
             n.node);
}

const BoundValue& lookup(const Bindings& bindings, const std::string& name) {
  auto it = bindings.find(name);
  if (it == bindings.end()) throw EvalError(fmt::format("unresolved reference '{}'", name));
  return it->second;
}

double eval_node(const ExprNode& n, const Bindings& bindings, RandomSource& rng) {
  return std::visit(
      overloaded{
          [](const LiteralNode& l) { return l.value; },
          [&](const RangeNode& r) { return rng.uniform(r.lo, r.hi); },
          [&](const RefNode& r) {
            const BoundValue& v = lookup(bindings, r.name);
            if (!v.number) throw EvalError(fmt::format("reference '{}' is not numeric", r.name));
            return *v.number;
          },
          [&](const NegateNode& u) { return -eval_node(*u.operand, bindings, rng); },
          [&](const BinaryNode& b) {
            // Left operand first so range draws follow source order.
            double lhs = eval_node(*b.lhs, bindings, rng);
            double rhs = eval_node(*b.rhs, bindings, rng);
            switch (b.op) {
              case BinaryOp::Add: return lhs + rhs;
              case BinaryOp::Sub: return lhs - rhs;
              case BinaryOp::Mul: return lhs * rhs;
              case BinaryOp::Div:
                if (rhs == 0.0) throw EvalError(fmt::format("division by zero at offset {}", n.position));
                return lhs / rhs;
            }
            return 0.0;
          },
          [&](const RoundNode& r) {
            double v = eval_node(*r.operand, bindings, rng);
            double scale = std::pow(10.0, r.digits);
            return std::round(v * scale) / scale;
          },
      },
      n.node);
}

bool integer_typed(const ExprNode& n, const Bindings& bindings) {
  return std::visit(overloaded{
                        [](const LiteralNode& l) { return l.integral; },
                        [](const RangeNode& r) { return is_integral(r.lo) && is_integral(r.hi); },
                        [&](const RefNode& r) {
                          auto it = bindings.find(r.name);
                          return it != bindings.end() && it->second.number &&
                                 is_integral(*it->second.number);
                        },
                        [&](const NegateNode& u) { return integer_typed(*u.operand, bindings); },
                        [&](const BinaryNode& b) {
                          return b.op != BinaryOp::Div && integer_typed(*b.lhs, bindings) &&
                                 integer_typed(*b.rhs, bindings);
                        },
                        [&](const RoundNode& r) {
                          return r.digits == 0 || integer_typed(*r.operand, bindings);
                        },
                    },
                    n.node);
}

}  // namespace

std::vector<std::string> NumericExpr::references() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  if (root_) collect_refs(*root_, out, seen);
  return out;
}

NumericExpr parse_expression(std::string_view source) {
  Parser p(source);
  return NumericExpr(p.parse(), std::string(source));
}

bool is_integer_typed(const NumericExpr& expr, const Bindings& bindings) {
  return !expr.empty() && integer_typed(expr.root(), bindings);
}

double eval_expression(const NumericExpr& expr, const Bindings& bindings, RandomSource& rng) {
  if (expr.empty()) throw EvalError("empty expression");
  double v = eval_node(expr.root(), bindings, rng);
  if (!std::isfinite(v)) throw EvalError(fmt::format("expression '{}' is not finite", expr.source()));
  if (integer_typed(expr.root(), bindings)) v = std::round(v);
  return v;
}

std::string format_number(double value) {
  if (is_integral(value) && std::abs(value) < 1e15) return fmt::format("{:.0f}", value);
  std::string s = fmt::format("{:.4f}", value);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  if (s == "-0") s = "0";
  return s;
}

}  // namespace biasbench
