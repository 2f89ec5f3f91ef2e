#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "biasbench/rng.hpp"

namespace biasbench {

/// Value bound to a placeholder tag. Phrase tags carry text only; numeric
/// tags also keep the unformatted number so later expressions can use it.
struct BoundValue {
  std::string text;
  std::optional<double> number;

  friend bool operator==(const BoundValue&, const BoundValue&) = default;
};

using Bindings = std::map<std::string, BoundValue>;

enum class BinaryOp { Add, Sub, Mul, Div };

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct LiteralNode {
  double value;
  bool integral;
};
struct RangeNode {
  double lo;
  double hi;
};
struct RefNode {
  std::string name;
};
struct NegateNode {
  ExprPtr operand;
};
struct BinaryNode {
  BinaryOp op;
  ExprPtr lhs;
  ExprPtr rhs;
};
/// round(expr) or round(expr, digits).
struct RoundNode {
  ExprPtr operand;
  int digits;
};

struct ExprNode {
  std::variant<LiteralNode, RangeNode, RefNode, NegateNode, BinaryNode, RoundNode> node;
  std::size_t position = 0;  // byte offset of the node in the source text
};

/// Immutable arithmetic expression over literals, `[lo, hi]` uniform ranges
/// and references to earlier tags.
///
/// Grammar (standard precedence, left associative):
///
///     expr    := term (('+' | '-') term)*
///     term    := unary (('*' | '/') unary)*
///     unary   := '-' unary | primary
///     primary := number | '[' signed ',' signed ']' | name
///              | 'round' '(' expr [',' integer] ')' | '(' expr ')'
///
/// The Unicode operators U+2212, U+00D7 and U+00F7 are accepted as aliases.
class NumericExpr {
 public:
  NumericExpr() = default;
  NumericExpr(ExprPtr root, std::string source);

  const ExprNode& root() const { return *root_; }
  const std::string& source() const { return source_; }
  bool empty() const { return root_ == nullptr; }

  /// Referenced tag names in order of first appearance.
  std::vector<std::string> references() const;

 private:
  ExprPtr root_;
  std::string source_;
};

/// Throws ParseError with a byte offset into `source`.
NumericExpr parse_expression(std::string_view source);

/// Evaluates `expr`. Range nodes draw from `rng` in left-to-right order.
/// When the whole expression is integer-typed (integral literals and
/// ranges, integral references, no division) the result is rounded to the
/// nearest integer. Throws EvalError on division by zero or an unbound
/// reference.
double eval_expression(const NumericExpr& expr, const Bindings& bindings, RandomSource& rng);

/// True when the expression can only produce integers after default rounding.
bool is_integer_typed(const NumericExpr& expr, const Bindings& bindings);

/// Text form of a numeric tag value: integers without a decimal point,
/// other values with up to four decimals and trailing zeros removed.
std::string format_number(double value);

}  // namespace biasbench
