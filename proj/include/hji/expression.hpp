#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace hji {

/// Values bound to the free symbols of an Expression.
///
/// `x` is an alias of `x1`; `r` is the Euclidean norm of the state.
struct ExpressionVariables {
  double x1 = 0.0;
  double x2 = 0.0;
  double r = 0.0;
  double u1 = 0.0;
  double u2 = 0.0;
};

/// A compiled scalar arithmetic expression used by inline JSON models.
///
/// Grammar: numbers, the symbols x, x1, x2, r, u1, u2, pi, the binary
/// operators + - * / ^ (power, right associative), unary minus, and the
/// functions abs exp log sqrt sin cos tan tanh sgn (one argument) and
/// min max pow (two arguments). Parsing compiles to postfix code; evaluation
/// is allocation free.
class Expression {
 public:
  Expression() = default;

  /// Throws ConfigurationError with the offending column on a syntax error.
  static Expression parse(std::string_view text);

  double evaluate(const ExpressionVariables& vars) const;

  const std::string& source() const { return source_; }

  /// True when the expression mentions u1 or u2.
  bool dependsOnControls() const { return usesControls_; }

  enum class Op : unsigned char {
    Constant, X1, X2, R, U1, U2,
    Add, Sub, Mul, Div, Pow, Neg,
    Abs, Exp, Log, Sqrt, Sin, Cos, Tan, Tanh, Sgn,
    Min, Max,
  };

  struct Instr {
    Op op;
    double value;
  };

 private:
  std::vector<Instr> code_;
  std::string source_;
  bool usesControls_ = false;

  friend class ExpressionParser;
};

}  // namespace hji
