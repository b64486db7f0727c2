#include "hji/expression.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <numbers>
#include <string>

#include "hji/error.hpp"

namespace hji {

namespace {

constexpr std::size_t kMaxStack = 64;

struct FunctionEntry {
  std::string_view name;
  Expression::Op op;
  int arity;
};

constexpr std::array<FunctionEntry, 12> kFunctions{{
    {"abs", Expression::Op::Abs, 1},
    {"exp", Expression::Op::Exp, 1},
    {"log", Expression::Op::Log, 1},
    {"sqrt", Expression::Op::Sqrt, 1},
    {"sin", Expression::Op::Sin, 1},
    {"cos", Expression::Op::Cos, 1},
    {"tan", Expression::Op::Tan, 1},
    {"tanh", Expression::Op::Tanh, 1},
    {"sgn", Expression::Op::Sgn, 1},
    {"min", Expression::Op::Min, 2},
    {"max", Expression::Op::Max, 2},
    {"pow", Expression::Op::Pow, 2},
}};

}  // namespace

// Recursive descent over
//   sum     := product (('+'|'-') product)*
//   product := unary (('*'|'/') unary)*
//   unary   := ('-'|'+') unary | power
//   power   := atom ('^' unary)?
//   atom    := number | symbol | func '(' sum (',' sum)* ')' | '(' sum ')'
class ExpressionParser {
 public:
  explicit ExpressionParser(std::string_view text) : text_(text) {}

  Expression run() {
    Expression e;
    e.source_ = std::string(text_);
    out_ = &e;
    parseSum();
    skipSpace();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    if (maxDepth_ > kMaxStack) fail("expression nests too deeply");
    return e;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  Expression* out_ = nullptr;
  std::size_t depth_ = 0;
  std::size_t maxDepth_ = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigurationError("expression '" + std::string(text_) + "': " + what +
                             " at column " + std::to_string(pos_ + 1));
  }

  void skipSpace() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skipSpace();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void emit(Expression::Op op, double value = 0.0) {
    using Op = Expression::Op;
    out_->code_.push_back({op, value});
    switch (op) {
      case Op::Constant: case Op::X1: case Op::X2: case Op::R: case Op::U1: case Op::U2:
        ++depth_;
        break;
      case Op::Add: case Op::Sub: case Op::Mul: case Op::Div: case Op::Pow:
      case Op::Min: case Op::Max:
        --depth_;
        break;
      default:
        break;
    }
    maxDepth_ = std::max(maxDepth_, depth_);
    if (op == Op::U1 || op == Op::U2) out_->usesControls_ = true;
  }

  void parseSum() {
    parseProduct();
    for (;;) {
      if (accept('+')) {
        parseProduct();
        emit(Expression::Op::Add);
      } else if (accept('-')) {
        parseProduct();
        emit(Expression::Op::Sub);
      } else {
        return;
      }
    }
  }

  void parseProduct() {
    parseUnary();
    for (;;) {
      if (accept('*')) {
        parseUnary();
        emit(Expression::Op::Mul);
      } else if (accept('/')) {
        parseUnary();
        emit(Expression::Op::Div);
      } else {
        return;
      }
    }
  }

  void parseUnary() {
    if (accept('-')) {
      parseUnary();
      emit(Expression::Op::Neg);
    } else if (accept('+')) {
      parseUnary();
    } else {
      parsePower();
    }
  }

  void parsePower() {
    parseAtom();
    if (accept('^')) {
      parseUnary();
      emit(Expression::Op::Pow);
    }
  }

  void parseAtom() {
    skipSpace();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      parseSum();
      if (!accept(')')) fail("expected ')'");
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      parseNumber();
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      const std::string_view name = text_.substr(start, pos_ - start);
      parseSymbol(name, start);
      return;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  void parseNumber() {
    const std::string rest(text_.substr(pos_));
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(rest, &used);
    } catch (const std::exception&) {
      fail("malformed number");
    }
    pos_ += used;
    emit(Expression::Op::Constant, value);
  }

  void parseSymbol(std::string_view name, std::size_t start) {
    using Op = Expression::Op;
    if (name == "x" || name == "x1") return emit(Op::X1);
    if (name == "x2") return emit(Op::X2);
    if (name == "r") return emit(Op::R);
    if (name == "u1") return emit(Op::U1);
    if (name == "u2") return emit(Op::U2);
    if (name == "pi") return emit(Op::Constant, std::numbers::pi);
    for (const auto& f : kFunctions) {
      if (f.name != name) continue;
      if (!accept('(')) fail("expected '(' after " + std::string(name));
      parseSum();
      for (int k = 1; k < f.arity; ++k) {
        if (!accept(',')) fail(std::string(name) + " takes " + std::to_string(f.arity) + " arguments");
        parseSum();
      }
      if (!accept(')')) fail("expected ')' closing " + std::string(name));
      emit(f.op);
      return;
    }
    pos_ = start;
    fail("unknown symbol '" + std::string(name) + "'");
  }
};

Expression Expression::parse(std::string_view text) { return ExpressionParser(text).run(); }

double Expression::evaluate(const ExpressionVariables& v) const {
  std::array<double, kMaxStack> stack;
  std::size_t top = 0;
  for (const Instr& in : code_) {
    switch (in.op) {
      case Op::Constant: stack[top++] = in.value; break;
      case Op::X1: stack[top++] = v.x1; break;
      case Op::X2: stack[top++] = v.x2; break;
      case Op::R: stack[top++] = v.r; break;
      case Op::U1: stack[top++] = v.u1; break;
      case Op::U2: stack[top++] = v.u2; break;
      case Op::Add: --top; stack[top - 1] += stack[top]; break;
      case Op::Sub: --top; stack[top - 1] -= stack[top]; break;
      case Op::Mul: --top; stack[top - 1] *= stack[top]; break;
      case Op::Div: --top; stack[top - 1] /= stack[top]; break;
      case Op::Pow: --top; stack[top - 1] = std::pow(stack[top - 1], stack[top]); break;
      case Op::Min: --top; stack[top - 1] = std::min(stack[top - 1], stack[top]); break;
      case Op::Max: --top; stack[top - 1] = std::max(stack[top - 1], stack[top]); break;
      case Op::Neg: stack[top - 1] = -stack[top - 1]; break;
      case Op::Abs: stack[top - 1] = std::abs(stack[top - 1]); break;
      case Op::Exp: stack[top - 1] = std::exp(stack[top - 1]); break;
      case Op::Log: stack[top - 1] = std::log(stack[top - 1]); break;
      case Op::Sqrt: stack[top - 1] = std::sqrt(stack[top - 1]); break;
      case Op::Sin: stack[top - 1] = std::sin(stack[top - 1]); break;
      case Op::Cos: stack[top - 1] = std::cos(stack[top - 1]); break;
      case Op::Tan: stack[top - 1] = std::tan(stack[top - 1]); break;
      case Op::Tanh: stack[top - 1] = std::tanh(stack[top - 1]); break;
      case Op::Sgn: {
        const double a = stack[top - 1];
        stack[top - 1] = (a > 0.0) - (a < 0.0);
        break;
      }
    }
  }
  return top == 1 ? stack[0] : 0.0;
}

}  // namespace hji
