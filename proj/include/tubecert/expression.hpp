#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace tubecert {

/// A compiled arithmetic expression over named variables.
///
/// Grammar: +, -, *, /, ^ (right associative), unary minus, parentheses,
/// numeric literals, the constant pi, and the functions sin, cos, sqrt.
/// Parsing flattens the tree into a postfix tape; evaluation walks the tape
/// with a fixed-size local stack and is reentrant.
class Expression {
 public:
  Expression() = default;

  /// `variables` maps identifier -> argument slot. Several names may share a
  /// slot (aliases). Throws Error{ParseError} with a column number on bad
  /// input.
  static Expression parse(const std::string& text, const std::map<std::string, int>& variables);

  /// args must provide every slot referenced by the expression.
  double eval(const Eigen::VectorXd& args) const;
  double eval(const double* args, int count) const;

  const std::string& text() const { return text_; }
  int slot_count() const { return slot_count_; }
  bool empty() const { return code_.empty(); }

 private:
  enum class Op : std::uint8_t {
    PushConst,
    PushVar,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Neg,
    Sin,
    Cos,
    Sqrt,
  };
  struct Instr {
    Op op;
    std::int32_t index = 0;  // constant pool or variable slot
  };

  std::vector<Instr> code_;
  std::vector<double> constants_;
  std::string text_;
  int slot_count_ = 0;
  int max_stack_ = 0;

  friend class ExpressionParser;
};

/// Variable table for ambient coordinates: x1..xn plus the aliases
/// x, y, z, w for the first four, and any extra named slots appended after
/// the ambient block (e.g. parameters or the deformation time).
std::map<std::string, int> ambient_variables(int ambient_dim,
                                             const std::vector<std::string>& extra = {});

/// Variable table for patch parameters: u1..um plus aliases u, v, and extras.
std::map<std::string, int> parameter_variables(int intrinsic_dim,
                                               const std::vector<std::string>& extra = {});

}  // namespace tubecert
