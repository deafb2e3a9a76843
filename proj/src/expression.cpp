#include "tubecert/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstring>

#include "tubecert/error.hpp"

namespace tubecert {

namespace {
constexpr int kStackCapacity = 128;
constexpr double kPi = 3.14159265358979323846;
}  // namespace

class ExpressionParser {
 public:
  ExpressionParser(const std::string& text, const std::map<std::string, int>& variables)
      : text_(text), vars_(variables) {}

  Expression run() {
    Expression e;
    e.text_ = text_;
    out_ = &e;
    pos_ = 0;
    depth_ = 0;
    parse_sum();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    int slots = 0;
    for (const auto& [name, slot] : vars_) slots = std::max(slots, slot + 1);
    e.slot_count_ = slots;
    e.max_stack_ = max_depth_;
    if (max_depth_ > kStackCapacity) fail("expression too deep");
    if (e.code_.empty()) fail("empty expression");
    return e;
  }

 private:
  void fail(const std::string& message) const {
    throw Error(ErrorCode::ParseError, "expression",
                "'" + text_ + "' column " + std::to_string(pos_ + 1) + ": " + message);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  void emit(Expression::Op op, std::int32_t index = 0) {
    out_->code_.push_back({op, index});
    switch (op) {
      case Expression::Op::PushConst:
      case Expression::Op::PushVar:
        ++depth_;
        max_depth_ = std::max(max_depth_, depth_);
        break;
      case Expression::Op::Neg:
      case Expression::Op::Sin:
      case Expression::Op::Cos:
      case Expression::Op::Sqrt:
        break;
      default:
        --depth_;  // binary ops pop two, push one
    }
  }

  void emit_const(double v) {
    out_->constants_.push_back(v);
    emit(Expression::Op::PushConst, static_cast<std::int32_t>(out_->constants_.size() - 1));
  }

  void parse_sum() {
    parse_product();
    for (;;) {
      if (consume('+')) {
        parse_product();
        emit(Expression::Op::Add);
      } else if (consume('-')) {
        parse_product();
        emit(Expression::Op::Sub);
      } else {
        return;
      }
    }
  }

  void parse_product() {
    parse_unary();
    for (;;) {
      if (consume('*')) {
        parse_unary();
        emit(Expression::Op::Mul);
      } else if (consume('/')) {
        parse_unary();
        emit(Expression::Op::Div);
      } else {
        return;
      }
    }
  }

  void parse_unary() {
    if (consume('-')) {
      parse_unary();
      emit(Expression::Op::Neg);
      return;
    }
    if (consume('+')) {
      parse_unary();
      return;
    }
    parse_power();
  }

  void parse_power() {
    parse_atom();
    if (consume('^')) {
      parse_unary();  // right associative, allows x^-2
      emit(Expression::Op::Pow);
    }
  }

  void parse_atom() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      parse_sum();
      if (!consume(')')) fail("expected ')'");
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      parse_number();
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      parse_identifier();
      return;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  void parse_number() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
      ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t mark = pos_++;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      } else {
        pos_ = mark;  // 'e' starts an identifier, not an exponent
      }
    }
    try {
      emit_const(std::stod(text_.substr(start, pos_ - start)));
    } catch (const std::exception&) {
      pos_ = start;
      fail("malformed number");
    }
  }

  void parse_identifier() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                   text_[pos_] == '_'))
      ++pos_;
    std::string name = text_.substr(start, pos_ - start);
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      ++pos_;
      parse_sum();
      if (!consume(')')) fail("expected ')' after function argument");
      if (name == "sin") {
        emit(Expression::Op::Sin);
      } else if (name == "cos") {
        emit(Expression::Op::Cos);
      } else if (name == "sqrt") {
        emit(Expression::Op::Sqrt);
      } else {
        pos_ = start;
        fail("unknown function '" + name + "'");
      }
      return;
    }
    if (name == "pi") {
      emit_const(kPi);
      return;
    }
    auto it = vars_.find(name);
    if (it == vars_.end()) {
      pos_ = start;
      fail("unknown variable '" + name + "'");
    }
    emit(Expression::Op::PushVar, it->second);
  }

  const std::string& text_;
  const std::map<std::string, int>& vars_;
  Expression* out_ = nullptr;
  std::size_t pos_ = 0;
  int depth_ = 0;
  int max_depth_ = 0;
};

Expression Expression::parse(const std::string& text, const std::map<std::string, int>& variables) {
  return ExpressionParser(text, variables).run();
}

double Expression::eval(const double* args, int count) const {
  if (count < slot_count_)
    throw Error(ErrorCode::DimensionMismatch, "expression",
                "'" + text_ + "' needs " + std::to_string(slot_count_) + " arguments, got " +
                    std::to_string(count));
  double stack[kStackCapacity];
  int top = 0;
  for (const Instr& instr : code_) {
    switch (instr.op) {
      case Op::PushConst:
        stack[top++] = constants_[static_cast<std::size_t>(instr.index)];
        break;
      case Op::PushVar:
        stack[top++] = args[instr.index];
        break;
      case Op::Add:
        stack[top - 2] += stack[top - 1];
        --top;
        break;
      case Op::Sub:
        stack[top - 2] -= stack[top - 1];
        --top;
        break;
      case Op::Mul:
        stack[top - 2] *= stack[top - 1];
        --top;
        break;
      case Op::Div:
        stack[top - 2] /= stack[top - 1];
        --top;
        break;
      case Op::Pow:
        stack[top - 2] = std::pow(stack[top - 2], stack[top - 1]);
        --top;
        break;
      case Op::Neg:
        stack[top - 1] = -stack[top - 1];
        break;
      case Op::Sin:
        stack[top - 1] = std::sin(stack[top - 1]);
        break;
      case Op::Cos:
        stack[top - 1] = std::cos(stack[top - 1]);
        break;
      case Op::Sqrt:
        stack[top - 1] = std::sqrt(stack[top - 1]);
        break;
    }
  }
  return stack[0];
}

double Expression::eval(const Eigen::VectorXd& args) const {
  return eval(args.data(), static_cast<int>(args.size()));
}

std::map<std::string, int> ambient_variables(int ambient_dim, const std::vector<std::string>& extra) {
  std::map<std::string, int> vars;
  static const char* aliases[] = {"x", "y", "z", "w"};
  for (int i = 0; i < ambient_dim; ++i) {
    vars["x" + std::to_string(i + 1)] = i;
    if (i < 4) vars[aliases[i]] = i;
  }
  int slot = ambient_dim;
  for (const auto& name : extra) vars[name] = slot++;
  return vars;
}

std::map<std::string, int> parameter_variables(int intrinsic_dim, const std::vector<std::string>& extra) {
  std::map<std::string, int> vars;
  static const char* aliases[] = {"u", "v"};
  for (int i = 0; i < intrinsic_dim; ++i) {
    vars["u" + std::to_string(i + 1)] = i;
    if (i < 2) vars[aliases[i]] = i;
  }
  int slot = intrinsic_dim;
  for (const auto& name : extra) vars[name] = slot++;
  return vars;
}

}  // namespace tubecert
