#pragma once

#include <functional>
#include <string>
#include <string_view>

namespace ssr {

/// Arithmetic expression in one variable `k`.
///
/// Grammar: numbers, `k`, `pi`, + - * / ^ (right-associative), unary minus,
/// parentheses and the functions sin cos tan sqrt exp log abs.
class Expression {
 public:
  /// Throws ConfigError naming the 1-based column of the first bad token.
  static Expression parse(std::string_view text);
  static Expression constant(double value);

  double operator()(double k) const { return eval_(k); }
  const std::string& source() const noexcept { return source_; }
  bool is_constant() const noexcept { return constant_; }

 private:
  std::string source_;
  std::function<double(double)> eval_;
  bool constant_ = false;
};

}  // namespace ssr
