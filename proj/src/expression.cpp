#include "ssr/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <utility>

#include <fmt/format.h>

#include "ssr/types.hpp"

namespace ssr {

namespace {

using Fn = std::function<double(double)>;

struct Node {
  Fn eval;
  bool uses_k = false;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Node parse() {
    Node n = expr();
    skip();
    if (pos_ < text_.size()) fail(fmt::format("unexpected '{}'", text_[pos_]));
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError(fmt::format("expression \"{}\", column {}: {}", text_, pos_ + 1, what));
  }

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static Node binary(Node a, Node b, double (*op)(double, double)) {
    return {[fa = std::move(a.eval), fb = std::move(b.eval), op](double k) { return op(fa(k), fb(k)); },
            a.uses_k || b.uses_k};
  }

  Node expr() {
    Node lhs = term();
    for (;;) {
      if (eat('+'))
        lhs = binary(std::move(lhs), term(), [](double x, double y) { return x + y; });
      else if (eat('-'))
        lhs = binary(std::move(lhs), term(), [](double x, double y) { return x - y; });
      else
        return lhs;
    }
  }

  Node term() {
    Node lhs = unary();
    for (;;) {
      if (eat('*'))
        lhs = binary(std::move(lhs), unary(), [](double x, double y) { return x * y; });
      else if (eat('/'))
        lhs = binary(std::move(lhs), unary(), [](double x, double y) { return x / y; });
      else
        return lhs;
    }
  }

  Node unary() {
    if (eat('-')) {
      Node inner = unary();
      return {[f = std::move(inner.eval)](double k) { return -f(k); }, inner.uses_k};
    }
    if (eat('+')) return unary();
    return power();
  }

  Node power() {
    Node base = primary();
    if (eat('^')) return binary(std::move(base), unary(), [](double x, double y) { return std::pow(x, y); });
    return base;
  }

  Node primary() {
    skip();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (eat('(')) {
      Node inner = expr();
      if (!eat(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    fail(fmt::format("unexpected '{}'", c));
  }

  Node number() {
    const char* begin = text_.data() + pos_;
    double value = 0.0;
    auto [end, ec] = std::from_chars(begin, text_.data() + text_.size(), value);
    if (ec != std::errc()) fail("malformed number");
    pos_ += static_cast<std::size_t>(end - begin);
    return {[value](double) { return value; }, false};
  }

  Node identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);
    if (name == "k") return {[](double k) { return k; }, true};
    if (name == "pi") return {[](double) { return std::numbers::pi; }, false};

    double (*fn)(double) = nullptr;
    if (name == "sin") fn = [](double x) { return std::sin(x); };
    else if (name == "cos") fn = [](double x) { return std::cos(x); };
    else if (name == "tan") fn = [](double x) { return std::tan(x); };
    else if (name == "sqrt") fn = [](double x) { return std::sqrt(x); };
    else if (name == "exp") fn = [](double x) { return std::exp(x); };
    else if (name == "log") fn = [](double x) { return std::log(x); };
    else if (name == "abs") fn = [](double x) { return std::abs(x); };
    if (!fn) {
      pos_ = start;
      fail(fmt::format("unknown identifier '{}'", name));
    }
    if (!eat('(')) fail(fmt::format("expected '(' after {}", name));
    Node arg = expr();
    if (!eat(')')) fail("expected ')'");
    return {[fn, f = std::move(arg.eval)](double k) { return fn(f(k)); }, arg.uses_k};
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::string format_constant(double value) { return fmt::format("{:.17g}", value); }

}  // namespace

Expression Expression::parse(std::string_view text) {
  Node root = Parser(text).parse();
  Expression e;
  e.source_ = std::string(text);
  e.eval_ = std::move(root.eval);
  e.constant_ = !root.uses_k;
  return e;
}

Expression Expression::constant(double value) {
  Expression e;
  e.source_ = format_constant(value);
  e.eval_ = [value](double) { return value; };
  e.constant_ = true;
  return e;
}

}  // namespace ssr
