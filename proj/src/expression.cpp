#include "mahlerlab/expression.hpp"

#include <cctype>
#include <numbers>
#include <string>

#include <fmt/core.h>

#include "mahlerlab/errors.hpp"

namespace mahlerlab {
namespace {

// UTF-8 minus, times and division signs folded to ASCII.
std::string normalize(std::string_view source) {
  std::string out;
  out.reserve(source.size());
  for (std::size_t i = 0; i < source.size();) {
    const std::string_view rest = source.substr(i);
    if (rest.starts_with("−")) {
      out += '-';
      i += 3;
    } else if (rest.starts_with("×") || rest.starts_with("·")) {
      out += '*';
      i += 2;
    } else if (rest.starts_with("÷")) {
      out += '/';
      i += 2;
    } else {
      out += source[i];
      ++i;
    }
  }
  return out;
}

class Parser {
 public:
  explicit Parser(std::string text) : text_(std::move(text)) {}

  JetFunction parse() {
    JetFunction f = expr();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return f;
  }

 private:
  std::string text_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(fmt::format("{} at position {} in '{}'", what, pos_, text_));
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

  void expect(char c) {
    if (!accept(c)) fail(fmt::format("expected '{}'", c));
  }

  JetFunction expr() {
    JetFunction lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = [a = lhs, b = term()](const Jet2& x) { return a(x) + b(x); };
      } else if (accept('-')) {
        lhs = [a = lhs, b = term()](const Jet2& x) { return a(x) - b(x); };
      } else {
        return lhs;
      }
    }
  }

  JetFunction term() {
    JetFunction lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = [a = lhs, b = unary()](const Jet2& x) { return a(x) * b(x); };
      } else if (accept('/')) {
        lhs = [a = lhs, b = unary()](const Jet2& x) { return a(x) / b(x); };
      } else {
        return lhs;
      }
    }
  }

  JetFunction unary() {
    if (accept('-')) return [a = unary()](const Jet2& x) { return -a(x); };
    if (accept('+')) return unary();
    return power();
  }

  JetFunction power() {
    JetFunction base = primary();
    if (!accept('^')) return base;
    JetFunction exponent = unary();
    // Constant exponents go through pow so integer powers of negative bases stay legal.
    return [b = base, e = exponent](const Jet2& x) {
      const Jet2 ev = e(x);
      if (ev.d1 == 0.0 && ev.d2 == 0.0) return pow(b(x), ev.value);
      return exp(ev * log(b(x)));
    };
  }

  double number() {
    skip_space();
    const char* begin = text_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("expected a number");
    pos_ += static_cast<std::size_t>(end - begin);
    return v;
  }

  std::string identifier() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    return text_.substr(start, pos_ - start);
  }

  JetFunction primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const double v = number();
      return [v](const Jet2&) { return Jet2::constant(v); };
    }
    if (accept('(')) {
      JetFunction inner = expr();
      expect(')');
      return inner;
    }
    const std::size_t start = pos_;
    const std::string name = identifier();
    if (name == "x") return [](const Jet2& x) { return x; };
    if (name == "pi") return [](const Jet2&) { return Jet2::constant(std::numbers::pi); };
    if (name == "sqrt" || name == "exp" || name == "log") {
      expect('(');
      JetFunction arg = expr();
      expect(')');
      if (name == "sqrt") return [a = arg](const Jet2& x) { return sqrt(a(x)); };
      if (name == "exp") return [a = arg](const Jet2& x) { return exp(a(x)); };
      return [a = arg](const Jet2& x) { return log(a(x)); };
    }
    pos_ = start;
    fail(name.empty() ? fmt::format("unexpected character '{}'", c)
                      : fmt::format("unknown identifier '{}'", name));
  }
};

}  // namespace

JetFunction compile_expression(std::string_view source) {
  return Parser(normalize(source)).parse();
}

}  // namespace mahlerlab
