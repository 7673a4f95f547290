#pragma once

// Closed-form sequence rules such as "1/n", "n^2 + 1" or "1 + x^2".
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?        right associative
//   primary := number | variable | '(' expr ')'

#include <cctype>
#include <charconv>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "semiframe/error.hpp"

namespace semiframe {

class Expression {
 public:
  /// Parses `text`, accepting the listed single-letter variables.
  static Expression parse(std::string_view text, std::string_view variables = "nx") {
    Expression e;
    e.text_ = std::string(text);
    Parser p{text, variables, e.program_};
    p.skip();
    if (p.pos == text.size()) p.fail("empty expression");
    p.expr();
    p.skip();
    if (p.pos != text.size()) p.fail("unexpected character '" + std::string(1, text[p.pos]) + "'");
    return e;
  }

  double evaluate(double n, double x = 0.0) const {
    std::vector<double> stack;
    stack.reserve(program_.size());
    for (const auto& op : program_) {
      switch (op.code) {
        case Code::Number: stack.push_back(op.value); break;
        case Code::VarN: stack.push_back(n); break;
        case Code::VarX: stack.push_back(x); break;
        case Code::Negate: stack.back() = -stack.back(); break;
        default: {
          const double b = stack.back();
          stack.pop_back();
          double& a = stack.back();
          switch (op.code) {
            case Code::Add: a += b; break;
            case Code::Sub: a -= b; break;
            case Code::Mul: a *= b; break;
            case Code::Div: a /= b; break;
            case Code::Pow: a = std::pow(a, b); break;
            default: break;
          }
        }
      }
    }
    return stack.back();
  }

  const std::string& text() const noexcept { return text_; }

 private:
  enum class Code { Number, VarN, VarX, Negate, Add, Sub, Mul, Div, Pow };
  struct Op {
    Code code;
    double value = 0.0;
  };

  struct Parser {
    std::string_view s;
    std::string_view vars;
    std::vector<Op>& out;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& what) const {
      throw Error(ErrorKind::ParseError, "rule '" + std::string(s) + "' at position " + std::to_string(pos) + ": " + what,
                  {}, pos);
    }

    void skip() {
      while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
    }

    bool accept(char c) {
      skip();
      if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }

    void expr() {
      term();
      for (;;) {
        if (accept('+')) {
          term();
          out.push_back({Code::Add});
        } else if (accept('-')) {
          term();
          out.push_back({Code::Sub});
        } else {
          return;
        }
      }
    }

    void term() {
      unary();
      for (;;) {
        if (accept('*')) {
          unary();
          out.push_back({Code::Mul});
        } else if (accept('/')) {
          unary();
          out.push_back({Code::Div});
        } else {
          return;
        }
      }
    }

    void unary() {
      if (accept('-')) {
        unary();
        out.push_back({Code::Negate});
      } else if (accept('+')) {
        unary();
      } else {
        power();
      }
    }

    void power() {
      primary();
      if (accept('^')) {
        unary();
        out.push_back({Code::Pow});
      }
    }

    void primary() {
      skip();
      if (pos >= s.size()) fail("unexpected end of input");
      const char c = s[pos];
      if (c == '(') {
        ++pos;
        expr();
        if (!accept(')')) fail("expected ')'");
        return;
      }
      if ((c >= '0' && c <= '9') || c == '.') {
        double v = 0.0;
        const auto [end, ec] = std::from_chars(s.data() + pos, s.data() + s.size(), v);
        if (ec != std::errc{}) fail("malformed number");
        pos = static_cast<std::size_t>(end - s.data());
        out.push_back({Code::Number, v});
        return;
      }
      if (vars.find(c) != std::string_view::npos && c != '\0') {
        ++pos;
        if (pos < s.size() && std::isalnum(static_cast<unsigned char>(s[pos]))) fail("unknown identifier");
        out.push_back({c == 'n' ? Code::VarN : Code::VarX});
        return;
      }
      fail("unexpected character '" + std::string(1, c) + "'");
    }
  };

  std::string text_;
  std::vector<Op> program_;
};

}  // namespace semiframe
