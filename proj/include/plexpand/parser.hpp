// Copyright 2026 The plexpand Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Expression DSL for evaluation procedures.
//
//   file      := statement (';' | newline statement)*     '#' starts a comment
//   statement := expr                                     one output each
//   expr      := term (('+'|'-') term)*
//   term      := factor (('*'|'/') factor)*
//   factor    := '-' factor | primary
//   primary   := NUMBER | 'x'<k> | fn '(' expr [',' args] ')' | '(' expr ')'
//
// Functions: abs, min, max, sin, cos, exp, log, sqrt, sqr, recip and
// pow(expr, int-literal) with integer exponent >= 2.

#ifndef PLEXPAND_PARSER_HPP
#define PLEXPAND_PARSER_HPP

#include <cctype>
#include <cstdlib>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "plexpand/tape.hpp"

namespace plexpand {
namespace detail {

enum class TokKind { kNumber, kIdent, kPlus, kMinus, kStar, kSlash,
                     kLParen, kRParen, kComma, kSeparator, kEnd };

struct Token {
  TokKind kind;
  std::string text;
  double value = 0;
  int line = 1;
  int column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
        continue;
      }
      if (c == '\n' || c == ';') {
        out.push_back(make(TokKind::kSeparator, std::string(1, c)));
        advance();
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) ||
          (c == '.' && pos_ + 1 < src_.size() &&
           std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
        out.push_back(number());
        continue;
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        out.push_back(identifier());
        continue;
      }
      switch (c) {
        case '+': out.push_back(make(TokKind::kPlus, "+")); break;
        case '-': out.push_back(make(TokKind::kMinus, "-")); break;
        case '*': out.push_back(make(TokKind::kStar, "*")); break;
        case '/': out.push_back(make(TokKind::kSlash, "/")); break;
        case '(': out.push_back(make(TokKind::kLParen, "(")); break;
        case ')': out.push_back(make(TokKind::kRParen, ")")); break;
        case ',': out.push_back(make(TokKind::kComma, ",")); break;
        default:
          throw ParseError("unexpected character '" + std::string(1, c) + "'",
                           line_, col_);
      }
      advance();
    }
    out.push_back(make(TokKind::kEnd, ""));
    return out;
  }

 private:
  Token make(TokKind kind, std::string text) const {
    Token t;
    t.kind = kind;
    t.text = std::move(text);
    t.line = line_;
    t.column = col_;
    return t;
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  Token number() {
    const size_t start = pos_;
    const int line = line_, col = col_;
    while (pos_ < src_.size() &&
           (std::isdigit(static_cast<unsigned char>(src_[pos_])) ||
            src_[pos_] == '.')) {
      advance();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      size_t peek = pos_ + 1;
      if (peek < src_.size() && (src_[peek] == '+' || src_[peek] == '-')) {
        ++peek;
      }
      if (peek < src_.size() &&
          std::isdigit(static_cast<unsigned char>(src_[peek]))) {
        while (pos_ < peek) advance();
        while (pos_ < src_.size() &&
               std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
          advance();
        }
      }
    }
    const std::string text(src_.substr(start, pos_ - start));
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size()) {
      throw ParseError("malformed number '" + text + "'", line, col);
    }
    Token t;
    t.kind = TokKind::kNumber;
    t.text = text;
    t.value = v;
    t.line = line;
    t.column = col;
    return t;
  }

  Token identifier() {
    const size_t start = pos_;
    const int line = line_, col = col_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
            src_[pos_] == '_')) {
      advance();
    }
    Token t;
    t.kind = TokKind::kIdent;
    t.text = std::string(src_.substr(start, pos_ - start));
    t.line = line;
    t.column = col;
    return t;
  }

  std::string_view src_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  Parser(std::vector<Token> tokens, int input_dim)
      : toks_(std::move(tokens)), builder_(input_dim), n_(input_dim) {}

  ProcedurePtr run() {
    while (at(TokKind::kSeparator)) next();
    while (!at(TokKind::kEnd)) {
      builder_.mark_output(expression());
      if (at(TokKind::kSeparator)) {
        while (at(TokKind::kSeparator)) next();
      } else if (!at(TokKind::kEnd)) {
        throw ParseError("expected end of expression, got '" + cur().text + "'",
                         cur().line, cur().column);
      }
    }
    return builder_.finalize();
  }

 private:
  const Token& cur() const { return toks_[idx_]; }
  bool at(TokKind k) const { return cur().kind == k; }
  void next() { ++idx_; }

  void expect(TokKind k, const char* what) {
    if (!at(k)) {
      throw ParseError(std::string("expected ") + what + ", got '" +
                           cur().text + "'",
                       cur().line, cur().column);
    }
    next();
  }

  int expression() {
    int lhs = term();
    while (at(TokKind::kPlus) || at(TokKind::kMinus)) {
      const bool plus = at(TokKind::kPlus);
      next();
      const int rhs = term();
      lhs = plus ? builder_.add(lhs, rhs) : builder_.sub(lhs, rhs);
    }
    return lhs;
  }

  int term() {
    int lhs = factor();
    while (at(TokKind::kStar) || at(TokKind::kSlash)) {
      const bool star = at(TokKind::kStar);
      next();
      const int rhs = factor();
      lhs = star ? builder_.mul(lhs, rhs) : builder_.div(lhs, rhs);
    }
    return lhs;
  }

  int factor() {
    if (at(TokKind::kMinus)) {
      next();
      return builder_.neg(factor());
    }
    return primary();
  }

  int primary() {
    if (at(TokKind::kNumber)) {
      const double v = cur().value;
      next();
      return interned_constant(v);
    }
    if (at(TokKind::kLParen)) {
      next();
      const int e = expression();
      expect(TokKind::kRParen, "')'");
      return e;
    }
    if (at(TokKind::kIdent)) {
      const Token tok = cur();
      next();
      if (at(TokKind::kLParen)) {
        return call(tok);
      }
      return variable(tok);
    }
    throw ParseError("expected expression, got '" + cur().text + "'",
                     cur().line, cur().column);
  }

  int variable(const Token& tok) {
    const std::string& name = tok.text;
    if (name.size() >= 2 && name[0] == 'x') {
      bool digits = true;
      for (size_t i = 1; i < name.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(name[i]))) digits = false;
      }
      if (digits) {
        const long k = std::strtol(name.c_str() + 1, nullptr, 10);
        if (k >= 1 && k <= n_) {
          return interned_input(static_cast<int>(k) - 1);
        }
        throw UnknownIdentifierError(
            "variable '" + name + "' out of range for input dimension " +
                std::to_string(n_),
            tok.line, tok.column);
      }
    }
    throw UnknownIdentifierError("unknown identifier '" + name + "'", tok.line,
                                 tok.column);
  }

  int call(const Token& fn) {
    expect(TokKind::kLParen, "'('");
    std::vector<int> args;
    int pow_exponent = 0;
    const std::string& name = fn.text;
    args.push_back(expression());
    bool exponent_literal = false;
    while (at(TokKind::kComma)) {
      next();
      if (name == "pow" && args.size() == 1) {
        // Second pow argument must be a literal integer exponent.
        bool negative = false;
        if (at(TokKind::kMinus)) {
          negative = true;
          next();
        }
        if (!at(TokKind::kNumber)) {
          throw ParseError("pow exponent must be an integer literal",
                           cur().line, cur().column);
        }
        const double v = cur().value;
        if (v != static_cast<double>(static_cast<long long>(v))) {
          throw ParseError("pow exponent must be an integer literal",
                           cur().line, cur().column);
        }
        pow_exponent = static_cast<int>(v) * (negative ? -1 : 1);
        exponent_literal = true;
        next();
      } else {
        args.push_back(expression());
      }
    }
    expect(TokKind::kRParen, "')'");

    const auto require_arity = [&](size_t want) {
      if (args.size() != want) {
        throw ArityError("function '" + name + "' expects " +
                             std::to_string(want) + " argument(s), got " +
                             std::to_string(args.size()),
                         fn.line, fn.column);
      }
    };
    if (name == "abs") { require_arity(1); return builder_.abs(args[0]); }
    if (name == "sin") { require_arity(1); return builder_.sin(args[0]); }
    if (name == "cos") { require_arity(1); return builder_.cos(args[0]); }
    if (name == "exp") { require_arity(1); return builder_.exp(args[0]); }
    if (name == "log") { require_arity(1); return builder_.log(args[0]); }
    if (name == "sqrt") { require_arity(1); return builder_.sqrt(args[0]); }
    if (name == "sqr") { require_arity(1); return builder_.square(args[0]); }
    if (name == "recip") { require_arity(1); return builder_.recip(args[0]); }
    if (name == "min") { require_arity(2); return builder_.min(args[0], args[1]); }
    if (name == "max") { require_arity(2); return builder_.max(args[0], args[1]); }
    if (name == "pow") {
      require_arity(1);
      if (!exponent_literal) {
        throw ArityError("pow expects (expression, integer exponent)", fn.line,
                         fn.column);
      }
      if (pow_exponent < 2) {
        throw ParseError("pow exponent must be >= 2", fn.line, fn.column);
      }
      return builder_.pow_int(args[0], pow_exponent);
    }
    throw UnknownIdentifierError("unknown function '" + name + "'", fn.line,
                                 fn.column);
  }

  // Constants and inputs are interned so repeated literals share one node.
  int interned_constant(double v) {
    auto it = const_nodes_.find(v);
    if (it != const_nodes_.end()) return it->second;
    const int id = builder_.constant(v);
    const_nodes_.emplace(v, id);
    return id;
  }

  int interned_input(int slot) {
    auto it = input_nodes_.find(slot);
    if (it != input_nodes_.end()) return it->second;
    const int id = builder_.input(slot);
    input_nodes_.emplace(slot, id);
    return id;
  }

  std::vector<Token> toks_;
  size_t idx_ = 0;
  TapeBuilder builder_;
  int n_;
  std::map<double, int> const_nodes_;
  std::map<int, int> input_nodes_;
};

}  // namespace detail

// Parses a semicolon- or newline-separated list of output expressions into
// an evaluation procedure with the given input dimension.
inline ProcedurePtr parse_expression(std::string_view text, int input_dim) {
  detail::Lexer lexer(text);
  detail::Parser parser(lexer.run(), input_dim);
  return parser.run();
}

}  // namespace plexpand

#endif  // PLEXPAND_PARSER_HPP
