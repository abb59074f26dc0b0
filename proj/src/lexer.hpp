#pragma once

// Tokenizer shared by the expression and configuration parsers.

#include "mmlyap/errors.hpp"
#include "mmlyap/expr.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace mmlyap::detail {

struct Token {
  enum class Kind { Number, Ident, Punct, Newline, End };
  Kind kind = Kind::End;
  std::string text;
  double number = 0.0;
  int line = 1;
  int col = 1;
};

std::vector<Token> tokenize(const std::string& text);

class TokenStream {
 public:
  explicit TokenStream(std::vector<Token> toks) : toks_(std::move(toks)) {}

  const Token& peek(int ahead = 0) const;
  Token next();
  bool at_end() const { return peek().kind == Token::Kind::End; }

  bool accept(const std::string& punct_or_ident);
  Token expect(const std::string& punct_or_ident);
  Token expect_ident();
  void skip_newlines();

  [[noreturn]] void fail(const std::string& message) const;
  [[noreturn]] void fail_at(const Token& t, const std::string& message) const;

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

/// Resolves a bare identifier to a constant; returns nullopt when unknown.
using ConstantLookup = std::function<std::optional<double>(const std::string&)>;

/// Recursive-descent expression reader. Builds trees without simplification
/// so that printing and re-reading reproduces them exactly.
Expr parse_expression(TokenStream& ts, int n, const ConstantLookup& lookup);

/// Reads a constant expression (no state variables) and evaluates it.
double parse_constant(TokenStream& ts, const ConstantLookup& lookup);

/// Reads a bracketed row-major matrix literal with constant entries.
Mat parse_matrix(TokenStream& ts, const ConstantLookup& lookup);

}  // namespace mmlyap::detail
