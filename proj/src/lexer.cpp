#include "lexer.hpp"

#include <cctype>
#include <cstdlib>

namespace mmlyap::detail {

std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t k) {
    for (std::size_t j = 0; j < k; ++j) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };

  while (i < text.size()) {
    const char c = text[i];
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    if (c == '\n') {
      out.push_back({Token::Kind::Newline, "\n", 0.0, line, col});
      advance(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.col = col;
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
      const char* begin = text.c_str() + i;
      char* end = nullptr;
      t.number = std::strtod(begin, &end);
      const std::size_t len = static_cast<std::size_t>(end - begin);
      t.kind = Token::Kind::Number;
      t.text = text.substr(i, len);
      advance(len);
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
      t.kind = Token::Kind::Ident;
      t.text = text.substr(i, j - i);
      advance(j - i);
    } else {
      static const std::string punct = "[](){},;=+-*/^";
      if (punct.find(c) == std::string::npos)
        throw ParseError(std::string("unexpected character '") + c + "'", line, col);
      t.kind = Token::Kind::Punct;
      t.text = std::string(1, c);
      advance(1);
    }
    out.push_back(std::move(t));
  }
  out.push_back({Token::Kind::End, "<end of input>", 0.0, line, col});
  return out;
}

const Token& TokenStream::peek(int ahead) const {
  const std::size_t k = std::min(pos_ + static_cast<std::size_t>(ahead), toks_.size() - 1);
  return toks_[k];
}

Token TokenStream::next() {
  Token t = peek();
  if (pos_ + 1 < toks_.size()) ++pos_;
  return t;
}

bool TokenStream::accept(const std::string& s) {
  const Token& t = peek();
  if ((t.kind == Token::Kind::Punct || t.kind == Token::Kind::Ident) && t.text == s) {
    next();
    return true;
  }
  return false;
}

Token TokenStream::expect(const std::string& s) {
  if (!accept(s)) fail("expected '" + s + "'");
  return toks_[pos_ - 1];
}

Token TokenStream::expect_ident() {
  if (peek().kind != Token::Kind::Ident) fail("expected identifier");
  return next();
}

void TokenStream::skip_newlines() {
  while (peek().kind == Token::Kind::Newline || (peek().kind == Token::Kind::Punct && peek().text == ";")) next();
}

void TokenStream::fail(const std::string& message) const { fail_at(peek(), message); }

void TokenStream::fail_at(const Token& t, const std::string& message) const {
  const std::string found = t.kind == Token::Kind::Newline ? "end of line" : "'" + t.text + "'";
  throw ParseError(message + ", found " + found, t.line, t.col);
}

}  // namespace mmlyap::detail
