#pragma once

// Tokenizer shared by the model DSL and the tactic catalog format.

#include <charconv>
#include <cstddef>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "gorisk/model.hpp"

namespace gorisk {

enum class TokenKind {
  identifier,
  number,
  string,
  lbrace,
  rbrace,
  lbracket,
  rbracket,
  comma,
  colon,
  at,
  arrow,
  invalid,  // lexical error already reported
  end,
};

struct Token {
  TokenKind kind = TokenKind::end;
  std::string text;     // raw spelling (decoded contents for strings)
  double number = 0.0;  // valid for TokenKind::number
  SourcePosition position;

  bool is_word(std::string_view word) const {
    return kind == TokenKind::identifier && text == word;
  }
};

inline std::string_view describe(TokenKind kind) {
  switch (kind) {
    case TokenKind::identifier: return "identifier";
    case TokenKind::number: return "number";
    case TokenKind::string: return "string";
    case TokenKind::lbrace: return "'{'";
    case TokenKind::rbrace: return "'}'";
    case TokenKind::lbracket: return "'['";
    case TokenKind::rbracket: return "']'";
    case TokenKind::comma: return "','";
    case TokenKind::colon: return "':'";
    case TokenKind::at: return "'@'";
    case TokenKind::arrow: return "'->'";
    case TokenKind::invalid: return "invalid token";
    case TokenKind::end: return "end of input";
  }
  return "token";
}

/// Splits `source` into tokens. Lexical problems become diagnostics and an
/// `invalid` token; scanning always continues to the end.
class Lexer {
 public:
  explicit Lexer(std::string_view source) : src_(source) {}

  std::vector<Token> tokenize(Diagnostics& diags) {
    std::vector<Token> out;
    for (;;) {
      skip_trivia();
      Token tok;
      tok.position = here();
      if (at_end()) {
        tok.kind = TokenKind::end;
        out.push_back(std::move(tok));
        return out;
      }
      char c = peek();
      if (is_ident_head(c)) {
        std::size_t start = pos_;
        while (!at_end() && is_ident_tail(peek())) advance();
        tok.kind = TokenKind::identifier;
        tok.text = std::string(src_.substr(start, pos_ - start));
      } else if (is_digit(c) || (c == '-' && is_digit(peek(1))) ||
                 (c == '.' && is_digit(peek(1)))) {
        lex_number(tok, diags);
      } else if (c == '"') {
        lex_string(tok, diags);
      } else if (c == '-' && peek(1) == '>') {
        advance();
        advance();
        tok.kind = TokenKind::arrow;
        tok.text = "->";
      } else {
        TokenKind kind = TokenKind::invalid;
        switch (c) {
          case '{': kind = TokenKind::lbrace; break;
          case '}': kind = TokenKind::rbrace; break;
          case '[': kind = TokenKind::lbracket; break;
          case ']': kind = TokenKind::rbracket; break;
          case ',': kind = TokenKind::comma; break;
          case ':': kind = TokenKind::colon; break;
          case '@': kind = TokenKind::at; break;
          default: break;
        }
        std::size_t start = pos_;
        advance();
        // Swallow the rest of a multi-byte UTF-8 sequence.
        while (!at_end() && is_continuation(peek())) advance();
        tok.kind = kind;
        tok.text = std::string(src_.substr(start, pos_ - start));
        if (kind == TokenKind::invalid)
          diags.push_back({Severity::error, "unexpected-char",
                           "unexpected character '" + tok.text + "'", tok.position});
      }
      out.push_back(std::move(tok));
    }
  }

 private:
  static bool is_digit(char c) { return c >= '0' && c <= '9'; }
  static bool is_ident_head(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
  }
  static bool is_ident_tail(char c) { return is_ident_head(c) || is_digit(c); }
  static bool is_continuation(char c) {
    return (static_cast<unsigned char>(c) & 0xC0) == 0x80;
  }

  bool at_end() const { return pos_ >= src_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }
  SourcePosition here() const { return {line_, column_}; }

  void advance() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      column_ = 1;
    } else if (!is_continuation(c)) {
      ++column_;
    }
  }

  void skip_trivia() {
    while (!at_end()) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '#') {
        while (!at_end() && peek() != '\n') advance();
      } else {
        return;
      }
    }
  }

  // -?digits(.digits)?([eE][+-]?digits)? ; a trailing identifier character or
  // a dangling '.'/exponent makes the whole run a bad number.
  void lex_number(Token& tok, Diagnostics& diags) {
    std::size_t start = pos_;
    bool ok = true;
    if (peek() == '-') advance();
    std::size_t int_digits = 0;
    while (is_digit(peek())) advance(), ++int_digits;
    if (peek() == '.') {
      advance();
      std::size_t frac_digits = 0;
      while (is_digit(peek())) advance(), ++frac_digits;
      if (frac_digits == 0 || int_digits == 0) ok = false;
    }
    if (peek() == 'e' || peek() == 'E') {
      advance();
      if (peek() == '+' || peek() == '-') advance();
      std::size_t exp_digits = 0;
      while (is_digit(peek())) advance(), ++exp_digits;
      if (exp_digits == 0) ok = false;
    }
    while (is_ident_tail(peek()) || peek() == '.') {
      advance();
      ok = false;
    }
    tok.text = std::string(src_.substr(start, pos_ - start));
    if (ok) {
      auto first = tok.text.data();
      auto last = first + tok.text.size();
      auto [ptr, ec] = std::from_chars(first, last, tok.number);
      ok = ec == std::errc() && ptr == last;
    }
    if (ok) {
      tok.kind = TokenKind::number;
    } else {
      tok.kind = TokenKind::invalid;
      diags.push_back({Severity::error, "bad-number",
                       "malformed number '" + tok.text + "'", tok.position});
    }
  }

  void lex_string(Token& tok, Diagnostics& diags) {
    advance();  // opening quote
    std::string value;
    bool bad_escape = false;
    SourcePosition bad_escape_at;
    for (;;) {
      if (at_end()) {
        tok.kind = TokenKind::invalid;
        tok.text = std::move(value);
        diags.push_back({Severity::error, "unterminated-string",
                         "string is not terminated", tok.position});
        return;
      }
      char c = peek();
      if (c == '"') {
        advance();
        break;
      }
      if (c == '\\') {
        SourcePosition at = here();
        advance();
        char e = peek();
        if (e == '"' || e == '\\') {
          value += e;
          advance();
        } else {
          if (!bad_escape) bad_escape_at = at;
          bad_escape = true;
        }
        continue;
      }
      value += c;
      advance();
    }
    tok.text = std::move(value);
    if (bad_escape) {
      tok.kind = TokenKind::invalid;
      diags.push_back({Severity::error, "bad-escape",
                       "only \\\" and \\\\ escapes are allowed", bad_escape_at});
    } else {
      tok.kind = TokenKind::string;
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

/// Shortest decimal text that reads back to exactly `value`, without
/// exponent or trailing zeros.
inline std::string format_number(double value) {
  char buf[512];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value,
                                 std::chars_format::fixed);
  if (ec != std::errc()) return std::to_string(value);
  return std::string(buf, ptr);
}

/// Double-quoted string with `"` and `\` escaped.
inline std::string quote(std::string_view text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace gorisk
