#pragma once

#include <string>
#include <vector>

namespace chronoql {

enum class TokenKind { Keyword, Identifier, Text, Number, Punct, End };

struct Token {
  TokenKind kind = TokenKind::End;
  std::string lexeme; // keywords upper-cased; text without quotes
  int line = 1;
  int column = 1;

  bool is_kw(const char *kw) const { return kind == TokenKind::Keyword && lexeme == kw; }
  bool is_punct(const char *p) const { return kind == TokenKind::Punct && lexeme == p; }
};

// Keywords are case-insensitive; identifiers keep their case. Comments run
// from `--` to end of line. Text literals use '' to escape a quote.
std::vector<Token> tokenize(const std::string &src);

} // namespace chronoql
