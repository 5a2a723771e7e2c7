#include "chronoql/token.hpp"

#include <cctype>
#include <unordered_set>

#include "chronoql/error.hpp"

namespace chronoql {

namespace {

const std::unordered_set<std::string> &keywords() {
  static const std::unordered_set<std::string> kws = {
      // statements
      "SELECT", "FROM", "WHERE", "GROUP", "BY", "HAVING", "AS",
      "INSERT", "INTO", "VALUES", "UPDATE", "SET", "TAG", "ON", "CORRECT",
      "DELETE", "VACUUM", "CREATE", "TABLE", "VALIDITY",
      // logic and membership
      "AND", "OR", "NOT", "IN", "EXISTS", "NULL",
      "UNION", "INTERSECT", "EXCEPT",
      "NATURAL", "CROSS", "JOIN",
      // temporal terms
      "HISTORY", "PAST", "FUTURE", "BETWEEN", "WHEN", "SINCE", "BEFORE", "AFTER",
      // column functions
      "FIRST", "LAST", "PREVIOUS", "NEXT", "PREVIOUS_SCALE", "NEXT_SCALE",
      "EVOLUTION", "TIMESTAMPS", "THIS",
      // predicate functions
      "ALWAYS", "ANYTIME", "INCREASE", "DECREASE",
      "LONGUESTTHEN", "LASTS_MORE_THAN",
      // bitemporal selectors (paper spellings and english aliases)
      "RETROACTIF", "RETROACTIVE", "POSTACTIF", "POSTACTIVE", "ERRONEOUS", "WITH", "SCALE",
      // aggregates
      "COUNT", "SUM", "MIN", "MAX", "AVG",
      // granularities (singular and plural)
      "DECADE", "DECADES", "YEAR", "YEARS", "SEMESTER", "SEMESTERS", "MONTH", "MONTHS",
      "DAY", "DAYS", "HOUR", "HOURS", "MINUTE", "MINUTES", "SECOND", "SECONDS",
      // DDL
      "TEXT", "INTEGER", "INT", "DECIMAL", "DATE", "VALID", "TIME", "TRANSACTION",
      "GRANULARITY", "MULTIPLICITY", "REFERENCES", "CASCADE", "RESTRICT",
      "KEEP", "LIFECYCLE", "DEFAULT", "PRIMARY", "KEY",
  };
  return kws;
}

std::string upper(const std::string &s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  return out;
}

} // namespace

std::vector<Token> tokenize(const std::string &src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto advance = [&](size_t n = 1) {
    while (n--) {
      if (i < src.size() && src[i] == '\n') {
        line++;
        col = 1;
      } else {
        col++;
      }
      i++;
    }
  };

  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance();
      continue;
    }
    if (c == '-' && i + 1 < src.size() && src[i + 1] == '-') {
      while (i < src.size() && src[i] != '\n') advance();
      continue;
    }
    int tl = line, tc = col;
    if (c == '\'') {
      advance();
      std::string text;
      bool closed = false;
      while (i < src.size()) {
        if (src[i] == '\'') {
          if (i + 1 < src.size() && src[i + 1] == '\'') {
            text.push_back('\'');
            advance(2);
            continue;
          }
          advance();
          closed = true;
          break;
        }
        if (src[i] == '\n') break;
        text.push_back(src[i]);
        advance();
      }
      if (!closed) fail(Errc::UnterminatedLiteral, "unterminated text literal", tl, tc);
      out.push_back({TokenKind::Text, text, tl, tc});
      continue;
    }
    if (c == '"') {
      // double quotes are accepted for text literals too
      advance();
      std::string text;
      bool closed = false;
      while (i < src.size() && src[i] != '\n') {
        if (src[i] == '"') {
          advance();
          closed = true;
          break;
        }
        text.push_back(src[i]);
        advance();
      }
      if (!closed) fail(Errc::UnterminatedLiteral, "unterminated text literal", tl, tc);
      out.push_back({TokenKind::Text, text, tl, tc});
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::string num;
      bool dot = false;
      while (i < src.size() &&
             (std::isdigit(static_cast<unsigned char>(src[i])) || (!dot && src[i] == '.'))) {
        // a '.' not followed by a digit is punctuation, not a decimal point
        if (src[i] == '.') {
          if (i + 1 >= src.size() || !std::isdigit(static_cast<unsigned char>(src[i + 1]))) break;
          dot = true;
        }
        num.push_back(src[i]);
        advance();
      }
      out.push_back({TokenKind::Number, num, tl, tc});
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string word;
      while (i < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_')) {
        word.push_back(src[i]);
        advance();
      }
      std::string up = upper(word);
      if (keywords().count(up))
        out.push_back({TokenKind::Keyword, up, tl, tc});
      else
        out.push_back({TokenKind::Identifier, word, tl, tc});
      continue;
    }
    // multi-char operators first
    if ((c == '<' && i + 1 < src.size() && (src[i + 1] == '=' || src[i + 1] == '>')) ||
        (c == '>' && i + 1 < src.size() && src[i + 1] == '=')) {
      out.push_back({TokenKind::Punct, src.substr(i, 2), tl, tc});
      advance(2);
      continue;
    }
    static const std::string singles = "()[]{},;.*+-/=<>@#";
    if (singles.find(c) != std::string::npos) {
      out.push_back({TokenKind::Punct, std::string(1, c), tl, tc});
      advance();
      continue;
    }
    fail(Errc::BadCharacter, std::string("unexpected character '") + c + "'", tl, tc);
  }
  out.push_back({TokenKind::End, "", line, col});
  return out;
}

} // namespace chronoql
