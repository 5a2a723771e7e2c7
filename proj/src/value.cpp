#include "chronoql/value.hpp"

#include <cmath>
#include <sstream>

namespace chronoql {

const char *value_type_name(ValueType t) {
  switch (t) {
  case ValueType::Text: return "TEXT";
  case ValueType::Integer: return "INTEGER";
  case ValueType::Decimal: return "DECIMAL";
  case ValueType::Date: return "DATE";
  }
  return "?";
}

std::optional<ValueType> value_type_from_name(const std::string &name) {
  std::string up;
  for (char c : name) up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (up == "TEXT") return ValueType::Text;
  if (up == "INTEGER" || up == "INT") return ValueType::Integer;
  if (up == "DECIMAL") return ValueType::Decimal;
  if (up == "DATE") return ValueType::Date;
  return std::nullopt;
}

std::string Value::to_string() const {
  if (is_null()) return "Null";
  if (is_text()) return "'" + as_text() + "'";
  if (is_integer()) return std::to_string(as_integer());
  if (is_date()) return "'" + as_date().to_string() + "'";
  std::ostringstream os;
  os << as_decimal();
  return os.str();
}

std::optional<int> Value::compare(const Value &a, const Value &b) {
  if (a.is_null() || b.is_null()) {
    if (a.is_null() && b.is_null()) return 0;
    return a.is_null() ? -1 : 1;
  }
  if (a.is_numeric() && b.is_numeric()) {
    double x = a.numeric(), y = b.numeric();
    return x < y ? -1 : x > y ? 1 : 0;
  }
  if (a.is_text() && b.is_text()) {
    int c = a.as_text().compare(b.as_text());
    return c < 0 ? -1 : c > 0 ? 1 : 0;
  }
  if (a.is_date() && b.is_date()) return Instant::compare(a.as_date(), b.as_date());
  return std::nullopt;
}

Value Value::coerce(ValueType t) const {
  if (is_null()) return *this;
  switch (t) {
  case ValueType::Text:
    if (is_text()) return *this;
    break;
  case ValueType::Integer:
    if (is_integer()) return *this;
    if (is_decimal() && as_decimal() == std::floor(as_decimal()))
      return integer(static_cast<std::int64_t>(as_decimal()));
    break;
  case ValueType::Decimal:
    if (is_decimal()) return *this;
    if (is_integer()) return decimal(static_cast<double>(as_integer()));
    break;
  case ValueType::Date:
    if (is_date()) return *this;
    if (is_text()) return date(Instant::parse(as_text()));
    break;
  }
  fail(Errc::TypeMismatch, "cannot store " + to_string() + " in a " + value_type_name(t) + " column");
}

} // namespace chronoql
