#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "chronoql/chrono.hpp"

namespace chronoql {

enum class ValueType { Text, Integer, Decimal, Date };

const char *value_type_name(ValueType t);
std::optional<ValueType> value_type_from_name(const std::string &name);

// A typed scalar cell. Dates are day-granularity instants.
class Value {
public:
  Value() = default; // NULL
  static Value null() { return Value(); }
  static Value text(std::string s) { return Value(Repr(std::move(s))); }
  static Value integer(std::int64_t v) { return Value(Repr(v)); }
  static Value decimal(double v) { return Value(Repr(v)); }
  static Value date(const Instant &i) { return Value(Repr(i)); }

  bool is_null() const { return std::holds_alternative<std::monostate>(repr_); }
  bool is_text() const { return std::holds_alternative<std::string>(repr_); }
  bool is_integer() const { return std::holds_alternative<std::int64_t>(repr_); }
  bool is_decimal() const { return std::holds_alternative<double>(repr_); }
  bool is_date() const { return std::holds_alternative<Instant>(repr_); }
  bool is_numeric() const { return is_integer() || is_decimal(); }

  const std::string &as_text() const { return std::get<std::string>(repr_); }
  std::int64_t as_integer() const { return std::get<std::int64_t>(repr_); }
  double as_decimal() const { return std::get<double>(repr_); }
  const Instant &as_date() const { return std::get<Instant>(repr_); }
  double numeric() const { return is_integer() ? static_cast<double>(as_integer()) : as_decimal(); }

  // SQL-style literal: quoted text, bare numbers, quoted dates, Null.
  std::string to_string() const;

  // Total order used for deterministic output; NULL sorts first, mixed
  // numeric kinds compare numerically. Returns nullopt for non-comparable
  // kinds (text vs number, ...).
  static std::optional<int> compare(const Value &a, const Value &b);
  bool operator==(const Value &o) const { return compare(*this, o) == 0; }

  // Coerces to the column type where lossless (integer literal into a
  // decimal column, ...); fails TypeMismatch otherwise.
  Value coerce(ValueType t) const;

private:
  using Repr = std::variant<std::monostate, std::string, std::int64_t, double, Instant>;
  explicit Value(Repr r) : repr_(std::move(r)) {}
  Repr repr_;
};

} // namespace chronoql
