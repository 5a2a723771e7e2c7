#pragma once

#include <stdexcept>
#include <string>

namespace chronoql {

enum class Errc {
  // chrono
  EmptyPeriod,
  BadMarker,
  MixedGranularity,
  FutureOnTransaction,
  ScaleTooFine,
  BadInstant,
  // storage
  DuplicateTable,
  UnknownTarget,
  TemporalPrimaryKey,
  NonMonotonicClock,
  CorruptFile,
  // parser
  UnterminatedLiteral,
  BadCharacter,
  ParseError,
  // evaluator
  UnknownTable,
  UnknownColumn,
  TemporalTermOnPlainColumn,
  DanglingThis,
  NoSuchValue,
  NoCurrentValue,
  TransactionDimUnsupported,
  NonComparableType,
  NotALink,
  NotRowTimestamped,
  IncompatibleArity,
  NotBitemporal,
  DivisionByZero,
  TypeMismatch,
  NonNumericAggregate,
  NoTimestampInScope,
  NonBooleanCondition,
  AmbiguousWindow,
  // mutation
  OverlappingValidTime,
  MultiplicityExceeded,
  ForeignKeyViolation,
  DuplicateKey,
  SetOnValidColumn,
  NoMatchingEntry,
  AmbiguousTarget,
  RestrictViolation,
  VacuumOpenEntry,
  // cli / io
  IoError,
};

const char *errc_name(Errc c);

// Every engine failure is reported through this exception. `line`/`column`
// are 1-based and set whenever the error points into source text.
class Error : public std::runtime_error {
public:
  Error(Errc code, std::string message, int line = 0, int column = 0)
      : std::runtime_error(format(code, message, line, column)), code_(code),
        line_(line), column_(column) {}

  Errc code() const { return code_; }
  int line() const { return line_; }
  int column() const { return column_; }

private:
  static std::string format(Errc code, const std::string &msg, int line, int column);

  Errc code_;
  int line_;
  int column_;
};

[[noreturn]] inline void fail(Errc code, std::string message, int line = 0, int column = 0) {
  throw Error(code, std::move(message), line, column);
}

} // namespace chronoql
