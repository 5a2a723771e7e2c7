#include "chronoql/error.hpp"

namespace chronoql {

const char *errc_name(Errc c) {
  switch (c) {
  case Errc::EmptyPeriod: return "EmptyPeriod";
  case Errc::BadMarker: return "BadMarker";
  case Errc::MixedGranularity: return "MixedGranularity";
  case Errc::FutureOnTransaction: return "FutureOnTransaction";
  case Errc::ScaleTooFine: return "ScaleTooFine";
  case Errc::BadInstant: return "BadInstant";
  case Errc::DuplicateTable: return "DuplicateTable";
  case Errc::UnknownTarget: return "UnknownTarget";
  case Errc::TemporalPrimaryKey: return "TemporalPrimaryKey";
  case Errc::NonMonotonicClock: return "NonMonotonicClock";
  case Errc::CorruptFile: return "CorruptFile";
  case Errc::UnterminatedLiteral: return "UnterminatedLiteral";
  case Errc::BadCharacter: return "BadCharacter";
  case Errc::ParseError: return "ParseError";
  case Errc::UnknownTable: return "UnknownTable";
  case Errc::UnknownColumn: return "UnknownColumn";
  case Errc::TemporalTermOnPlainColumn: return "TemporalTermOnPlainColumn";
  case Errc::DanglingThis: return "DanglingThis";
  case Errc::NoSuchValue: return "NoSuchValue";
  case Errc::NoCurrentValue: return "NoCurrentValue";
  case Errc::TransactionDimUnsupported: return "TransactionDimUnsupported";
  case Errc::NonComparableType: return "NonComparableType";
  case Errc::NotALink: return "NotALink";
  case Errc::NotRowTimestamped: return "NotRowTimestamped";
  case Errc::IncompatibleArity: return "IncompatibleArity";
  case Errc::NotBitemporal: return "NotBitemporal";
  case Errc::DivisionByZero: return "DivisionByZero";
  case Errc::TypeMismatch: return "TypeMismatch";
  case Errc::NonNumericAggregate: return "NonNumericAggregate";
  case Errc::NoTimestampInScope: return "NoTimestampInScope";
  case Errc::NonBooleanCondition: return "NonBooleanCondition";
  case Errc::AmbiguousWindow: return "AmbiguousWindow";
  case Errc::OverlappingValidTime: return "OverlappingValidTime";
  case Errc::MultiplicityExceeded: return "MultiplicityExceeded";
  case Errc::ForeignKeyViolation: return "ForeignKeyViolation";
  case Errc::DuplicateKey: return "DuplicateKey";
  case Errc::SetOnValidColumn: return "SetOnValidColumn";
  case Errc::NoMatchingEntry: return "NoMatchingEntry";
  case Errc::AmbiguousTarget: return "AmbiguousTarget";
  case Errc::RestrictViolation: return "RestrictViolation";
  case Errc::VacuumOpenEntry: return "VacuumOpenEntry";
  case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

std::string Error::format(Errc code, const std::string &msg, int line, int column) {
  std::string out = errc_name(code);
  out += ": ";
  out += msg;
  if (line > 0) {
    out += " (line ";
    out += std::to_string(line);
    out += ", column ";
    out += std::to_string(column);
    out += ")";
  }
  return out;
}

} // namespace chronoql
