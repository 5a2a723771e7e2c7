#pragma once

#include <optional>
#include <string>
#include <vector>

#include "chronoql/chrono.hpp"
#include "chronoql/value.hpp"

namespace chronoql {

// Temporal kind of a column or table: plain, valid-time, transaction-time,
// or bitemporal.
enum class TemporalKind { None, V, T, VT };

inline bool has_valid(TemporalKind k) { return k == TemporalKind::V || k == TemporalKind::VT; }
inline bool has_transaction(TemporalKind k) { return k == TemporalKind::T || k == TemporalKind::VT; }
const char *temporal_kind_name(TemporalKind k);

enum class ReferentialAction { Cascade, CorrectNull, Restrict };
const char *referential_action_name(ReferentialAction a);

struct ForeignKey {
  std::string table;
  std::string column;
  ReferentialAction on_delete = ReferentialAction::Restrict;
};

struct ColumnDef {
  std::string name;
  ValueType type = ValueType::Text;
  TemporalKind kind = TemporalKind::None;
  // Valid-time granularity; meaningful when kind is V or VT. Transaction
  // granularity is fixed at SECOND.
  Granularity valid_granularity = Granularity::Year;
  // Upper bound on simultaneously current values; 1 = logically
  // single-valued. Timestamped columns are storage-wise multi-valued either
  // way.
  int multiplicity = 1;
  std::optional<ForeignKey> references;
  // Default valid period rule for INSERT without an explicit stamp: the
  // element [today, uc) unless a fixed literal is declared.
  std::optional<TemporalElement> default_valid;
  // Automatic vacuuming: retain at most this many closed entries.
  std::optional<int> vacuum_keep;
  // Automatic vacuuming: drop closed entries older than this lifecycle.
  std::optional<Duration> vacuum_lifecycle;

  bool timestamped() const { return kind != TemporalKind::None; }
};

struct TableDef {
  std::string name;
  TemporalKind row_kind = TemporalKind::None;
  Granularity row_granularity = Granularity::Year;
  std::vector<ColumnDef> columns;
  std::string primary_key; // single-column keys
  std::optional<int> vacuum_keep;
  std::optional<Duration> vacuum_lifecycle;

  const ColumnDef *find_column(const std::string &name) const;
  int column_index(const std::string &name) const; // -1 when absent
};

} // namespace chronoql
