#include "chronoql/schema.hpp"

namespace chronoql {

const char *temporal_kind_name(TemporalKind k) {
  switch (k) {
  case TemporalKind::None: return "NONE";
  case TemporalKind::V: return "V";
  case TemporalKind::T: return "T";
  case TemporalKind::VT: return "VT";
  }
  return "?";
}

const char *referential_action_name(ReferentialAction a) {
  switch (a) {
  case ReferentialAction::Cascade: return "CASCADE";
  case ReferentialAction::CorrectNull: return "CORRECT NULL";
  case ReferentialAction::Restrict: return "RESTRICT";
  }
  return "?";
}

const ColumnDef *TableDef::find_column(const std::string &name) const {
  for (const ColumnDef &c : columns)
    if (c.name == name) return &c;
  return nullptr;
}

int TableDef::column_index(const std::string &name) const {
  for (size_t i = 0; i < columns.size(); i++)
    if (columns[i].name == name) return static_cast<int>(i);
  return -1;
}

} // namespace chronoql
