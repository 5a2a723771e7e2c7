#pragma once

#include "chronoql/ast.hpp"
#include "chronoql/eval.hpp"
#include "chronoql/storage.hpp"

namespace chronoql {

struct MutationReport {
  std::string kind; // INSERT / UPDATE / DELETE / VACUUM / CREATE TABLE
  int rows_matched = 0;
  int entries_created = 0;
  int entries_closed = 0;
  int entries_removed = 0;
  Instant clock;
};

// Executes one DML or DDL statement against `db`, stamping with `clock`.
// Throws on any violation; callers provide atomicity by executing against a
// scratch copy and committing on success.
MutationReport execute_mutation(Database &db, const ast::Statement &stmt, const Instant &clock,
                                const Instant &today);

} // namespace chronoql
