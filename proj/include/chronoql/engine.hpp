#pragma once

#include <optional>
#include <string>

#include "chronoql/eval.hpp"
#include "chronoql/mutate.hpp"

namespace chronoql {

struct ExecResult {
  enum class Kind { Query, Mutation };
  Kind kind = Kind::Query;
  ResultSet rs;
  MutationReport report;
};

// One interactive or scripted session: a database, its clock, and the
// pinned evaluation date. Mutations are single-statement atomic: they run
// on a scratch copy that replaces the store only on success.
class Session {
public:
  Database db;
  std::optional<Instant> pinned_today;

  Instant today() const {
    if (pinned_today) return *pinned_today;
    return db.clock().read().truncate(Granularity::Day);
  }

  void pin_today(const Instant &i) { pinned_today = i.truncate(Granularity::Day); }

  ExecResult execute(const ast::Statement &stmt);
  ExecResult execute_text(const std::string &statementText);
};

struct ScriptOptions {
  bool echo = true;
  bool keep_going = false;
  bool csv = false;
};

struct ScriptResult {
  std::string output;
  int statements = 0;
  int exit_code = 0; // 0 ok, 1 statement error, 2 I/O error
};

// Executes a script of statements and meta-commands (\clock, \today, \load,
// \save, \schema, \dump) against the session. Output is what the CLI would
// print; the first error aborts unless keep_going is set.
ScriptResult run_script(Session &session, const std::string &text, const ScriptOptions &opts);

} // namespace chronoql
