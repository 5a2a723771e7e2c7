#include "chronoql/engine.hpp"

#include <sstream>

#include "chronoql/render.hpp"

namespace chronoql {

ExecResult Session::execute(const ast::Statement &stmt) {
  ExecResult out;
  if (std::holds_alternative<ast::SelectPtr>(stmt)) {
    Evaluator ev(db, today(), db.clock().read());
    out.kind = ExecResult::Kind::Query;
    out.rs = ev.eval(*std::get<ast::SelectPtr>(stmt));
    return out;
  }
  // single-statement atomicity: mutate a scratch copy, commit on success
  Database scratch = db;
  // DDL does not manipulate facts, so it does not consume a clock reading
  Instant stamp = std::holds_alternative<ast::CreateTable>(stmt) ? scratch.clock().read()
                                                                 : scratch.clock().acquire();
  out.kind = ExecResult::Kind::Mutation;
  out.report = execute_mutation(scratch, stmt, stamp, today());
  db = std::move(scratch);
  return out;
}

ExecResult Session::execute_text(const std::string &statementText) {
  return execute(parse_statement(statementText));
}

namespace {

std::string trim(const std::string &s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// '<instant>' with or without the quotes
Instant parse_meta_instant(const std::string &arg) {
  std::string t = trim(arg);
  if (t.size() >= 2 && t.front() == '\'' && t.back() == '\'') t = t.substr(1, t.size() - 2);
  return Instant::parse(t);
}

} // namespace

ScriptResult run_script(Session &session, const std::string &text, const ScriptOptions &opts) {
  ScriptResult result;
  std::ostringstream out;
  std::istringstream in(text);
  std::string line, buffer;
  int lineno = 0, firstLine = 0;

  auto emit_error = [&](const std::string &what, int atLine) {
    out << "error (line " << atLine << "): " << what << "\n\n";
    result.exit_code = std::max(result.exit_code, 1);
  };

  auto flush = [&]() -> bool {
    std::string stmtText = trim(buffer);
    buffer.clear();
    if (stmtText.empty()) return true;
    if (opts.echo) out << stmtText << "\n";
    try {
      for (const ast::Statement &stmt : parse_script(stmtText)) {
        ExecResult r = session.execute(stmt);
        result.statements++;
        if (r.kind == ExecResult::Kind::Query)
          out << (opts.csv ? render_csv(r.rs) : render_table(r.rs));
        else
          out << render_report(r.report) << "\n";
      }
      out << "\n";
      return true;
    } catch (const Error &e) {
      emit_error(e.what(), firstLine);
      return opts.keep_going;
    }
  };

  while (std::getline(in, line)) {
    lineno++;
    std::string t = trim(line);
    if (t.empty() || t.rfind("--", 0) == 0) continue;
    if (t[0] == '\\') {
      if (!trim(buffer).empty()) {
        emit_error("meta-command inside an unterminated statement", lineno);
        if (!opts.keep_going) break;
        buffer.clear();
      }
      if (opts.echo) out << t << "\n";
      size_t sp = t.find(' ');
      std::string cmd = sp == std::string::npos ? t : t.substr(0, sp);
      std::string arg = sp == std::string::npos ? "" : trim(t.substr(sp + 1));
      try {
        if (cmd == "\\clock") {
          if (arg == "manual")
            session.db.clock().set_mode(TransactionClock::Mode::Manual);
          else if (arg == "system")
            session.db.clock().set_mode(TransactionClock::Mode::System);
          else
            session.db.clock().set(parse_meta_instant(arg));
        } else if (cmd == "\\today") {
          session.pin_today(parse_meta_instant(arg));
        } else if (cmd == "\\load") {
          session.db = Database::load(arg);
        } else if (cmd == "\\save") {
          session.db.save(arg);
        } else if (cmd == "\\dump") {
          out << render_dump(session.db, arg);
        } else if (cmd == "\\schema") {
          for (const std::string &name : session.db.table_names()) {
            const Table &tb = *session.db.find_table(name);
            out << name << " (" << tb.def.columns.size() << " columns, " << tb.rows.size()
                << " rows)";
            if (tb.def.row_kind != TemporalKind::None)
              out << " ROW " << temporal_kind_name(tb.def.row_kind);
            out << "\n";
          }
        } else if (cmd == "\\quit") {
          break;
        } else {
          emit_error("unknown meta-command " + cmd, lineno);
          if (!opts.keep_going) break;
        }
        if (opts.echo) out << "\n";
      } catch (const Error &e) {
        if (e.code() == Errc::IoError) result.exit_code = 2;
        emit_error(e.what(), lineno);
        if (!opts.keep_going) break;
      }
      continue;
    }
    if (trim(buffer).empty()) firstLine = lineno;
    buffer += line;
    buffer += "\n";
    if (t.back() == ';') {
      if (!flush()) break;
    }
  }
  if (!trim(buffer).empty()) {
    // unterminated trailing statement
    emit_error("unterminated statement at end of script", firstLine);
  }
  result.output = out.str();
  return result;
}

} // namespace chronoql
