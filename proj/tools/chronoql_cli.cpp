#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "chronoql/engine.hpp"
#include "chronoql/render.hpp"

using namespace chronoql;

namespace {

int run_repl(Session &session, const ScriptOptions &opts, const std::string &dbPath) {
  std::string buffer;
  std::cout << "ChronoQL. Statements end with ';'. \\quit leaves, \\schema lists tables.\n";
  while (true) {
    std::cout << (buffer.empty() ? "cql> " : "...> ") << std::flush;
    std::string line;
    if (!std::getline(std::cin, line)) break;
    std::string trimmed = line;
    while (!trimmed.empty() && (trimmed.back() == ' ' || trimmed.back() == '\r')) trimmed.pop_back();
    size_t b = trimmed.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    trimmed = trimmed.substr(b);

    if (buffer.empty() && trimmed[0] == '\\') {
      if (trimmed == "\\quit" || trimmed == "\\q") break;
      ScriptOptions meta = opts;
      meta.echo = false;
      ScriptResult r = run_script(session, trimmed + "\n", meta);
      std::cout << r.output;
      continue;
    }
    buffer += line + "\n";
    if (trimmed.back() != ';') continue;
    try {
      for (const ast::Statement &stmt : parse_script(buffer)) {
        ExecResult r = session.execute(stmt);
        if (r.kind == ExecResult::Kind::Query)
          std::cout << (opts.csv ? render_csv(r.rs) : render_table(r.rs));
        else
          std::cout << render_report(r.report) << "\n";
      }
    } catch (const Error &e) {
      // point a caret at the offending token
      if (e.line() > 0) {
        std::istringstream is(buffer);
        std::string errLine;
        for (int i = 0; i < e.line() && std::getline(is, errLine); i++) {
        }
        std::cout << errLine << "\n";
        for (int i = 1; i < e.column(); i++) std::cout << ' ';
        std::cout << "^\n";
      }
      std::cout << "error: " << e.what() << "\n";
    }
    buffer.clear();
  }
  if (!dbPath.empty()) {
    try {
      session.db.save(dbPath);
    } catch (const Error &e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
  }
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"ChronoQL: a bitemporal database engine and REPL"};

  std::string dbPath, scriptPath, goldenDir, clockMode = "manual", todayStr, format = "table";
  bool keepGoing = false;
  app.add_option("--db", dbPath, "database file to load and save back");
  app.add_option("--script", scriptPath, "script of statements and meta-commands to run");
  app.add_option("--golden", goldenDir, "directory of golden outputs to compare against");
  app.add_option("--clock", clockMode, "transaction clock mode: manual or system")
      ->check(CLI::IsMember({"manual", "system"}));
  app.add_option("--today", todayStr, "pin the evaluation date, e.g. '15/6/2011'");
  app.add_option("--format", format, "result rendering: table or csv")
      ->check(CLI::IsMember({"table", "csv"}));
  app.add_flag("--keep-going", keepGoing, "continue a script after statement errors");
  CLI11_PARSE(app, argc, argv);

  Session session;
  session.db.clock().set_mode(clockMode == "system" ? TransactionClock::Mode::System
                                                    : TransactionClock::Mode::Manual);
  try {
    if (!dbPath.empty() && std::filesystem::exists(dbPath)) session.db = Database::load(dbPath);
    if (!todayStr.empty()) session.pin_today(Instant::parse(todayStr));
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  ScriptOptions opts;
  opts.csv = format == "csv";
  opts.keep_going = keepGoing;

  if (scriptPath.empty()) return run_repl(session, opts, dbPath);

  std::ifstream f(scriptPath);
  if (!f) {
    std::cerr << "error: cannot open script " << scriptPath << "\n";
    return 2;
  }
  std::ostringstream ss;
  ss << f.rdbuf();
  ScriptResult r = run_script(session, ss.str(), opts);
  std::cout << r.output;
  if (!dbPath.empty() && r.exit_code == 0) {
    try {
      session.db.save(dbPath);
    } catch (const Error &e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
  }
  if (!goldenDir.empty()) {
    std::filesystem::path golden =
        std::filesystem::path(goldenDir) /
        (std::filesystem::path(scriptPath).stem().string() + ".golden");
    std::ifstream g(golden);
    if (!g) {
      std::cerr << "error: cannot open golden file " << golden << "\n";
      return 2;
    }
    std::ostringstream gs;
    gs << g.rdbuf();
    if (gs.str() != r.output) {
      std::cerr << "golden mismatch against " << golden << "\n";
      return 3;
    }
  }
  return r.exit_code;
}
