#pragma once

// Shared test fixture: the university store built by replaying the shipped
// DML script under its scripted clock instants.

#include <fstream>
#include <sstream>
#include <string>

#include "chronoql/engine.hpp"
#include "chronoql/render.hpp"

#ifndef CHRONOQL_FIXTURE_DIR
#define CHRONOQL_FIXTURE_DIR "fixtures"
#endif

namespace testfix {

inline std::string read_file(const std::string &path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline std::string fixture_path(const std::string &name) {
  return std::string(CHRONOQL_FIXTURE_DIR) + "/" + name;
}

// Fresh session holding the fully replayed university store, today pinned
// to 15/6/2011.
inline chronoql::Session university() {
  chronoql::Session s;
  s.pin_today(chronoql::Instant::parse("15/6/2011"));
  chronoql::ScriptOptions opts;
  opts.echo = false;
  chronoql::ScriptResult r =
      run_script(s, read_file(fixture_path("university.cql")), opts);
  if (r.exit_code != 0) throw std::runtime_error("fixture replay failed:\n" + r.output);
  return s;
}

inline chronoql::ResultSet q(chronoql::Session &s, const std::string &text) {
  chronoql::ExecResult r = s.execute_text(text);
  return r.rs;
}

// Flattened (value-ish) text of one cell for compact assertions.
inline std::string cell_text(const chronoql::Cell &c) {
  std::string out;
  for (size_t i = 0; i < c.parts.size(); i++) {
    if (i) out += " | ";
    out += chronoql::render_part(c.parts[i]);
  }
  return out;
}

} // namespace testfix
