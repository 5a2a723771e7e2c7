#pragma once

// Randomized DML sequences against a small bitemporal schema, with the
// state-machine checks the engine must uphold: store audits, monotone entry
// counts, single-statement atomicity, and replay determinism.

#include <random>
#include <string>
#include <vector>

#include "chronoql/engine.hpp"

namespace dmlfuzz {

using namespace chronoql;

struct Stats {
  int executed = 0;
  int failed = 0;
  int vacuumed = 0;
};

inline std::string schema_script() {
  return R"(CREATE TABLE MASTER (
  Id INTEGER PRIMARY KEY,
  Label TEXT,
  Price INTEGER TRANSACTION TIME,
  Flag TEXT VALID TIME GRANULARITY YEAR TRANSACTION TIME,
  Slot TEXT VALID TIME GRANULARITY YEAR
) VALID TIME GRANULARITY YEAR TRANSACTION TIME;
CREATE TABLE DETAIL (
  Id INTEGER PRIMARY KEY,
  MasterId INTEGER VALID TIME GRANULARITY YEAR TRANSACTION TIME REFERENCES MASTER(Id) ON DELETE CASCADE,
  Note TEXT
) VALID TIME GRANULARITY YEAR TRANSACTION TIME;
)";
}

// Counts every stored entry and row version.
inline int entry_count(const Database &db) {
  int n = 0;
  for (const std::string &name : db.table_names()) {
    const Table &t = *db.find_table(name);
    for (const Row &r : t.rows) {
      n++;
      for (const auto &cell : r.cells) n += static_cast<int>(cell.size());
    }
  }
  return n;
}

class Fuzzer {
public:
  explicit Fuzzer(unsigned seed) : rng_(seed) {
    session_.pin_today(Instant::parse("15/6/2011"));
    ScriptOptions opts;
    opts.echo = false;
    ScriptResult r = run_script(session_, schema_script(), opts);
    if (r.exit_code != 0) throw std::runtime_error("fuzz schema failed:\n" + r.output);
    clock_year_ = 2000;
  }

  Session &session() { return session_; }
  const std::vector<std::pair<Instant, std::string>> &log() const { return log_; }

  // One random statement; returns the error text when the statement was
  // rejected (the store must then be untouched, which the caller checks).
  std::string step(Stats &stats) {
    std::string stmt = random_statement();
    Instant stamp = next_clock();
    session_.db.clock().set(stamp);
    try {
      session_.execute_text(stmt);
      log_.emplace_back(stamp, stmt);
      stats.executed++;
      if (stmt.rfind("VACUUM", 0) == 0) stats.vacuumed++;
      return "";
    } catch (const Error &e) {
      stats.failed++;
      return e.what();
    }
  }

  // Replays the successful statements onto a fresh store.
  Database replay() const {
    Session fresh;
    fresh.pin_today(Instant::parse("15/6/2011"));
    ScriptOptions opts;
    opts.echo = false;
    run_script(fresh, schema_script(), opts);
    for (const auto &[stamp, stmt] : log_) {
      fresh.db.clock().set(stamp);
      fresh.execute_text(stmt);
    }
    return fresh.db;
  }

private:
  Session session_;
  std::mt19937 rng_;
  std::vector<std::pair<Instant, std::string>> log_;
  int clock_year_;
  int clock_serial_ = 0;

  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  Instant next_clock() {
    clock_serial_++;
    int minute = clock_serial_ % 60;
    int hour = (clock_serial_ / 60) % 24;
    int day = 1 + (clock_serial_ / 1440) % 28;
    return Instant::from_fields(Granularity::Second, clock_year_ + clock_serial_ / 40320, 6, day,
                                hour, minute, 0);
  }

  std::string element(int lo = 1995, int hi = 2030) {
    int b = pick(lo, hi - 1);
    int len = pick(1, 6);
    if (pick(0, 4) == 0) return "['" + std::to_string(b) + "'-'uc']";
    return "['" + std::to_string(b) + "'-'" + std::to_string(b + len) + "']";
  }

  std::string random_statement() {
    switch (pick(0, 9)) {
    case 0:
    case 1: { // INSERT MASTER (keys collide sometimes)
      int id = pick(1, 25);
      return "INSERT INTO MASTER VALUES (" + std::to_string(id) + ", 'L" + std::to_string(id) +
             "', " + std::to_string(pick(1, 99)) + ", {'t" + std::to_string(pick(0, 5)) + "' " +
             element() + "}, {'s" + std::to_string(pick(0, 5)) + "' " + element() + "}) " +
             element() + ";";
    }
    case 2: { // INSERT DETAIL
      int id = pick(100, 140);
      return "INSERT INTO DETAIL VALUES (" + std::to_string(id) + ", {" +
             std::to_string(pick(1, 25)) + " " + element(2000, 2012) + "}, 'n') " +
             element(1995, 2013) + ";";
    }
    case 3: // SET on a plain or T column
      return pick(0, 1) ? "UPDATE MASTER SET Label = 'renamed' WHERE Id = " +
                              std::to_string(pick(1, 25)) + ";"
                        : "UPDATE MASTER SET Price = " + std::to_string(pick(1, 99)) +
                              " WHERE Id = " + std::to_string(pick(1, 25)) + ";";
    case 4: // TAG ON (may overlap)
      return "UPDATE MASTER TAG ON Flag 't" + std::to_string(pick(0, 5)) + "' " + element() +
             " WHERE Id = " + std::to_string(pick(1, 25)) + ";";
    case 5: // TAG ON the valid-only column
      return "UPDATE MASTER TAG ON Slot 's" + std::to_string(pick(0, 5)) + "' " + element() +
             " WHERE Id = " + std::to_string(pick(1, 25)) + ";";
    case 6: // CORRECT by value
      return "UPDATE MASTER CORRECT Flag 't" + std::to_string(pick(0, 5)) + "' " + element() +
             " WHERE Id = " + std::to_string(pick(1, 25)) + ";";
    case 7: // DELETE
      return pick(0, 3) == 0 ? "DELETE FROM MASTER WHERE Id = " + std::to_string(pick(1, 25)) +
                                   ";"
                             : "DELETE FROM DETAIL WHERE Id = " + std::to_string(pick(100, 140)) +
                                   ";";
    case 8: // illegal SET on a valid column (atomicity probe)
      return "UPDATE MASTER SET Flag = 'nope' WHERE Id = " + std::to_string(pick(1, 25)) + ";";
    default: // VACUUM closed material
      return "VACUUM FROM MASTER WHERE Id = " + std::to_string(pick(1, 25)) + ";";
    }
  }
};

} // namespace dmlfuzz
