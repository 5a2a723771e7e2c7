#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "chronoql/schema.hpp"

namespace chronoql {

// Why an entry's transaction period was closed. OPEN entries are the ones
// the database currently believes; ERRONEOUS selection keys on CORRECTION.
enum class TerminationCause { Open, Evolution, Correction, Deletion };
const char *termination_cause_name(TerminationCause c);
std::optional<TerminationCause> termination_cause_from_name(const std::string &s);

// One (value, valid element, transaction period, cause) record inside a
// timestamped column. Plain columns use the degenerate form with neither
// stamp.
struct VersionedEntry {
  Value value;
  std::optional<TemporalElement> valid;
  std::optional<Period> transaction;
  TerminationCause cause = TerminationCause::Open;

  bool open() const { return !transaction.has_value() || transaction->open_ended(); }
};

// One row version. Column histories live inside the row (attribute
// timestamping); the row-level stamps track the row's own lifecycle.
struct Row {
  std::vector<std::vector<VersionedEntry>> cells; // schema column order
  std::optional<TemporalElement> valid;
  std::optional<Period> transaction;
  TerminationCause cause = TerminationCause::Open;

  bool open() const { return !transaction.has_value() || transaction->open_ended(); }
};

struct Table {
  TableDef def;
  std::vector<Row> rows; // row versions, insertion order

  int key_index() const { return def.column_index(def.primary_key); }
  const Value &key_of(const Row &r) const;
  // The live row version holding this key, if any.
  const Row *find_live(const Value &key) const;
  Row *find_live(const Value &key);
};

// Deterministic statement clock at SECOND granularity.
class TransactionClock {
public:
  enum class Mode { System, Manual };

  Mode mode() const { return mode_; }
  void set_mode(Mode m) { mode_ = m; }

  // Manual-mode only; the instant must lie strictly after the last reading.
  void set(const Instant &i);
  // Current reading without consuming it.
  Instant read() const;
  // Stamp for a committing statement; advances the clock so that readings
  // stay strictly monotonic even without an intervening set().
  Instant acquire();

  const std::optional<Instant> &last() const { return last_; }
  void restore(Mode m, std::optional<Instant> lastReading); // load_db path

private:
  static Instant wall_clock();
  Mode mode_ = Mode::Manual;
  std::optional<Instant> last_;
  std::optional<Instant> pending_;
};

class Database {
public:
  // DDL entry point. Fails DuplicateTable / UnknownTarget /
  // TemporalPrimaryKey without touching the catalog.
  void define_table(TableDef def);

  const Table *find_table(const std::string &name) const;
  Table *find_table(const std::string &name);
  const Table &table(const std::string &name) const; // fails UnknownTable
  Table &table(const std::string &name);
  const std::vector<std::string> &table_names() const { return order_; }

  // Tables whose given column references `master` by foreign key.
  struct LinkRef {
    std::string table;
    std::string column;
  };
  std::vector<LinkRef> links_to(const std::string &master) const;

  TransactionClock &clock() { return clock_; }
  const TransactionClock &clock() const { return clock_; }

  // The upward-compatible view: live rows reduced to their current values.
  // One inner vector per column; single-valued columns yield 0 or 1 values.
  using CurrentRow = std::vector<std::vector<Value>>;
  std::vector<CurrentRow> current_view(const std::string &table, const Instant &today) const;

  // Store-wide audit of the versioning invariants; returns human-readable
  // violations, empty when healthy.
  std::vector<std::string> audit() const;

  void save(const std::string &path) const;
  std::string save_to_string() const;
  static Database load(const std::string &path);
  static Database load_from_string(const std::string &text, const std::string &origin = "<string>");

private:
  std::map<std::string, Table> tables_;
  std::vector<std::string> order_;
  TransactionClock clock_;
};

// Current values of one column inside a live row: open transaction and,
// when valid-stamped, valid element containing `today`.
std::vector<const VersionedEntry *> current_entries(const ColumnDef &col,
                                                    const std::vector<VersionedEntry> &cell,
                                                    const Instant &today);

bool row_current(const TableDef &def, const Row &row, const Instant &today);

} // namespace chronoql
