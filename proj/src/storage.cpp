#include "chronoql/storage.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <fstream>
#include <sstream>

namespace chronoql {

const char *termination_cause_name(TerminationCause c) {
  switch (c) {
  case TerminationCause::Open: return "OPEN";
  case TerminationCause::Evolution: return "EVOLUTION";
  case TerminationCause::Correction: return "CORRECTION";
  case TerminationCause::Deletion: return "DELETION";
  }
  return "?";
}

std::optional<TerminationCause> termination_cause_from_name(const std::string &s) {
  if (s == "OPEN") return TerminationCause::Open;
  if (s == "EVOLUTION") return TerminationCause::Evolution;
  if (s == "CORRECTION") return TerminationCause::Correction;
  if (s == "DELETION") return TerminationCause::Deletion;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Table

const Value &Table::key_of(const Row &r) const {
  int k = key_index();
  static const Value kNull;
  if (k < 0 || r.cells[k].empty()) return kNull;
  return r.cells[k].front().value;
}

const Row *Table::find_live(const Value &key) const {
  for (const Row &r : rows)
    if (r.open() && key_of(r) == key) return &r;
  return nullptr;
}

Row *Table::find_live(const Value &key) {
  return const_cast<Row *>(static_cast<const Table *>(this)->find_live(key));
}

// ---------------------------------------------------------------------------
// TransactionClock

Instant TransactionClock::wall_clock() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  return Instant::from_fields(Granularity::Second, tm.tm_year + 1900, tm.tm_mon + 1,
                              tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
}

void TransactionClock::set(const Instant &i) {
  if (mode_ != Mode::Manual)
    fail(Errc::NonMonotonicClock, "clock can only be set in MANUAL mode");
  Instant s = i.convert(Granularity::Second);
  if (last_ && s <= *last_)
    fail(Errc::NonMonotonicClock,
         "clock " + s.to_string() + " is not after last reading " + last_->to_string());
  if (pending_ && s <= *pending_)
    fail(Errc::NonMonotonicClock,
         "clock " + s.to_string() + " is not after pending reading " + pending_->to_string());
  pending_ = s;
}

Instant TransactionClock::read() const {
  if (mode_ == Mode::System) {
    Instant w = wall_clock();
    if (last_ && w <= *last_) return last_->plus(1);
    return w;
  }
  if (pending_) return *pending_;
  if (last_) return last_->plus(1);
  return Instant::from_fields(Granularity::Second, 2000, 1, 1);
}

Instant TransactionClock::acquire() {
  Instant stamp = read();
  last_ = stamp;
  pending_.reset();
  return stamp;
}

void TransactionClock::restore(Mode m, std::optional<Instant> lastReading) {
  mode_ = m;
  last_ = std::move(lastReading);
  pending_.reset();
}

// ---------------------------------------------------------------------------
// Database catalog

void Database::define_table(TableDef def) {
  if (tables_.count(def.name))
    fail(Errc::DuplicateTable, "table " + def.name + " already exists");
  if (def.primary_key.empty() || !def.find_column(def.primary_key))
    fail(Errc::UnknownTarget, "table " + def.name + " lacks its primary key column");
  for (const ColumnDef &c : def.columns) {
    if (c.name == def.primary_key && c.timestamped())
      fail(Errc::TemporalPrimaryKey, "primary key " + c.name + " may not be timestamped");
    if (c.references) {
      const Table *target = find_table(c.references->table);
      if (!target)
        fail(Errc::UnknownTarget, "foreign key target table " + c.references->table +
                                      " does not exist");
      if (!target->def.find_column(c.references->column))
        fail(Errc::UnknownTarget, "foreign key target column " + c.references->table + "(" +
                                      c.references->column + ") does not exist");
    }
    if (has_valid(c.kind) && is_grouping_only(c.valid_granularity))
      fail(Errc::ScaleTooFine, "DECADE/SEMESTER are grouping scales, not storage granularities");
  }
  if (has_valid(def.row_kind) && is_grouping_only(def.row_granularity))
    fail(Errc::ScaleTooFine, "DECADE/SEMESTER are grouping scales, not storage granularities");
  std::string name = def.name;
  order_.push_back(name);
  tables_.emplace(std::move(name), Table{std::move(def), {}});
}

const Table *Database::find_table(const std::string &name) const {
  auto it = tables_.find(name);
  return it == tables_.end() ? nullptr : &it->second;
}

Table *Database::find_table(const std::string &name) {
  auto it = tables_.find(name);
  return it == tables_.end() ? nullptr : &it->second;
}

const Table &Database::table(const std::string &name) const {
  const Table *t = find_table(name);
  if (!t) fail(Errc::UnknownTable, "unknown table " + name);
  return *t;
}

Table &Database::table(const std::string &name) {
  Table *t = find_table(name);
  if (!t) fail(Errc::UnknownTable, "unknown table " + name);
  return *t;
}

std::vector<Database::LinkRef> Database::links_to(const std::string &master) const {
  std::vector<LinkRef> out;
  for (const std::string &name : order_) {
    const Table &t = *find_table(name);
    for (const ColumnDef &c : t.def.columns)
      if (c.references && c.references->table == master) out.push_back({name, c.name});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Current view

std::vector<const VersionedEntry *> current_entries(const ColumnDef &col,
                                                    const std::vector<VersionedEntry> &cell,
                                                    const Instant &today) {
  std::vector<const VersionedEntry *> out;
  for (const VersionedEntry &e : cell) {
    if (!e.open()) continue;
    if (e.valid && !e.valid->contains(today.truncate(col.valid_granularity))) continue;
    out.push_back(&e);
  }
  // deterministic: order by valid begin, then value
  std::sort(out.begin(), out.end(), [](const VersionedEntry *a, const VersionedEntry *b) {
    if (a->valid && b->valid && !a->valid->empty() && !b->valid->empty()) {
      int c = Instant::compare(a->valid->first_begin(), b->valid->first_begin());
      if (c != 0) return c < 0;
    }
    auto c = Value::compare(a->value, b->value);
    return c.has_value() && *c < 0;
  });
  return out;
}

bool row_current(const TableDef &def, const Row &row, const Instant &today) {
  if (!row.open()) return false;
  if (row.valid && !row.valid->contains(today.truncate(def.row_granularity))) return false;
  return true;
}

std::vector<Database::CurrentRow> Database::current_view(const std::string &name,
                                                         const Instant &today) const {
  const Table &t = table(name);
  std::vector<CurrentRow> out;
  for (const Row &r : t.rows) {
    if (!row_current(t.def, r, today)) continue;
    CurrentRow cr;
    for (size_t c = 0; c < t.def.columns.size(); c++) {
      std::vector<Value> vs;
      for (const VersionedEntry *e : current_entries(t.def.columns[c], r.cells[c], today))
        if (!e->value.is_null()) vs.push_back(e->value);
      cr.push_back(std::move(vs));
    }
    out.push_back(std::move(cr));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Audit

namespace {

void audit_entries(const std::string &where, const ColumnDef *col,
                   const std::vector<VersionedEntry> &entries, bool hasValid, bool hasTx,
                   int multiplicity, std::vector<std::string> &out) {
  for (const VersionedEntry &e : entries) {
    if (hasValid && !e.valid)
      out.push_back(where + ": missing valid element");
    if (!hasValid && e.valid)
      out.push_back(where + ": unexpected valid element");
    if (hasTx && !e.transaction)
      out.push_back(where + ": missing transaction stamp");
    if (!hasTx && e.transaction)
      out.push_back(where + ": unexpected transaction stamp");
    bool open = !e.transaction || e.transaction->open_ended();
    if (open != (e.cause == TerminationCause::Open))
      out.push_back(where + ": termination cause inconsistent with transaction stamp");
  }
  if (hasValid && multiplicity == 1) {
    // open entries of a logically single-valued column must be disjoint
    std::vector<const VersionedEntry *> open;
    for (const VersionedEntry &e : entries)
      if (e.open()) open.push_back(&e);
    for (size_t i = 0; i < open.size(); i++)
      for (size_t j = i + 1; j < open.size(); j++)
        if (open[i]->valid && open[j]->valid &&
            !element_intersect(*open[i]->valid, *open[j]->valid).empty())
          out.push_back(where + ": open entries " + open[i]->value.to_string() + " and " +
                        open[j]->value.to_string() + " overlap in valid time");
  }
  (void)col;
}

} // namespace

std::vector<std::string> Database::audit() const {
  std::vector<std::string> out;
  for (const std::string &name : order_) {
    const Table &t = *find_table(name);
    for (size_t ri = 0; ri < t.rows.size(); ri++) {
      const Row &r = t.rows[ri];
      std::string rw = name + " row#" + std::to_string(ri);
      if (has_valid(t.def.row_kind) && !r.valid) out.push_back(rw + ": missing row valid element");
      if (has_transaction(t.def.row_kind) && !r.transaction)
        out.push_back(rw + ": missing row transaction stamp");
      bool open = !r.transaction || r.transaction->open_ended();
      if (open != (r.cause == TerminationCause::Open))
        out.push_back(rw + ": row cause inconsistent with transaction stamp");
      if (r.cells.size() != t.def.columns.size()) {
        out.push_back(rw + ": cell arity mismatch");
        continue;
      }
      for (size_t c = 0; c < t.def.columns.size(); c++) {
        const ColumnDef &col = t.def.columns[c];
        audit_entries(rw + "." + col.name, &col, r.cells[c], has_valid(col.kind),
                      has_transaction(col.kind), col.multiplicity, out);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Persistence: a line-oriented UTF-8 format, header "CHRONOQL v1".

namespace {

std::string quote(const std::string &s) {
  std::string out = "'";
  for (char c : s) {
    out.push_back(c);
    if (c == '\'') out.push_back('\'');
  }
  out.push_back('\'');
  return out;
}

std::string write_value(const Value &v) {
  if (v.is_text()) return quote(v.as_text());
  return v.to_string();
}

void write_entry_stamps(std::ostream &os, const std::optional<TemporalElement> &valid,
                        const std::optional<Period> &tx, TerminationCause cause) {
  if (valid) os << " VALID " << valid->to_string();
  if (tx) os << " TX " << tx->to_string();
  if (cause != TerminationCause::Open) os << " CAUSE " << termination_cause_name(cause);
}

// Splits a line into tokens; quoted runs (with '' escapes) stay glued to
// their surrounding bracket characters, so a period literal is one token.
std::vector<std::string> split_line(const std::string &line, int lineno) {
  std::vector<std::string> out;
  std::string cur;
  bool inq = false;
  for (size_t i = 0; i < line.size(); i++) {
    char c = line[i];
    if (inq) {
      if (c == '\'') {
        if (i + 1 < line.size() && line[i + 1] == '\'') {
          cur.push_back('\'');
          cur.push_back('\'');
          i++;
        } else {
          inq = false;
          cur.push_back(c);
        }
      } else {
        cur.push_back(c);
      }
      continue;
    }
    if (c == '\'') {
      inq = true;
      cur.push_back(c);
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) {
        out.push_back(cur);
        cur.clear();
      }
    } else {
      cur.push_back(c);
    }
  }
  if (inq) fail(Errc::CorruptFile, "unterminated quote", lineno, static_cast<int>(line.size()));
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::string unquote(const std::string &tok, int lineno) {
  if (tok.size() < 2 || tok.front() != '\'' || tok.back() != '\'')
    fail(Errc::CorruptFile, "expected quoted literal, got " + tok, lineno, 1);
  std::string out;
  for (size_t i = 1; i + 1 < tok.size(); i++) {
    out.push_back(tok[i]);
    if (tok[i] == '\'') i++; // escaped quote
  }
  return out;
}

Value read_value(const std::string &tok, ValueType type, int lineno) {
  if (tok == "Null") return Value::null();
  switch (type) {
  case ValueType::Text: return Value::text(unquote(tok, lineno));
  case ValueType::Date: return Value::date(Instant::parse(unquote(tok, lineno)));
  case ValueType::Integer: return Value::integer(std::stoll(tok));
  case ValueType::Decimal: return Value::decimal(std::stod(tok));
  }
  fail(Errc::CorruptFile, "bad value " + tok, lineno, 1);
}

// Consumes an element literal: period tokens joined by U.
TemporalElement read_element(const std::vector<std::string> &toks, size_t &i, Dimension dim,
                             int lineno) {
  std::vector<Period> ps;
  while (i < toks.size()) {
    try {
      ps.push_back(Period::parse(toks[i], dim));
    } catch (const Error &e) {
      fail(Errc::CorruptFile, std::string("bad period literal: ") + e.what(), lineno, 1);
    }
    i++;
    if (i < toks.size() && toks[i] == "U")
      i++;
    else
      break;
  }
  return TemporalElement::normalize(std::move(ps));
}

} // namespace

std::string Database::save_to_string() const {
  std::ostringstream os;
  os << "CHRONOQL v1\n";
  os << "CLOCK " << (clock_.mode() == TransactionClock::Mode::Manual ? "MANUAL" : "SYSTEM");
  if (clock_.last()) os << " '" << clock_.last()->to_string() << "'";
  os << "\n";
  for (const std::string &name : order_) {
    const Table &t = *find_table(name);
    os << "TABLE " << name << " ROW " << temporal_kind_name(t.def.row_kind);
    if (has_valid(t.def.row_kind)) os << " " << granularity_name(t.def.row_granularity);
    if (t.def.vacuum_keep) os << " VACUUM KEEP " << *t.def.vacuum_keep;
    if (t.def.vacuum_lifecycle) os << " VACUUM LIFECYCLE " << t.def.vacuum_lifecycle->to_string();
    os << "\n";
    for (const ColumnDef &c : t.def.columns) {
      os << "COLUMN " << c.name << " " << value_type_name(c.type);
      if (c.name == t.def.primary_key) os << " KEY";
      if (c.timestamped()) {
        os << " " << temporal_kind_name(c.kind);
        if (has_valid(c.kind)) os << " " << granularity_name(c.valid_granularity);
      }
      if (c.multiplicity != 1) os << " MULTIPLICITY " << c.multiplicity;
      if (c.references)
        os << " REFERENCES " << c.references->table << "(" << c.references->column
           << ") ON DELETE " << (c.references->on_delete == ReferentialAction::Cascade ? "CASCADE"
                                  : c.references->on_delete == ReferentialAction::CorrectNull
                                      ? "CORRECT_NULL"
                                      : "RESTRICT");
      if (c.default_valid) os << " DEFAULT " << c.default_valid->to_string();
      if (c.vacuum_keep) os << " VACUUM KEEP " << *c.vacuum_keep;
      if (c.vacuum_lifecycle) os << " VACUUM LIFECYCLE " << c.vacuum_lifecycle->to_string();
      os << "\n";
    }
    os << "END\n";
  }
  for (const std::string &name : order_) {
    const Table &t = *find_table(name);
    os << "DATA " << name << "\n";
    for (const Row &r : t.rows) {
      os << "ROW";
      write_entry_stamps(os, r.valid, r.transaction, r.cause);
      os << "\n";
      for (size_t c = 0; c < t.def.columns.size(); c++) {
        for (const VersionedEntry &e : r.cells[c]) {
          os << "CELL " << t.def.columns[c].name << " = " << write_value(e.value);
          write_entry_stamps(os, e.valid, e.transaction, e.cause);
          os << "\n";
        }
      }
    }
    os << "END\n";
  }
  return os.str();
}

void Database::save(const std::string &path) const {
  std::ofstream f(path);
  if (!f) fail(Errc::IoError, "cannot open " + path + " for writing");
  f << save_to_string();
  if (!f) fail(Errc::IoError, "write to " + path + " failed");
}

Database Database::load_from_string(const std::string &text, const std::string &origin) {
  Database db;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(is, line)) return false;
    lineno++;
    return true;
  };
  if (!next_line() || line != "CHRONOQL v1")
    fail(Errc::CorruptFile, origin + ": missing CHRONOQL v1 header", 1, 1);

  Table *dataTable = nullptr;
  Row *row = nullptr;
  TableDef pending;
  bool inTable = false;

  auto parse_duration = [&](const std::vector<std::string> &toks, size_t &i) {
    Duration d;
    d.count = std::stoll(toks.at(i++));
    auto g = granularity_from_name(toks.at(i++));
    if (!g) fail(Errc::CorruptFile, "bad duration scale", lineno, 1);
    d.scale = *g;
    return d;
  };

  while (next_line()) {
    if (line.empty()) continue;
    std::vector<std::string> toks = split_line(line, lineno);
    if (toks.empty()) continue;
    const std::string &head = toks[0];
    try {
      if (head == "CLOCK") {
        TransactionClock::Mode m = toks.at(1) == "MANUAL" ? TransactionClock::Mode::Manual
                                                          : TransactionClock::Mode::System;
        std::optional<Instant> lastReading;
        if (toks.size() > 2) lastReading = Instant::parse(unquote(toks[2], lineno));
        db.clock_.restore(m, lastReading);
      } else if (head == "TABLE") {
        if (inTable) fail(Errc::CorruptFile, "nested TABLE", lineno, 1);
        pending = TableDef{};
        pending.name = toks.at(1);
        size_t i = 2;
        if (i < toks.size() && toks[i] == "ROW") {
          i++;
          if (pending.name.empty()) fail(Errc::CorruptFile, "bad TABLE line", lineno, 1);
          const std::string &k = toks.at(i++);
          pending.row_kind = k == "V" ? TemporalKind::V
                             : k == "T" ? TemporalKind::T
                             : k == "VT" ? TemporalKind::VT
                                         : TemporalKind::None;
          if (has_valid(pending.row_kind)) {
            auto g = granularity_from_name(toks.at(i++));
            if (!g) fail(Errc::CorruptFile, "bad row granularity", lineno, 1);
            pending.row_granularity = *g;
          }
        }
        while (i < toks.size()) {
          if (toks[i] == "VACUUM" && toks.at(i + 1) == "KEEP") {
            pending.vacuum_keep = std::stoi(toks.at(i + 2));
            i += 3;
          } else if (toks[i] == "VACUUM" && toks.at(i + 1) == "LIFECYCLE") {
            i += 2;
            pending.vacuum_lifecycle = parse_duration(toks, i);
          } else {
            fail(Errc::CorruptFile, "unexpected token " + toks[i], lineno, 1);
          }
        }
        inTable = true;
      } else if (head == "COLUMN") {
        if (!inTable) fail(Errc::CorruptFile, "COLUMN outside TABLE", lineno, 1);
        ColumnDef c;
        c.name = toks.at(1);
        auto vt = value_type_from_name(toks.at(2));
        if (!vt) fail(Errc::CorruptFile, "bad column type " + toks.at(2), lineno, 1);
        c.type = *vt;
        size_t i = 3;
        while (i < toks.size()) {
          const std::string &opt = toks[i];
          if (opt == "KEY") {
            pending.primary_key = c.name;
            i++;
          } else if (opt == "V" || opt == "T" || opt == "VT") {
            c.kind = opt == "V" ? TemporalKind::V : opt == "T" ? TemporalKind::T : TemporalKind::VT;
            i++;
            if (has_valid(c.kind)) {
              auto g = granularity_from_name(toks.at(i++));
              if (!g) fail(Errc::CorruptFile, "bad granularity", lineno, 1);
              c.valid_granularity = *g;
            }
          } else if (opt == "MULTIPLICITY") {
            c.multiplicity = std::stoi(toks.at(i + 1));
            i += 2;
          } else if (opt == "REFERENCES") {
            std::string spec = toks.at(i + 1); // table(column)
            size_t lp = spec.find('('), rp = spec.find(')');
            if (lp == std::string::npos || rp == std::string::npos || rp < lp)
              fail(Errc::CorruptFile, "bad REFERENCES " + spec, lineno, 1);
            ForeignKey fk;
            fk.table = spec.substr(0, lp);
            fk.column = spec.substr(lp + 1, rp - lp - 1);
            i += 2;
            if (i + 2 < toks.size() + 1 && i + 1 < toks.size() && toks[i] == "ON" &&
                toks[i + 1] == "DELETE") {
              const std::string &act = toks.at(i + 2);
              fk.on_delete = act == "CASCADE" ? ReferentialAction::Cascade
                             : act == "CORRECT_NULL" ? ReferentialAction::CorrectNull
                                                     : ReferentialAction::Restrict;
              i += 3;
            }
            c.references = fk;
          } else if (opt == "DEFAULT") {
            i++;
            c.default_valid = read_element(toks, i, Dimension::Valid, lineno);
          } else if (opt == "VACUUM" && i + 1 < toks.size() && toks[i + 1] == "KEEP") {
            c.vacuum_keep = std::stoi(toks.at(i + 2));
            i += 3;
          } else if (opt == "VACUUM" && i + 1 < toks.size() && toks[i + 1] == "LIFECYCLE") {
            i += 2;
            c.vacuum_lifecycle = parse_duration(toks, i);
          } else {
            fail(Errc::CorruptFile, "unexpected column option " + opt, lineno, 1);
          }
        }
        pending.columns.push_back(std::move(c));
      } else if (head == "END") {
        if (inTable) {
          db.define_table(pending);
          inTable = false;
        } else if (dataTable) {
          dataTable = nullptr;
          row = nullptr;
        } else {
          fail(Errc::CorruptFile, "stray END", lineno, 1);
        }
      } else if (head == "DATA") {
        dataTable = db.find_table(toks.at(1));
        if (!dataTable) fail(Errc::CorruptFile, "DATA for unknown table " + toks.at(1), lineno, 1);
        row = nullptr;
      } else if (head == "ROW") {
        if (!dataTable) fail(Errc::CorruptFile, "ROW outside DATA", lineno, 1);
        Row r;
        r.cells.resize(dataTable->def.columns.size());
        size_t i = 1;
        while (i < toks.size()) {
          if (toks[i] == "VALID") {
            i++;
            r.valid = read_element(toks, i, Dimension::Valid, lineno);
          } else if (toks[i] == "TX") {
            r.transaction = Period::parse(toks.at(i + 1), Dimension::Transaction);
            i += 2;
          } else if (toks[i] == "CAUSE") {
            auto c = termination_cause_from_name(toks.at(i + 1));
            if (!c) fail(Errc::CorruptFile, "bad cause " + toks.at(i + 1), lineno, 1);
            r.cause = *c;
            i += 2;
          } else {
            fail(Errc::CorruptFile, "unexpected token " + toks[i], lineno, 1);
          }
        }
        if (r.transaction && !r.transaction->open_ended() && r.cause == TerminationCause::Open)
          fail(Errc::CorruptFile, "closed row without cause", lineno, 1);
        dataTable->rows.push_back(std::move(r));
        row = &dataTable->rows.back();
      } else if (head == "CELL") {
        if (!row) fail(Errc::CorruptFile, "CELL outside ROW", lineno, 1);
        int ci = dataTable->def.column_index(toks.at(1));
        if (ci < 0) fail(Errc::CorruptFile, "unknown column " + toks.at(1), lineno, 1);
        if (toks.at(2) != "=") fail(Errc::CorruptFile, "expected '='", lineno, 1);
        VersionedEntry e;
        e.value = read_value(toks.at(3), dataTable->def.columns[ci].type, lineno);
        size_t i = 4;
        while (i < toks.size()) {
          if (toks[i] == "VALID") {
            i++;
            e.valid = read_element(toks, i, Dimension::Valid, lineno);
          } else if (toks[i] == "TX") {
            e.transaction = Period::parse(toks.at(i + 1), Dimension::Transaction);
            i += 2;
          } else if (toks[i] == "CAUSE") {
            auto c = termination_cause_from_name(toks.at(i + 1));
            if (!c) fail(Errc::CorruptFile, "bad cause " + toks.at(i + 1), lineno, 1);
            e.cause = *c;
            i += 2;
          } else {
            fail(Errc::CorruptFile, "unexpected token " + toks[i], lineno, 1);
          }
        }
        row->cells[ci].push_back(std::move(e));
      } else {
        fail(Errc::CorruptFile, "unexpected line head " + head, lineno, 1);
      }
    } catch (const Error &) {
      throw;
    } catch (const std::exception &ex) {
      fail(Errc::CorruptFile, origin + ": " + ex.what(), lineno, 1);
    }
  }
  if (inTable || dataTable)
    fail(Errc::CorruptFile, origin + ": unexpected end of file", lineno, 1);
  return db;
}

Database Database::load(const std::string &path) {
  std::ifstream f(path);
  if (!f) fail(Errc::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return load_from_string(ss.str(), path);
}

} // namespace chronoql
