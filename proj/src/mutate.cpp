#include "chronoql/mutate.hpp"

#include <algorithm>
#include <set>

namespace chronoql {

using namespace ast;

namespace {

class Mutator {
public:
  Mutator(Database &db, Instant clock, Instant today)
      : db_(db), clock_(std::move(clock)), today_(std::move(today)), eval_(db, today_, clock_) {}

  MutationReport exec(const ast::Statement &stmt) {
    MutationReport r = std::visit([&](const auto &s) { return run(s); }, stmt);
    r.clock = clock_;
    auto_vacuum(r);
    return r;
  }

private:
  Database &db_;
  Instant clock_;
  Instant today_;
  Evaluator eval_;

  Period open_tx() const { return Period::open(clock_, Granularity::Second, OpenEnd::Now); }

  Period closed_from(const Period &p) const {
    return Period::closed(p.begin_instant(), clock_, Granularity::Second);
  }

  Instant today_at(Granularity g) const { return today_.truncate(g); }

  TemporalElement default_element(const ColumnDef &c) const {
    if (c.default_valid) return *c.default_valid;
    return TemporalElement::of(
        Period::open(today_at(c.valid_granularity), c.valid_granularity, OpenEnd::Uc));
  }

  // Converts a literal element onto the column granularity; a finer literal
  // does not fit the declared scale.
  TemporalElement fit_element(const TemporalElement &e, Granularity g, const std::string &col) {
    if (e.empty()) return TemporalElement(g);
    if (e.granularity() == g) return e;
    if (coarser(e.granularity(), g)) return e.convert(g);
    fail(Errc::MixedGranularity,
         "timestamp granularity " + std::string(granularity_name(e.granularity())) +
             " is finer than column " + col + " (" + granularity_name(g) + ")");
  }

  bool disjoint_from_open(const Table &t, const Row &row, int col,
                          const TemporalElement &elem, const VersionedEntry *except = nullptr) {
    for (const VersionedEntry &e : row.cells[col]) {
      if (&e == except || !e.open() || !e.valid) continue;
      if (!element_intersect(*e.valid, elem).empty()) return false;
    }
    (void)t;
    return true;
  }

  void check_multiplicity(const Table &t, const Row &row, int col) {
    const ColumnDef &cd = t.def.columns[col];
    auto current = current_entries(cd, row.cells[col], today_);
    if (static_cast<int>(current.size()) > cd.multiplicity)
      fail(Errc::MultiplicityExceeded, cd.name + " allows at most " +
                                           std::to_string(cd.multiplicity) + " current values");
  }

  void check_foreign_key(const ColumnDef &cd, const Value &v,
                         const std::optional<TemporalElement> &elem) {
    if (!cd.references || v.is_null()) return;
    const Table &master = db_.table(cd.references->table);
    const Row *mr = master.find_live(v);
    if (!mr)
      fail(Errc::ForeignKeyViolation,
           cd.name + " references missing " + cd.references->table + " row " + v.to_string());
    // timestamp containment, checked at link introduction only
    if (elem && mr->valid) {
      if (!element_difference(*elem, *mr->valid).empty())
        fail(Errc::ForeignKeyViolation,
             "link timestamp " + elem->to_string() + " is not contained in the " +
                 cd.references->table + " row validity " + mr->valid->to_string());
    }
  }

  std::vector<size_t> matched_rows(Table &t, const ExprPtr &where, bool include_closed = false) {
    std::vector<size_t> out;
    for (size_t i = 0; i < t.rows.size(); i++) {
      const Row &r = t.rows[i];
      if (!include_closed && !row_current(t.def, r, today_)) continue;
      if (eval_.row_matches(where, t, r)) out.push_back(i);
    }
    return out;
  }

  Value eval_on_row(const ExprPtr &expr, const Table &t, const Row &row) {
    return eval_.scalar_on_row(expr, t, row);
  }

  // --- statements -----------------------------------------------------------

  MutationReport run(const ast::CreateTable &ct) {
    MutationReport r;
    r.kind = "CREATE TABLE";
    db_.define_table(ct.def);
    return r;
  }

  MutationReport run(const ast::SelectPtr &) {
    fail(Errc::ParseError, "SELECT is not a mutation");
  }

  MutationReport run(const ast::Insert &ins) {
    MutationReport r;
    r.kind = "INSERT";
    Table &t = db_.table(ins.table);
    for (const ast::InsertRow &rowAst : ins.rows) {
      if (rowAst.values.size() != t.def.columns.size())
        fail(Errc::IncompatibleArity,
             "INSERT supplies " + std::to_string(rowAst.values.size()) + " values, " +
                 t.def.name + " has " + std::to_string(t.def.columns.size()) + " columns");
      Row row;
      row.cells.resize(t.def.columns.size());
      for (size_t c = 0; c < t.def.columns.size(); c++) {
        const ColumnDef &cd = t.def.columns[c];
        const ast::InsertValue &v = rowAst.values[c];
        if (!v.braced && v.entries.size() == 1 && !v.entries[0].element &&
            v.entries[0].value->kind == Expr::Kind::Literal &&
            v.entries[0].value->literal.is_null() && !cd.timestamped()) {
          continue; // plain NULL
        }
        for (const ast::InsertValue::Entry &en : v.entries) {
          VersionedEntry e;
          e.value = eval_.scalar(en.value);
          if (!e.value.is_null()) e.value = e.value.coerce(cd.type);
          if (has_valid(cd.kind)) {
            TemporalElement elem = en.element
                                       ? fit_element(*en.element, cd.valid_granularity, cd.name)
                                       : default_element(cd);
            e.valid = elem;
          } else if (en.element) {
            fail(Errc::TemporalTermOnPlainColumn,
                 cd.name + " carries no valid timestamps, a timestamp was supplied");
          }
          if (has_transaction(cd.kind)) e.transaction = open_tx();
          if (e.value.is_null() && !cd.timestamped()) continue;
          if (cd.multiplicity == 1 && e.valid &&
              !disjoint_from_open(t, row, static_cast<int>(c), *e.valid))
            fail(Errc::OverlappingValidTime,
                 "overlapping valid timestamps supplied for " + cd.name);
          check_foreign_key(cd, e.value, e.valid);
          row.cells[c].push_back(std::move(e));
          r.entries_created++;
        }
        check_multiplicity(t, row, static_cast<int>(c));
      }
      // row stamps
      if (has_valid(t.def.row_kind)) {
        row.valid = rowAst.row_valid
                        ? fit_element(*rowAst.row_valid, t.def.row_granularity, t.def.name)
                        : TemporalElement::of(Period::open(today_at(t.def.row_granularity),
                                                           t.def.row_granularity, OpenEnd::Uc));
      } else if (rowAst.row_valid) {
        fail(Errc::TemporalTermOnPlainColumn,
             t.def.name + " rows carry no valid timestamps, a row timestamp was supplied");
      }
      if (has_transaction(t.def.row_kind)) row.transaction = open_tx();

      const Value &key = t.key_of(row);
      if (key.is_null()) fail(Errc::DuplicateKey, t.def.name + " needs a primary key value");
      if (t.find_live(key))
        fail(Errc::DuplicateKey, t.def.name + " already holds a live row with key " + key.to_string());
      t.rows.push_back(std::move(row));
      r.rows_matched++;
    }
    return r;
  }

  MutationReport run(const ast::UpdateSet &u) {
    MutationReport r;
    r.kind = "UPDATE";
    Table &t = db_.table(u.table);
    for (size_t idx : matched_rows(t, u.where)) {
      Row &row = t.rows[idx];
      r.rows_matched++;
      for (const auto &[colName, expr] : u.assignments) {
        int c = t.def.column_index(colName);
        if (c < 0) fail(Errc::UnknownColumn, "unknown column " + colName);
        const ColumnDef &cd = t.def.columns[c];
        if (has_valid(cd.kind))
          fail(Errc::SetOnValidColumn,
               colName + " carries valid timestamps; use TAG ON or CORRECT");
        Value v = eval_on_row(expr, t, row);
        if (!v.is_null()) v = v.coerce(cd.type);
        if (cd.kind == TemporalKind::None) {
          row.cells[c].clear();
          if (!v.is_null()) {
            VersionedEntry e;
            e.value = v;
            row.cells[c].push_back(std::move(e));
            r.entries_created++;
          }
        } else { // kind T: non-destructive
          for (VersionedEntry &e : row.cells[c]) {
            if (!e.open() || !e.transaction) continue;
            e.transaction = closed_from(*e.transaction);
            e.cause = TerminationCause::Evolution;
            r.entries_closed++;
          }
          if (!v.is_null()) {
            VersionedEntry e;
            e.value = v;
            e.transaction = open_tx();
            check_foreign_key(cd, e.value, std::nullopt);
            row.cells[c].push_back(std::move(e));
            r.entries_created++;
          }
        }
      }
    }
    return r;
  }

  MutationReport run(const ast::UpdateTagOn &u) {
    MutationReport r;
    r.kind = "UPDATE";
    Table &t = db_.table(u.table);
    for (size_t idx : matched_rows(t, u.where)) {
      Row &row = t.rows[idx];
      r.rows_matched++;
      for (const ast::TagOnItem &item : u.items) {
        int c = t.def.column_index(item.column);
        if (c < 0) fail(Errc::UnknownColumn, "unknown column " + item.column);
        const ColumnDef &cd = t.def.columns[c];
        if (!has_valid(cd.kind))
          fail(Errc::SetOnValidColumn,
               item.column + " carries no valid timestamps; use SET");
        for (const ast::InsertValue::Entry &en : item.entries) {
          VersionedEntry e;
          e.value = eval_on_row(en.value, t, row);
          if (!e.value.is_null()) e.value = e.value.coerce(cd.type);
          e.valid = en.element ? fit_element(*en.element, cd.valid_granularity, cd.name)
                               : default_element(cd);
          if (has_transaction(cd.kind)) e.transaction = open_tx();
          if (cd.multiplicity == 1 &&
              !disjoint_from_open(t, row, c, *e.valid))
            fail(Errc::OverlappingValidTime,
                 "a value of " + cd.name + " already holds an overlapping valid timestamp");
          check_foreign_key(cd, e.value, e.valid);
          row.cells[c].push_back(std::move(e));
          r.entries_created++;
          check_multiplicity(t, row, c);
        }
      }
    }
    return r;
  }

  MutationReport run(const ast::UpdateCorrect &u) {
    MutationReport r;
    r.kind = "UPDATE";
    Table &t = db_.table(u.table);
    std::vector<size_t> targets = matched_rows(t, u.where);

    if (u.row_validity) {
      for (size_t idx : targets) {
        r.rows_matched++;
        if (!has_valid(t.def.row_kind))
          fail(Errc::NoMatchingEntry, t.def.name + " rows carry no valid timestamps");
        TemporalElement corrected =
            fit_element(*u.new_element, t.def.row_granularity, t.def.name);
        if (has_transaction(t.def.row_kind)) {
          Row closed = t.rows[idx]; // snapshot of the erroneous version
          closed.transaction = closed_from(*closed.transaction);
          closed.cause = TerminationCause::Correction;
          Row correctedRow = t.rows[idx];
          correctedRow.valid = corrected;
          correctedRow.transaction = open_tx();
          t.rows[idx] = std::move(closed);
          t.rows.push_back(std::move(correctedRow));
          r.entries_closed++;
          r.entries_created++;
        } else {
          t.rows[idx].valid = corrected; // destructive on valid-only rows
        }
      }
      return r;
    }

    int c = t.def.column_index(u.column);
    if (c < 0) fail(Errc::UnknownColumn, "unknown column " + u.column);
    const ColumnDef &cd = t.def.columns[c];
    if (!has_valid(cd.kind))
      fail(Errc::NoMatchingEntry, u.column + " carries no valid timestamps; use SET");

    for (size_t idx : targets) {
      Row &row = t.rows[idx];
      r.rows_matched++;
      // locate the corrected entry among open entries
      std::vector<size_t> hits;
      for (size_t i = 0; i < row.cells[c].size(); i++) {
        const VersionedEntry &e = row.cells[c][i];
        if (!e.open() || !e.valid) continue;
        if (u.target_element) {
          TemporalElement target = fit_element(*u.target_element, cd.valid_granularity, cd.name);
          if (*e.valid == target) hits.push_back(i);
        } else if (u.target_value) {
          Value tv = eval_on_row(u.target_value, t, row);
          if (cmp_eq(e.value, tv)) hits.push_back(i);
        } else {
          if (e.valid->contains(today_at(cd.valid_granularity))) hits.push_back(i);
        }
      }
      if (hits.empty())
        fail(Errc::NoMatchingEntry, "no entry of " + cd.name + " matches the correction target");
      if (hits.size() > 1)
        fail(Errc::AmbiguousTarget, "correction target matches " + std::to_string(hits.size()) +
                                        " entries of " + cd.name);
      size_t ei = hits[0];
      Value newValue =
          u.new_value ? eval_on_row(u.new_value, t, row) : row.cells[c][ei].value;
      if (!newValue.is_null()) newValue = newValue.coerce(cd.type);
      std::optional<TemporalElement> newElem =
          u.new_element ? std::optional<TemporalElement>(
                              fit_element(*u.new_element, cd.valid_granularity, cd.name))
                        : std::optional<TemporalElement>(*row.cells[c][ei].valid);
      bool deletion = u.new_value && u.new_value->kind == Expr::Kind::Literal &&
                      u.new_value->literal.is_null();

      if (has_transaction(cd.kind)) {
        VersionedEntry &old = row.cells[c][ei];
        old.transaction = closed_from(*old.transaction);
        old.cause = TerminationCause::Correction;
        r.entries_closed++;
        if (!deletion) {
          VersionedEntry e;
          e.value = newValue;
          e.valid = newElem;
          e.transaction = open_tx();
          if (cd.multiplicity == 1 && !disjoint_from_open(t, row, c, *e.valid))
            fail(Errc::OverlappingValidTime,
                 "corrected timestamp overlaps another value of " + cd.name);
          check_foreign_key(cd, e.value, e.valid);
          row.cells[c].push_back(std::move(e));
          r.entries_created++;
        }
      } else {
        if (deletion) {
          row.cells[c].erase(row.cells[c].begin() + static_cast<long>(ei));
          r.entries_removed++;
        } else {
          VersionedEntry &e = row.cells[c][ei];
          e.value = newValue;
          e.valid = newElem;
          if (cd.multiplicity == 1 && !disjoint_from_open(t, row, c, *e.valid, &e))
            fail(Errc::OverlappingValidTime,
                 "corrected timestamp overlaps another value of " + cd.name);
          check_foreign_key(cd, e.value, e.valid);
        }
      }
    }
    return r;
  }

  MutationReport run(const ast::Delete &d) {
    MutationReport r;
    r.kind = "DELETE";
    std::set<std::pair<std::string, std::string>> visiting;
    delete_rows(d.table, d.where, r, visiting);
    return r;
  }

  void delete_rows(const std::string &tableName, const ExprPtr &where, MutationReport &r,
                   std::set<std::pair<std::string, std::string>> &visiting) {
    Table &t = db_.table(tableName);
    std::vector<size_t> targets = matched_rows(t, where);
    // take keys first; referential actions may reshuffle rows
    std::vector<Value> keys;
    for (size_t idx : targets) keys.push_back(t.key_of(t.rows[idx]));
    for (const Value &key : keys) {
      auto tag = std::make_pair(tableName, key.to_string());
      if (visiting.count(tag)) continue;
      visiting.insert(tag);
      delete_one(t, key, r, visiting);
    }
    r.rows_matched += static_cast<int>(keys.size());
  }

  void delete_one(Table &t, const Value &key, MutationReport &r,
                  std::set<std::pair<std::string, std::string>> &visiting) {
    // settle details before touching the master
    for (const auto &link : db_.links_to(t.def.name)) {
      Table &detail = db_.table(link.table);
      int lc = detail.def.column_index(link.column);
      const ColumnDef &cd = detail.def.columns[lc];
      ReferentialAction action = cd.references->on_delete;
      std::vector<Value> detailKeys;
      for (Row &dr : detail.rows) {
        if (!row_current(detail.def, dr, today_)) continue;
        bool linked = false;
        for (const VersionedEntry *e : current_entries(cd, dr.cells[lc], today_))
          if (cmp_eq(e->value, key)) linked = true;
        if (!linked) continue;
        switch (action) {
        case ReferentialAction::Restrict:
          fail(Errc::RestrictViolation, "cannot delete " + t.def.name + " row " +
                                            key.to_string() + ": " + link.table +
                                            " rows still reference it");
        case ReferentialAction::Cascade:
          detailKeys.push_back(detail.key_of(dr));
          break;
        case ReferentialAction::CorrectNull:
          for (VersionedEntry &e : dr.cells[lc]) {
            if (!e.open() || !cmp_eq(e.value, key)) continue;
            if (has_transaction(cd.kind)) {
              e.transaction = closed_from(*e.transaction);
              e.cause = TerminationCause::Correction;
              r.entries_closed++;
            } else {
              e.value = Value::null();
            }
          }
          break;
        }
      }
      for (const Value &dk : detailKeys) {
        auto tag = std::make_pair(link.table, dk.to_string());
        if (visiting.count(tag)) continue;
        visiting.insert(tag);
        delete_one(detail, dk, r, visiting);
      }
    }

    for (size_t i = 0; i < t.rows.size(); i++) {
      Row &row = t.rows[i];
      if (!row.open() || !cmp_eq(t.key_of(row), key)) continue;
      if (row.transaction) {
        row.transaction = closed_from(*row.transaction);
        row.cause = TerminationCause::Deletion;
        r.entries_closed++;
      } else {
        t.rows.erase(t.rows.begin() + static_cast<long>(i));
        r.entries_removed++;
      }
      return;
    }
  }

  MutationReport run(const ast::Vacuum &v) {
    MutationReport r;
    r.kind = "VACUUM";
    Table &t = db_.table(v.table);
    std::vector<int> cols;
    for (const std::string &name : v.columns) {
      int c = t.def.column_index(name);
      if (c < 0) fail(Errc::UnknownColumn, "unknown column " + name);
      if (!has_transaction(t.def.columns[c].kind))
        fail(Errc::VacuumOpenEntry,
             name + " carries no transaction timestamps; its entries are never closed");
      cols.push_back(c);
    }
    if (cols.empty() && !has_transaction(t.def.row_kind)) {
      // without row transaction stamps nothing closes at row level; whole-row
      // vacuuming still reaches closed column entries when such columns exist
      bool anyTx = false;
      for (const ColumnDef &c : t.def.columns) anyTx = anyTx || has_transaction(c.kind);
      if (!anyTx)
        fail(Errc::VacuumOpenEntry,
             t.def.name + " carries no transaction timestamps; nothing is ever closed");
    }
    std::vector<size_t> targets = matched_rows(t, v.where, /*include_closed=*/true);
    r.rows_matched = static_cast<int>(targets.size());
    std::vector<size_t> removeRows;
    for (size_t idx : targets) {
      Row &row = t.rows[idx];
      if (cols.empty()) {
        if (!row.open()) {
          removeRows.push_back(idx);
          continue;
        }
        for (auto &cell : row.cells) vacuum_cell(cell, r);
      } else {
        for (int c : cols) vacuum_cell(row.cells[c], r);
      }
    }
    for (auto it = removeRows.rbegin(); it != removeRows.rend(); ++it) {
      t.rows.erase(t.rows.begin() + static_cast<long>(*it));
      r.entries_removed++;
    }
    return r;
  }

  void vacuum_cell(std::vector<VersionedEntry> &cell, MutationReport &r) {
    auto it = std::remove_if(cell.begin(), cell.end(),
                             [](const VersionedEntry &e) { return !e.open(); });
    r.entries_removed += static_cast<int>(std::distance(it, cell.end()));
    cell.erase(it, cell.end());
  }

  // --- automatic vacuuming ----------------------------------------------------

  void auto_vacuum(MutationReport &r) {
    for (const std::string &name : db_.table_names()) {
      Table &t = *db_.find_table(name);
      // column-level bounds
      for (size_t c = 0; c < t.def.columns.size(); c++) {
        const ColumnDef &cd = t.def.columns[c];
        if (!cd.vacuum_keep && !cd.vacuum_lifecycle) continue;
        for (Row &row : t.rows) trim_cell(row.cells[c], cd.vacuum_keep, cd.vacuum_lifecycle, r);
      }
      // table-level bounds on closed row versions, per key
      if (t.def.vacuum_keep || t.def.vacuum_lifecycle) {
        std::map<std::string, std::vector<size_t>> closedByKey;
        for (size_t i = 0; i < t.rows.size(); i++)
          if (!t.rows[i].open()) closedByKey[t.key_of(t.rows[i]).to_string()].push_back(i);
        std::vector<size_t> remove;
        for (auto &[key, idxs] : closedByKey) {
          std::sort(idxs.begin(), idxs.end(), [&](size_t a, size_t b) {
            return Instant::compare(t.rows[a].transaction->end_instant(),
                                    t.rows[b].transaction->end_instant()) < 0;
          });
          size_t keep = t.def.vacuum_keep ? static_cast<size_t>(*t.def.vacuum_keep) : idxs.size();
          size_t drop = idxs.size() > keep ? idxs.size() - keep : 0;
          for (size_t i = 0; i < idxs.size(); i++) {
            bool tooMany = i < drop;
            bool tooOld = false;
            if (t.def.vacuum_lifecycle) {
              Instant cutoff = clock_; // entries older than clock - lifecycle
              Instant end = t.rows[idxs[i]].transaction->end_instant();
              Duration life = *t.def.vacuum_lifecycle;
              Instant limit = end; // end + lifecycle < clock → too old
              (void)limit;
              TemporalElement span = TemporalElement::of(
                  Period::closed(end, cutoff, Granularity::Second));
              tooOld = duration_of(span, life.scale, cutoff).count > life.count;
            }
            if (tooMany || tooOld) remove.push_back(idxs[i]);
          }
        }
        std::sort(remove.begin(), remove.end());
        for (auto it = remove.rbegin(); it != remove.rend(); ++it) {
          t.rows.erase(t.rows.begin() + static_cast<long>(*it));
          r.entries_removed++;
        }
      }
    }
  }

  void trim_cell(std::vector<VersionedEntry> &cell, std::optional<int> keep,
                 std::optional<Duration> lifecycle, MutationReport &r) {
    std::vector<size_t> closed;
    for (size_t i = 0; i < cell.size(); i++)
      if (!cell[i].open()) closed.push_back(i);
    std::sort(closed.begin(), closed.end(), [&](size_t a, size_t b) {
      return Instant::compare(cell[a].transaction->end_instant(),
                              cell[b].transaction->end_instant()) < 0;
    });
    std::vector<size_t> remove;
    size_t cap = keep ? static_cast<size_t>(*keep) : closed.size();
    size_t drop = closed.size() > cap ? closed.size() - cap : 0;
    for (size_t i = 0; i < closed.size(); i++) {
      bool tooMany = i < drop;
      bool tooOld = false;
      if (lifecycle) {
        Instant end = cell[closed[i]].transaction->end_instant();
        TemporalElement span =
            TemporalElement::of(Period::closed(end, clock_, Granularity::Second));
        tooOld = duration_of(span, lifecycle->scale, clock_).count > lifecycle->count;
      }
      if (tooMany || tooOld) remove.push_back(closed[i]);
    }
    std::sort(remove.begin(), remove.end());
    for (auto it = remove.rbegin(); it != remove.rend(); ++it) {
      cell.erase(cell.begin() + static_cast<long>(*it));
      r.entries_removed++;
    }
  }

  static bool cmp_eq(const Value &a, const Value &b) {
    auto c = Value::compare(a, b);
    return c.has_value() && *c == 0;
  }
};

} // namespace

MutationReport execute_mutation(Database &db, const ast::Statement &stmt, const Instant &clock,
                                const Instant &today) {
  Mutator m(db, clock, today);
  return m.exec(stmt);
}

} // namespace chronoql
