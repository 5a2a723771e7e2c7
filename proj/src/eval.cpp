#include "chronoql/eval.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <set>

namespace chronoql {

using namespace ast;

const Value &Cell::scalar() const {
  static const Value kNull;
  if (parts.empty()) return kNull;
  if (parts.size() > 1) fail(Errc::TypeMismatch, "expected a scalar value, got a history");
  return parts[0].value;
}

namespace {

// Entries of a column ordered for the valid dimension: open-transaction
// versions sorted by valid begin, then transaction begin, then value (the
// deterministic tie rule for FIRST/LAST).
std::vector<const VersionedEntry *> valid_candidates(const std::vector<VersionedEntry> &cell) {
  std::vector<const VersionedEntry *> out;
  for (const VersionedEntry &e : cell)
    if (e.open()) out.push_back(&e);
  std::stable_sort(out.begin(), out.end(), [](const VersionedEntry *a, const VersionedEntry *b) {
    if (a->valid && b->valid && !a->valid->empty() && !b->valid->empty()) {
      int c = Instant::compare(a->valid->first_begin(), b->valid->first_begin());
      if (c != 0) return c < 0;
    }
    if (a->transaction && b->transaction) {
      int c = Instant::compare(a->transaction->begin_instant(), b->transaction->begin_instant());
      if (c != 0) return c < 0;
    }
    auto c = Value::compare(a->value, b->value);
    return c.has_value() && *c < 0;
  });
  return out;
}

// All entries (open and closed) ordered by transaction begin.
std::vector<const VersionedEntry *> tx_candidates(const std::vector<VersionedEntry> &cell) {
  std::vector<const VersionedEntry *> out;
  for (const VersionedEntry &e : cell) out.push_back(&e);
  std::stable_sort(out.begin(), out.end(), [](const VersionedEntry *a, const VersionedEntry *b) {
    if (a->transaction && b->transaction)
      return Instant::compare(a->transaction->begin_instant(), b->transaction->begin_instant()) < 0;
    return false;
  });
  return out;
}

TemporalElement tx_as_element(const Period &p) { return TemporalElement::of(p); }

// The element a temporal operator works on. T-only columns fall back to
// their transaction period in the valid dimension (the only stamp they
// carry).
std::optional<TemporalElement> op_element(const VersionedEntry &e, Dimension dim) {
  if (dim == Dimension::Transaction)
    return e.transaction ? std::optional<TemporalElement>(tx_as_element(*e.transaction))
                         : std::nullopt;
  if (e.valid) return *e.valid;
  if (e.transaction) return tx_as_element(*e.transaction);
  return std::nullopt;
}

std::string initcap(const std::string &s) {
  std::string out;
  bool boundary = true;
  for (char c : s) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      out.push_back(static_cast<char>(boundary ? std::toupper(static_cast<unsigned char>(c))
                                               : std::tolower(static_cast<unsigned char>(c))));
      boundary = false;
    } else {
      out.push_back(c);
      boundary = true;
    }
  }
  return out;
}

std::string to_upper_str(const std::string &s) {
  std::string out;
  for (char c : s) out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  return out;
}

Value apply_scalar_fn(const std::string &name, const Value &arg) {
  std::string fn = to_upper_str(name);
  if (fn == "INITCAP") {
    if (arg.is_null()) return arg;
    return Value::text(initcap(arg.is_text() ? arg.as_text() : arg.to_string()));
  }
  if (fn == "UPPER") {
    if (arg.is_null()) return arg;
    return Value::text(to_upper_str(arg.is_text() ? arg.as_text() : arg.to_string()));
  }
  fail(Errc::UnknownColumn, "unknown function " + name);
}

// Comparison that coerces text to instants when the other side is a date.
std::optional<int> compare_values(const Value &a, const Value &b) {
  if (a.is_date() && b.is_text()) {
    try {
      return Instant::compare(a.as_date(), Instant::parse(b.as_text()));
    } catch (...) {
      return std::nullopt;
    }
  }
  if (a.is_text() && b.is_date()) {
    try {
      return Instant::compare(Instant::parse(a.as_text()), b.as_date());
    } catch (...) {
      return std::nullopt;
    }
  }
  return Value::compare(a, b);
}

bool cmp_holds(BinOp op, const Value &a, const Value &b) {
  if (a.is_null() || b.is_null()) return false;
  auto c = compare_values(a, b);
  if (!c) return false;
  switch (op) {
  case BinOp::Eq: return *c == 0;
  case BinOp::Ne: return *c != 0;
  case BinOp::Lt: return *c < 0;
  case BinOp::Le: return *c <= 0;
  case BinOp::Gt: return *c > 0;
  case BinOp::Ge: return *c >= 0;
  default: return false;
  }
}

bool is_cmp(BinOp op) {
  return op == BinOp::Eq || op == BinOp::Ne || op == BinOp::Lt || op == BinOp::Le ||
         op == BinOp::Gt || op == BinOp::Ge;
}

// Calendar-aware instant shift: fine scales use plain index math, coarse
// scales (years, months) shift the calendar fields.
Instant shift_instant(const Instant &i, const Duration &d, int sign) {
  Granularity g = i.granularity();
  if (static_cast<int>(d.scale) >= static_cast<int>(g) && !is_grouping_only(d.scale))
    return Instant(d.scale, i.convert(d.scale).index() + sign * d.count);
  Instant::Fields f = i.fields();
  std::int64_t months = static_cast<std::int64_t>(f.year) * 12 + (f.month - 1);
  switch (d.scale) {
  case Granularity::Decade: months += sign * d.count * 120; break;
  case Granularity::Year: months += sign * d.count * 12; break;
  case Granularity::Semester: months += sign * d.count * 6; break;
  case Granularity::Month: months += sign * d.count; break;
  default: break;
  }
  std::int64_t year64 = months >= 0 ? months / 12 : (months - 11) / 12;
  int year = static_cast<int>(year64);
  int month = static_cast<int>(months - year64 * 12) + 1;
  int day = f.day;
  while (day > 1) {
    try {
      return Instant::from_fields(g, year, month, day, f.hour, f.minute, f.second);
    } catch (const Error &) {
      day--;
    }
  }
  return Instant::from_fields(g, year, month, 1, f.hour, f.minute, f.second);
}

bool classify_bitemporal(const VersionedEntry &e, Granularity g, BitempKind kind,
                         const std::optional<Duration> &phase) {
  if (kind == BitempKind::Erroneous) return e.cause == TerminationCause::Correction;
  if (!e.valid || e.valid->empty() || !e.transaction) return false;
  std::int64_t vb = e.valid->first_begin().index();
  std::int64_t tb = e.transaction->begin_instant().truncate(g).index();
  std::int64_t lag = kind == BitempKind::Retroactif ? tb - vb : vb - tb;
  std::int64_t threshold = 0;
  if (phase) {
    // phase expressed at its own scale, compared at the valid granularity
    TemporalElement unit = TemporalElement::of(
        Period::closed(Instant(phase->scale, 0), Instant(phase->scale, phase->count), phase->scale));
    threshold = duration_of(unit, g, Instant(g, 0)).count;
  }
  return lag > threshold;
}

// Buckets a (value, element) list by a grouping scale; open ends resolve at
// the reference. Bucket keys are granule indexes at `scale`.
std::map<std::int64_t, std::vector<std::pair<Value, TemporalElement>>> bucketize(
    const std::vector<std::pair<Value, TemporalElement>> &entries, Granularity scale,
    const Instant &ref) {
  std::map<std::int64_t, std::vector<std::pair<Value, TemporalElement>>> out;
  for (const auto &[v, elemRaw] : entries) {
    TemporalElement elem = elemRaw.resolve_open(ref);
    if (elem.empty()) continue;
    Granularity g = elem.granularity();
    for (const Period &p : elem.periods()) {
      std::int64_t b0 = Instant(g, p.begin_index()).truncate(scale).index();
      std::int64_t b1 = Instant(g, p.end_index() - 1).truncate(scale).index();
      for (std::int64_t k = b0; k <= b1; k++) {
        TemporalElement bucket = TemporalElement::of(
            Period::closed(Instant(scale, k).convert(g), Instant(scale, k + 1).convert(g), g));
        TemporalElement clipped = element_intersect(TemporalElement::of(p), bucket);
        if (!clipped.empty()) out[k].emplace_back(v, clipped);
      }
    }
  }
  return out;
}

} // namespace

// ---------------------------------------------------------------------------
// Contexts

struct Evaluator::Scope {
  std::string binding;
  const Table *table = nullptr;
  const Row *row = nullptr;
  std::optional<TemporalElement> row_elem; // carried (possibly restricted) row-valid element
  std::optional<TemporalElement> row_tx;   // carried (restricted) transaction element
  bool stamped = false;                    // a term exposed the row stamps
  bool termed = false;                     // a temporal term applies to this table
  std::string merged_column;               // natural-join duplicate hidden from *
};

struct Evaluator::JRow {
  std::vector<Scope> scopes;
  std::optional<TemporalElement> combined; // link / cross-product element
  std::optional<Instant> bucket;           // granule replication key (GROUP BY scale)
  std::optional<TemporalElement> bucket_elem;
  // the link entry value a join iterated over, shown instead of the link
  // column's current snapshot
  struct Override {
    int scope;
    int column;
    Value value;
  };
  std::vector<Override> overrides;

  const Value *override_for(int scope, int column) const {
    for (const Override &o : overrides)
      if (o.scope == scope && o.column == column) return &o.value;
    return nullptr;
  }
};

struct Evaluator::Ctx {
  const JRow *row = nullptr;
  std::map<std::string, CellPart> *bindings = nullptr;
  const Ctx *outer = nullptr;
  const std::vector<const JRow *> *group = nullptr; // set while evaluating a group
  std::optional<CellPart> last_bound;               // most recent entry selection
};

// ---------------------------------------------------------------------------
// Entry points

ResultSet Evaluator::eval(const ast::Select &sel) { return eval_select(sel, nullptr); }

ResultSet Evaluator::eval_select(const ast::Select &sel, const Ctx *outer) {
  ResultSet out = eval_core(sel.core, outer);
  for (const auto &part : sel.parts)
    out = temporal_set_op(part.op, out, eval_core(part.core, outer));
  return out;
}

bool Evaluator::row_matches(const ast::ExprPtr &where, const Table &t, const Row &row) {
  if (!where) return true;
  JRow j;
  Scope s;
  s.binding = t.def.name;
  s.table = &t;
  s.row = &row;
  if (row.valid) s.row_elem = row.valid;
  j.scopes.push_back(std::move(s));
  std::map<std::string, CellPart> bindings;
  Ctx ctx{&j, &bindings, nullptr, nullptr, {}};
  return eval_bool(where, ctx);
}

Value Evaluator::scalar(const ast::ExprPtr &expr) {
  std::map<std::string, CellPart> bindings;
  Ctx ctx{nullptr, &bindings, nullptr, nullptr, {}};
  return eval_expr(expr, ctx).scalar();
}

Value Evaluator::scalar_on_row(const ast::ExprPtr &expr, const Table &t, const Row &row) {
  if (!expr) return Value::null();
  JRow j;
  Scope s;
  s.binding = t.def.name;
  s.table = &t;
  s.row = &row;
  if (row.valid) s.row_elem = row.valid;
  j.scopes.push_back(std::move(s));
  std::map<std::string, CellPart> bindings;
  Ctx ctx{&j, &bindings, nullptr, nullptr, {}};
  return eval_expr(expr, ctx).scalar();
}

// ---------------------------------------------------------------------------
// Column resolution

std::optional<Evaluator::ColumnLoc> Evaluator::resolve_column(const std::string &qualifier,
                                                              const std::string &name,
                                                              const Ctx &ctx) const {
  for (const Ctx *c = &ctx; c; c = c->outer) {
    if (!c->row) continue;
    const auto &scopes = c->row->scopes;
    if (!qualifier.empty()) {
      for (size_t i = 0; i < scopes.size(); i++) {
        if (scopes[i].binding == qualifier || scopes[i].table->def.name == qualifier) {
          int col = scopes[i].table->def.column_index(name);
          if (col >= 0) return ColumnLoc{c, static_cast<int>(i), col};
          fail(Errc::UnknownColumn, "no column " + name + " in " + qualifier);
        }
      }
      continue; // qualifier may name an outer scope
    }
    // a bare name may be a table/alias (row-level reference)
    for (size_t i = 0; i < scopes.size(); i++)
      if (scopes[i].binding == name || scopes[i].table->def.name == name)
        return ColumnLoc{c, static_cast<int>(i), -1};
    for (size_t i = 0; i < scopes.size(); i++) {
      int col = scopes[i].table->def.column_index(name);
      if (col >= 0) return ColumnLoc{c, static_cast<int>(i), col};
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// FROM resolution

std::vector<Evaluator::JRow> Evaluator::from_rows(const ast::SelectCore &core, const Ctx *outer) {
  std::vector<JRow> rows;
  const Table &t = db_.table(core.from.table);

  auto push = [&](const Row &r, Scope s) {
    JRow j;
    s.binding = core.from.binding();
    s.table = &t;
    s.row = &r;
    j.scopes.push_back(std::move(s));
    rows.push_back(std::move(j));
  };

  // a windowed join or cross product ranges over all valid rows of its
  // operands; the window then restricts the link/concatenation stamps
  bool windowedJoin = !core.joins.empty() && (core.joins.front().term.has_value() ||
                                              core.joins.front().bitemp.has_value());

  if (!core.from.term) {
    for (const Row &r : t.rows) {
      if (windowedJoin ? !r.open() : !row_current(t.def, r, today_)) continue;
      Scope s;
      if (r.valid) s.row_elem = r.valid;
      push(r, std::move(s));
    }
    return rows;
  }

  WindowSpec w = resolve_term(*core.from.term, core.from.table, outer);
  if (w.dimension == Dimension::Valid) {
    if (!has_valid(t.def.row_kind))
      fail(Errc::TemporalTermOnPlainColumn,
           "table " + t.def.name + " carries no row valid timestamps");
    Instant ref = today_.truncate(t.def.row_granularity);
    for (const Row &r : t.rows) {
      if (!r.open() || !r.valid) continue;
      TemporalElement e = window_restrict(*r.valid, w, ref);
      if (e.empty()) continue;
      Scope s;
      s.row_elem = e;
      s.stamped = true;
      s.termed = true;
      push(r, std::move(s));
    }
  } else {
    if (!has_transaction(t.def.row_kind))
      fail(Errc::TemporalTermOnPlainColumn,
           "table " + t.def.name + " carries no row transaction timestamps");
    for (const Row &r : t.rows) {
      if (!r.transaction) continue;
      TemporalElement e = window_restrict(tx_as_element(*r.transaction), w, clock_);
      if (e.empty()) continue;
      Scope s;
      if (r.valid) s.row_elem = r.valid;
      s.row_tx = e;
      s.stamped = true;
      s.termed = true;
      push(r, std::move(s));
    }
  }
  return rows;
}

void Evaluator::apply_join(std::vector<JRow> &rows, const ast::Join &join, const Ctx *outer) {
  const Table &right = db_.table(join.right.table);
  const std::string rightBinding = join.right.alias.empty() ? join.right.table : join.right.alias;
  std::vector<JRow> out;

  if (join.kind == ast::Join::Kind::Cross) {
    WindowSpec w =
        join.term ? resolve_term(*join.term, join.right.table, outer) : WindowSpec::history();
    for (JRow &j : rows) {
      const Scope &left = j.scopes.front();
      TemporalElement leftElem;
      if (j.combined)
        leftElem = *j.combined;
      else if (left.row_elem)
        leftElem = *left.row_elem;
      else
        fail(Errc::NotRowTimestamped,
             "cross product operand " + left.table->def.name + " has no row valid timestamps");
      for (const Row &r : right.rows) {
        if (join.term ? !r.open() : !row_current(right.def, r, today_)) continue;
        if (!r.valid)
          fail(Errc::NotRowTimestamped,
               "cross product operand " + right.def.name + " has no row valid timestamps");
        TemporalElement inter = element_intersect(leftElem, *r.valid);
        if (inter.empty()) continue;
        TemporalElement e = window_restrict(inter, w, today_.truncate(inter.granularity()));
        if (e.empty()) continue;
        JRow copy = j;
        Scope s;
        s.binding = rightBinding;
        s.table = &right;
        s.row = &r;
        s.row_elem = r.valid;
        copy.scopes.push_back(std::move(s));
        copy.combined = e;
        out.push_back(std::move(copy));
      }
    }
    rows = std::move(out);
    return;
  }

  // natural join over a timestamped foreign-key link
  auto link_entries = [&](const ColumnDef &linkCol,
                          const std::vector<VersionedEntry> &cell)
      -> std::vector<std::pair<const VersionedEntry *, TemporalElement>> {
    std::vector<std::pair<const VersionedEntry *, TemporalElement>> found;
    if (join.bitemp) {
      if (!(has_valid(linkCol.kind) && has_transaction(linkCol.kind)))
        fail(Errc::NotBitemporal, "link " + linkCol.name + " is not bitemporal");
      for (const VersionedEntry &e : cell)
        if (classify_bitemporal(e, linkCol.valid_granularity, *join.bitemp, join.phase))
          found.emplace_back(&e, *e.valid);
      return found;
    }
    if (!join.term) {
      Instant ref = today_.truncate(linkCol.valid_granularity);
      for (const VersionedEntry &e : cell) {
        if (!e.open() || e.value.is_null()) continue;
        if (e.valid && !e.valid->contains(ref)) continue;
        auto el = op_element(e, Dimension::Valid);
        if (!el) fail(Errc::NotALink, "link " + linkCol.name + " carries no timestamps");
        found.emplace_back(&e, *el);
      }
      return found;
    }
    WindowSpec w = resolve_term(*join.term, join.right.table, outer);
    Instant ref = today_.truncate(linkCol.valid_granularity);
    for (const VersionedEntry *e : valid_candidates(cell)) {
      if (e->value.is_null()) continue;
      auto el = op_element(*e, Dimension::Valid);
      if (!el) fail(Errc::NotALink, "link " + linkCol.name + " carries no timestamps");
      TemporalElement restricted = window_restrict(*el, w, ref);
      if (!restricted.empty()) found.emplace_back(e, restricted);
    }
    return found;
  };

  for (JRow &j : rows) {
    // Either an in-scope table references the right table (detail on the
    // left) or the right table references an in-scope one.
    const Scope *detailScope = nullptr;
    int linkColumn = -1;
    bool detailLeft = true;
    for (const Scope &s : j.scopes) {
      for (size_t c = 0; c < s.table->def.columns.size() && !detailScope; c++) {
        const auto &fk = s.table->def.columns[c].references;
        if (fk && fk->table == right.def.name) {
          detailScope = &s;
          linkColumn = static_cast<int>(c);
        }
      }
      if (detailScope) break;
    }
    if (!detailScope) {
      for (const Scope &s : j.scopes) {
        for (size_t c = 0; c < right.def.columns.size(); c++) {
          const auto &fk = right.def.columns[c].references;
          if (fk && fk->table == s.table->def.name) {
            detailScope = &s;
            linkColumn = static_cast<int>(c);
            detailLeft = false;
            break;
          }
        }
        if (detailScope) break;
      }
    }
    if (!detailScope)
      fail(Errc::NotALink,
           "no foreign-key link between " + right.def.name + " and the FROM clause");

    if (detailLeft) {
      const ColumnDef &linkCol = detailScope->table->def.columns[linkColumn];
      int ci = linkColumn;
      int detailIndex = static_cast<int>(detailScope - j.scopes.data());
      for (auto &[entry, elem] : link_entries(linkCol, detailScope->row->cells[ci])) {
        const Row *master = right.find_live(entry->value);
        if (!master) continue;
        JRow copy = j;
        Scope s;
        s.binding = rightBinding;
        s.table = &right;
        s.row = master;
        if (master->valid) s.row_elem = master->valid;
        s.merged_column = linkCol.references->column;
        copy.scopes.push_back(std::move(s));
        copy.combined = copy.combined ? element_intersect(*copy.combined, elem) : elem;
        copy.overrides.push_back({detailIndex, ci, entry->value});
        if (join.term || join.bitemp) copy.scopes.front().termed = true;
        out.push_back(std::move(copy));
      }
    } else {
      const ColumnDef &linkCol = right.def.columns[linkColumn];
      const Value &masterKey = detailScope->table->key_of(*detailScope->row);
      bool widened = join.term.has_value() || join.bitemp.has_value();
      for (const Row &dr : right.rows) {
        if (widened ? !dr.open() : !row_current(right.def, dr, today_)) continue;
        for (auto &[entry, elem] : link_entries(linkCol, dr.cells[linkColumn])) {
          if (!(entry->value == masterKey)) continue;
          JRow copy = j;
          Scope s;
          s.binding = rightBinding;
          s.table = &right;
          s.row = &dr;
          if (dr.valid) s.row_elem = dr.valid;
          copy.scopes.push_back(std::move(s));
          copy.combined = copy.combined ? element_intersect(*copy.combined, elem) : elem;
          copy.overrides.push_back(
              {static_cast<int>(copy.scopes.size()) - 1, linkColumn, entry->value});
          out.push_back(std::move(copy));
        }
      }
    }
  }
  rows = std::move(out);
}

// ---------------------------------------------------------------------------
// Window resolution

WindowSpec Evaluator::resolve_term(const ast::Term &term, const std::string &scopeTable,
                                   const Ctx *outer) {
  WindowSpec w;
  w.kind = term.kind;
  w.dimension = term.dim;
  w.d1 = term.d1;
  w.d2 = term.d2;
  if (w.kind == WindowKind::Future && w.dimension == Dimension::Transaction)
    fail(Errc::FutureOnTransaction, "FUTURE can not apply with the transaction-time dimension");

  if (term.subquery) {
    ResultSet rs = eval_select(*term.subquery, outer);
    if (rs.rows.size() != 1 || rs.rows[0].size() != 1)
      fail(Errc::AmbiguousWindow, "subquery window must return one timestamp, got " +
                                      std::to_string(rs.rows.size()) + " rows");
    TemporalElement e;
    for (const CellPart &p : rs.rows[0][0].parts) {
      if (p.valid)
        e = element_union(e, *p.valid);
      else if (p.transaction)
        e = element_union(e, tx_as_element(*p.transaction));
      else
        fail(Errc::AmbiguousWindow, "subquery window did not produce a timestamp");
    }
    w.kind = WindowKind::When;
    w.element = e;
    return w;
  }

  if (term.cond) {
    const Table &t = db_.table(scopeTable);
    TemporalElement e = when_element_global(term.cond, t, outer);
    if (term.kind == WindowKind::When) {
      w.element = e;
      return w;
    }
    if (e.empty()) { // the condition never holds
      w.kind = WindowKind::When;
      w.element = TemporalElement();
      return w;
    }
    if (term.kind == WindowKind::Since || term.kind == WindowKind::Before) {
      w.d1 = e.first_begin();
      return w;
    }
    // AFTER: strictly past the last granule of the condition element
    const Period &last = e.periods().back();
    if (last.open_ended()) {
      w.kind = WindowKind::When;
      w.element = TemporalElement();
      return w;
    }
    w.d1 = Instant(e.granularity(), last.end_index() - 1);
    return w;
  }
  return w;
}

TemporalElement Evaluator::when_element_global(const ast::ExprPtr &cond, const Table &t,
                                               const Ctx *outer) {
  TemporalElement acc;
  for (const Row &r : t.rows) {
    if (!r.open()) continue;
    JRow j;
    Scope s;
    s.binding = t.def.name;
    s.table = &t;
    s.row = &r;
    if (r.valid) s.row_elem = r.valid;
    j.scopes.push_back(std::move(s));
    std::map<std::string, CellPart> bindings;
    Ctx ctx{&j, &bindings, outer, nullptr, {}};
    auto e = cond_element(cond, ctx);
    if (!e) {
      // time-independent truth: the row contributes its whole validity
      if (j.scopes[0].row_elem) acc = element_union(acc, *j.scopes[0].row_elem);
      continue;
    }
    acc = element_union(acc, *e);
  }
  return acc;
}

std::optional<TemporalElement> Evaluator::cond_element(const ast::ExprPtr &cond, Ctx &ctx) {
  const Expr &e = *cond;
  if (e.kind == Expr::Kind::Binary && e.op == BinOp::And) {
    auto a = cond_element(e.args[0], ctx);
    auto b = cond_element(e.args[1], ctx);
    if (!a) return b;
    if (!b) return a;
    return element_intersect(*a, *b);
  }
  if (e.kind == Expr::Kind::Binary && e.op == BinOp::Or) {
    auto a = cond_element(e.args[0], ctx);
    auto b = cond_element(e.args[1], ctx);
    if (!a || !b) return std::nullopt;
    return element_union(*a, *b);
  }
  if (e.kind == Expr::Kind::Binary && is_cmp(e.op)) {
    auto lhs = timestamped_entries(e.args[0], ctx);
    auto rhs = timestamped_entries(e.args[1], ctx);
    if (!lhs && !rhs)
      return eval_bool(cond, ctx) ? std::optional<TemporalElement>()
                                  : std::optional<TemporalElement>(TemporalElement());
    TemporalElement acc;
    if (lhs && rhs) {
      for (const auto &[va, ea] : *lhs)
        for (const auto &[vb, eb] : *rhs)
          if (cmp_holds(e.op, va, vb)) acc = element_union(acc, element_intersect(ea, eb));
      return acc;
    }
    const auto &entries = lhs ? *lhs : *rhs;
    Value other = lhs ? eval_expr(e.args[1], ctx).scalar() : eval_expr(e.args[0], ctx).scalar();
    for (const auto &[v, el] : entries)
      if (lhs ? cmp_holds(e.op, v, other) : cmp_holds(e.op, other, v))
        acc = element_union(acc, el);
    return acc;
  }
  fail(Errc::NonBooleanCondition, "temporal conditions support comparisons combined with AND/OR");
}

std::optional<std::vector<std::pair<Value, TemporalElement>>> Evaluator::timestamped_entries(
    const ast::ExprPtr &side, Ctx &ctx) {
  const Expr *e = side.get();
  std::vector<const Expr *> wrappers;
  while (e->kind == Expr::Kind::FnCall && e->args.size() == 1) {
    wrappers.push_back(e);
    e = e->args[0].get();
  }
  if (e->kind != Expr::Kind::ColumnRef) return std::nullopt;
  auto loc = resolve_column(e->qualifier, e->name, ctx);
  if (!loc || loc->column < 0) return std::nullopt;
  const Scope &s = loc->ctx->row->scopes[loc->scope_index];
  const ColumnDef &cd = s.table->def.columns[loc->column];
  if (!has_valid(cd.kind)) return std::nullopt;
  std::vector<std::pair<Value, TemporalElement>> out;
  for (const VersionedEntry *en : valid_candidates(s.row->cells[loc->column])) {
    if (!en->valid) continue;
    Value v = en->value;
    for (auto it = wrappers.rbegin(); it != wrappers.rend(); ++it)
      v = apply_scalar_fn((*it)->fn_name, v);
    out.emplace_back(std::move(v), *en->valid);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Expression evaluation

bool Evaluator::eval_bool(const ast::ExprPtr &expr, Ctx &ctx) {
  Cell c = eval_expr(expr, ctx);
  if (c.is_null()) return false;
  const Value &v = c.scalar();
  if (v.is_null()) return false;
  if (v.is_integer()) return v.as_integer() != 0;
  if (v.is_decimal()) return v.as_decimal() != 0;
  fail(Errc::NonBooleanCondition, "expected a boolean condition");
}

Cell Evaluator::eval_expr(const ast::ExprPtr &expr, Ctx &ctx) {
  const Expr &e = *expr;
  switch (e.kind) {
  case Expr::Kind::Literal:
    return e.literal.is_null() ? Cell::null() : Cell::plain(e.literal);
  case Expr::Kind::InstantLit:
    return Cell::plain(Value::date(Instant::parse(e.instant_text)));
  case Expr::Kind::DurationLit:
    fail(Errc::TypeMismatch, "a duration is not a value by itself");
  case Expr::Kind::Star:
    fail(Errc::ParseError, "'*' is only legal inside Count()");

  case Expr::Kind::ColumnRef: {
    auto loc = resolve_column(e.qualifier, e.name, ctx);
    if (!loc)
      fail(Errc::UnknownColumn, "unknown column " + (e.qualifier.empty() ? e.name : e.qualifier + "." + e.name));
    const Scope &s = loc->ctx->row->scopes[loc->scope_index];
    if (loc->column < 0) {
      // row-level reference: <table>.V / <table>.T
      if (e.proj == Proj::ValidElement) {
        if (s.row_elem) return Cell::of_element(*s.row_elem);
        if (s.row->valid) return Cell::of_element(*s.row->valid);
        fail(Errc::NoTimestampInScope, e.name + " carries no row valid timestamps");
      }
      if (e.proj == Proj::TransactionStamp) {
        if (!s.row->transaction)
          fail(Errc::NoTimestampInScope, e.name + " carries no row transaction timestamps");
        Cell c;
        c.parts.push_back({Value::null(), {}, *s.row->transaction});
        return c;
      }
      fail(Errc::UnknownColumn, e.name + " names a table, not a value");
    }
    const ColumnDef &cd = s.table->def.columns[loc->column];
    if (e.proj == Proj::Value && loc->ctx->row) {
      if (const Value *ov = loc->ctx->row->override_for(loc->scope_index, loc->column))
        return ov->is_null() ? Cell::null() : Cell::plain(*ov);
    }
    auto current = current_entries(cd, s.row->cells[loc->column], today_);
    if (e.proj == Proj::ValidElement) {
      if (!has_valid(cd.kind))
        fail(Errc::TemporalTermOnPlainColumn, cd.name + " carries no valid timestamps");
      if (current.empty()) return Cell::null();
      return Cell::of_element(*current.front()->valid);
    }
    if (e.proj == Proj::TransactionStamp) {
      if (!has_transaction(cd.kind))
        fail(Errc::TemporalTermOnPlainColumn, cd.name + " carries no transaction timestamps");
      if (current.empty()) return Cell::null();
      Cell c;
      c.parts.push_back({Value::null(), {}, *current.front()->transaction});
      return c;
    }
    Cell c;
    for (const VersionedEntry *en : current)
      if (!en->value.is_null()) c.parts.push_back({en->value, {}, {}});
    if (cd.multiplicity == 1 && c.parts.size() > 1) c.parts.resize(1);
    return c;
  }

  case Expr::Kind::This: {
    for (const Ctx *c = &ctx; c; c = c->outer) {
      if (!c->bindings) continue;
      auto it = c->bindings->find(e.name);
      if (it == c->bindings->end()) continue;
      const CellPart &p = it->second;
      Cell out;
      if (e.proj == Proj::ValidElement) {
        if (!p.valid) fail(Errc::DanglingThis, "THIS " + e.name + " carries no valid timestamp");
        return Cell::of_element(*p.valid);
      }
      if (e.proj == Proj::TransactionStamp) {
        if (!p.transaction)
          fail(Errc::DanglingThis, "THIS " + e.name + " carries no transaction timestamp");
        out.parts.push_back({Value::null(), {}, *p.transaction});
        return out;
      }
      return p.value.is_null() ? Cell::null() : Cell::plain(p.value);
    }
    fail(Errc::DanglingThis, "THIS " + e.name + " is not bound anywhere in the query");
  }

  case Expr::Kind::Unary:
    return Cell::plain(Value::integer(eval_bool(e.args[0], ctx) ? 0 : 1));

  case Expr::Kind::Binary:
    return eval_binary(e, ctx);

  case Expr::Kind::FnCall: {
    std::string fn = to_upper_str(e.fn_name);
    if (fn == "CURRENTDATE") return Cell::plain(Value::date(today_));
    if (fn == "BEGIN" || fn == "END") {
      Cell arg = eval_expr(e.args[0], ctx);
      if (arg.is_null()) return Cell::null();
      TemporalElement elem;
      for (const CellPart &p : arg.parts) {
        if (p.valid) elem = element_union(elem, *p.valid);
        else if (p.transaction) elem = element_union(elem, tx_as_element(*p.transaction));
      }
      if (elem.empty()) return Cell::null();
      if (fn == "BEGIN") return Cell::plain(Value::date(elem.first_begin()));
      const Period &last = elem.periods().back();
      if (last.open_ended()) return Cell::null();
      return Cell::plain(Value::date(last.end_instant()));
    }
    Cell arg = eval_expr(e.args.at(0), ctx);
    if (arg.is_null()) return Cell::null();
    Cell out;
    for (const CellPart &p : arg.parts)
      out.parts.push_back({apply_scalar_fn(e.fn_name, p.value), p.valid, p.transaction});
    return out;
  }

  case Expr::Kind::Aggregate:
    return eval_aggregate_rowless(e, ctx);

  case Expr::Kind::Restrict:
    return eval_restrict(e, ctx);

  case Expr::Kind::ColumnFn:
    return eval_column_fn(e, ctx);

  case Expr::Kind::PredFn:
    return eval_pred_fn(e, ctx);

  case Expr::Kind::Bitemporal:
    return eval_bitemporal(e, ctx);

  case Expr::Kind::InHistory: {
    Value needle = eval_expr(e.args[0], ctx).scalar();
    const Expr *inner = e.args[1].get();
    std::vector<const Expr *> wrappers;
    while (inner->kind == Expr::Kind::FnCall && inner->args.size() == 1) {
      wrappers.push_back(inner);
      inner = inner->args[0].get();
    }
    if (inner->kind != Expr::Kind::ColumnRef)
      fail(Errc::UnknownColumn, "IN HISTORY expects a column");
    auto loc = resolve_column(inner->qualifier, inner->name, ctx);
    if (!loc || loc->column < 0) fail(Errc::UnknownColumn, "unknown column " + inner->name);
    const Scope &s = loc->ctx->row->scopes[loc->scope_index];
    for (const VersionedEntry *en : valid_candidates(s.row->cells[loc->column])) {
      Value v = en->value;
      for (auto it = wrappers.rbegin(); it != wrappers.rend(); ++it)
        v = apply_scalar_fn((*it)->fn_name, v);
      if (cmp_holds(BinOp::Eq, v, needle)) {
        CellPart bound{en->value, en->valid ? *en->valid : TemporalElement(), {}};
        if (en->transaction) bound.transaction = *en->transaction;
        if (!en->valid) bound.valid.reset();
        if (ctx.bindings) {
          (*ctx.bindings)[inner->name] = bound;
          if (!inner->bind_alias.empty()) (*ctx.bindings)[inner->bind_alias] = bound;
        }
        return Cell::plain(Value::integer(1));
      }
    }
    return Cell::plain(Value::integer(0));
  }

  case Expr::Kind::InSelect: {
    Value needle = eval_expr(e.args[0], ctx).scalar();
    ResultSet rs = eval_select(*e.subquery, &ctx);
    for (const auto &row : rs.rows)
      for (const CellPart &p : row.at(0).parts)
        if (cmp_holds(BinOp::Eq, p.value, needle)) return Cell::plain(Value::integer(1));
    return Cell::plain(Value::integer(0));
  }

  case Expr::Kind::Exists: {
    ResultSet rs = eval_select(*e.subquery, &ctx);
    bool some = !rs.rows.empty();
    return Cell::plain(Value::integer(e.negated ? !some : some));
  }

  case Expr::Kind::ScalarSubquery: {
    ResultSet rs = eval_select(*e.subquery, &ctx);
    if (rs.rows.empty()) return Cell::null();
    if (rs.rows.size() > 1 || rs.rows[0].size() != 1)
      fail(Errc::AmbiguousTarget, "scalar subquery returned more than one value");
    return rs.rows[0][0];
  }

  case Expr::Kind::DurationCmp: {
    Cell arg = eval_expr(e.args[0], ctx);
    TemporalElement elem;
    for (const CellPart &p : arg.parts)
      if (p.valid) elem = element_union(elem, *p.valid);
    if (elem.empty()) return Cell::plain(Value::integer(0));
    Instant ref = today_.truncate(elem.granularity());
    Duration d = duration_of(elem, e.duration->scale, ref);
    return Cell::plain(Value::integer(d.count > e.duration->count ? 1 : 0));
  }

  case Expr::Kind::Granule:
    fail(Errc::NoTimestampInScope,
         "a granule-grouped column is only legal as a select item or inside an aggregate");
  }
  fail(Errc::TypeMismatch, "unsupported expression");
}

Cell Evaluator::eval_restrict(const ast::Expr &e, Ctx &ctx) {
  const Expr *inner = e.args[0].get();
  std::vector<const Expr *> wrappers;
  while (inner->kind == Expr::Kind::FnCall && inner->args.size() == 1) {
    wrappers.push_back(inner);
    inner = inner->args[0].get();
  }
  if (inner->kind != Expr::Kind::ColumnRef)
    fail(Errc::TemporalTermOnPlainColumn, "a temporal term applies to a column");
  auto loc = resolve_column(inner->qualifier, inner->name, ctx);
  if (!loc) fail(Errc::UnknownColumn, "unknown column " + inner->name);
  const Scope &s = loc->ctx->row->scopes[loc->scope_index];

  if (loc->column < 0)
    fail(Errc::TemporalTermOnPlainColumn, "a temporal term applies to a column, not a table");
  const ColumnDef &cd = s.table->def.columns[loc->column];
  if (!cd.timestamped())
    fail(Errc::TemporalTermOnPlainColumn, cd.name + " is not a timestamped column");

  const Term &term = *e.term;
  Dimension dim = term.dim;
  if (dim == Dimension::Transaction && !has_transaction(cd.kind))
    fail(Errc::TemporalTermOnPlainColumn, cd.name + " carries no transaction timestamps");
  if (dim == Dimension::Valid && !has_valid(cd.kind) && !has_transaction(cd.kind))
    fail(Errc::TemporalTermOnPlainColumn, cd.name + " carries no timestamps");

  WindowSpec w;
  if (term.kind == WindowKind::When && term.cond) {
    w.kind = WindowKind::When;
    w.dimension = dim;
    auto el = cond_element(term.cond, ctx); // per-row alignment
    if (!el)
      w.kind = WindowKind::History;
    else
      w.element = *el;
  } else if (term.cond) {
    // SINCE/BEFORE/AFTER a condition, aligned within this row
    auto el = cond_element(term.cond, ctx);
    if (!el) {
      w.kind = WindowKind::History;
    } else if (el->empty()) {
      w.kind = WindowKind::When;
      w.element = TemporalElement();
    } else {
      w.dimension = dim;
      if (term.kind == WindowKind::Since || term.kind == WindowKind::Before) {
        w.kind = term.kind;
        w.d1 = el->first_begin();
      } else {
        const Period &last = el->periods().back();
        if (last.open_ended()) {
          w.kind = WindowKind::When;
          w.element = TemporalElement();
        } else {
          w.kind = WindowKind::After;
          w.d1 = Instant(el->granularity(), last.end_index() - 1);
        }
      }
    }
  } else {
    w = resolve_term(term, s.table->def.name, &ctx);
  }

  Instant ref = dim == Dimension::Valid ? today_.truncate(has_valid(cd.kind) ? cd.valid_granularity
                                                                             : Granularity::Second)
                                        : clock_;
  auto candidates =
      dim == Dimension::Valid ? valid_candidates(*&s.row->cells[loc->column])
                              : tx_candidates(s.row->cells[loc->column]);
  Cell out;
  for (const VersionedEntry *en : candidates) {
    auto elem = op_element(*en, dim);
    if (!elem) continue;
    TemporalElement restricted = window_restrict(*elem, w, ref);
    if (restricted.empty()) continue;
    Value v = en->value;
    for (auto it = wrappers.rbegin(); it != wrappers.rend(); ++it)
      v = apply_scalar_fn((*it)->fn_name, v);
    CellPart part{v, {}, {}};
    if (dim == Dimension::Valid)
      part.valid = restricted;
    else if (restricted.periods().size() == 1)
      part.transaction = restricted.periods().front();
    else
      part.valid = restricted;
    out.parts.push_back(std::move(part));
    CellPart bound{en->value, en->valid ? std::optional<TemporalElement>(*en->valid) : std::nullopt,
                   en->transaction};
    ctx.last_bound = bound;
    if (ctx.bindings) {
      (*ctx.bindings)[cd.name] = bound;
      if (!inner->bind_alias.empty()) (*ctx.bindings)[inner->bind_alias] = bound;
    }
  }
  return out;
}

Cell Evaluator::eval_column_fn(const ast::Expr &e, Ctx &ctx) {
  const Expr *inner = e.args[0].get();
  std::vector<const Expr *> wrappers;
  while (inner->kind == Expr::Kind::FnCall && inner->args.size() == 1) {
    wrappers.push_back(inner);
    inner = inner->args[0].get();
  }
  if (inner->kind != Expr::Kind::ColumnRef)
    fail(Errc::UnknownColumn, "a column function applies to a column");
  auto loc = resolve_column(inner->qualifier, inner->name, ctx);
  if (!loc || loc->column < 0) fail(Errc::UnknownColumn, "unknown column " + inner->name);
  const Scope &s = loc->ctx->row->scopes[loc->scope_index];
  const ColumnDef &cd = s.table->def.columns[loc->column];
  if (!cd.timestamped())
    fail(Errc::TemporalTermOnPlainColumn, cd.name + " is not a timestamped column");

  Dimension dim = e.fn_dim.value_or(inner->proj == Proj::TransactionStamp && e.column_fn == ColumnFnKind::Timestamps
                                        ? Dimension::Transaction
                                        : Dimension::Valid);
  bool nextFamily = e.column_fn == ColumnFnKind::Next || e.column_fn == ColumnFnKind::NextScale;
  if (dim == Dimension::Transaction && nextFamily)
    fail(Errc::TransactionDimUnsupported, "NEXT only applies to the valid-time dimension");
  if (dim == Dimension::Transaction && !has_transaction(cd.kind))
    fail(Errc::TemporalTermOnPlainColumn, cd.name + " carries no transaction timestamps");

  auto candidates = dim == Dimension::Valid ? valid_candidates(s.row->cells[loc->column])
                                            : tx_candidates(s.row->cells[loc->column]);

  Instant ref = today_.truncate(has_valid(cd.kind) ? cd.valid_granularity : Granularity::Second);

  auto mapped = [&](const Value &v) {
    Value out = v;
    for (auto it = wrappers.rbegin(); it != wrappers.rend(); ++it)
      out = apply_scalar_fn((*it)->fn_name, out);
    return out;
  };

  auto emit = [&](const VersionedEntry *en) -> Cell {
    if (!en) return Cell::null();
    CellPart bound{en->value, en->valid ? std::optional<TemporalElement>(*en->valid) : std::nullopt,
                   en->transaction};
    ctx.last_bound = bound;
    if (ctx.bindings) (*ctx.bindings)[cd.name] = bound;
    Cell c;
    if (inner->proj == Proj::ValidElement) {
      if (!en->valid) return Cell::null();
      c.parts.push_back({Value::null(), *en->valid, {}});
      return c;
    }
    if (inner->proj == Proj::TransactionStamp) {
      if (!en->transaction) return Cell::null();
      c.parts.push_back({Value::null(), {}, *en->transaction});
      return c;
    }
    CellPart part{mapped(en->value), {}, {}};
    if (dim == Dimension::Valid && en->valid)
      part.valid = *en->valid;
    else if (en->transaction)
      part.transaction = *en->transaction;
    c.parts.push_back(std::move(part));
    return c;
  };

  auto current_index = [&]() -> int {
    for (size_t i = 0; i < candidates.size(); i++) {
      const VersionedEntry *en = candidates[i];
      if (dim == Dimension::Valid) {
        if (en->valid && en->valid->contains(ref)) return static_cast<int>(i);
        if (!en->valid && en->open()) return static_cast<int>(i);
      } else if (en->open()) {
        return static_cast<int>(i);
      }
    }
    return -1;
  };

  auto index_of_value = [&](const Value &v) -> int {
    for (size_t i = 0; i < candidates.size(); i++)
      if (cmp_holds(BinOp::Eq, candidates[i]->value, v)) return static_cast<int>(i);
    return -1;
  };

  switch (e.column_fn) {
  case ColumnFnKind::First:
    return emit(candidates.empty() ? nullptr : candidates.front());
  case ColumnFnKind::Last:
    return emit(candidates.empty() ? nullptr : candidates.back());
  case ColumnFnKind::Previous:
  case ColumnFnKind::Next: {
    int anchor;
    if (e.fn_value) {
      anchor = index_of_value(e.fn_value->literal);
      if (anchor < 0)
        fail(Errc::NoSuchValue, cd.name + " never held " + e.fn_value->literal.to_string());
    } else {
      anchor = current_index();
      if (anchor < 0) fail(Errc::NoCurrentValue, cd.name + " has no current value");
    }
    int target = e.column_fn == ColumnFnKind::Previous ? anchor - 1 : anchor + 1;
    if (target < 0 || target >= static_cast<int>(candidates.size())) return Cell::null();
    return emit(candidates[target]);
  }
  case ColumnFnKind::PreviousScale:
  case ColumnFnKind::NextScale: {
    Instant probe = ref.plus(e.column_fn == ColumnFnKind::PreviousScale ? -1 : 1);
    for (const VersionedEntry *en : candidates)
      if (en->valid && en->valid->contains(probe)) return emit(en);
    return Cell::null();
  }
  case ColumnFnKind::Evolution: {
    int c = current_index();
    if (c < 0 || !candidates[c]->valid) return Cell::null();
    return Cell::plain(Value::date(candidates[c]->valid->first_begin()));
  }
  case ColumnFnKind::EvolutionHistory: {
    Cell out;
    for (const VersionedEntry *en : candidates)
      if (en->valid && !en->valid->empty())
        out.parts.push_back({Value::date(en->valid->first_begin()), {}, {}});
    return out;
  }
  case ColumnFnKind::FirstEvolution:
  case ColumnFnKind::LastEvolution: {
    std::vector<Instant> begins;
    for (const VersionedEntry *en : candidates)
      if (en->valid && !en->valid->empty()) begins.push_back(en->valid->first_begin());
    if (begins.empty()) return Cell::null();
    return Cell::plain(Value::date(e.column_fn == ColumnFnKind::FirstEvolution ? begins.front()
                                                                               : begins.back()));
  }
  case ColumnFnKind::EvolutionFromTo: {
    for (size_t i = 0; i + 1 < candidates.size(); i++) {
      if (cmp_holds(BinOp::Eq, candidates[i]->value, Value::text(e.evo_from)) &&
          cmp_holds(BinOp::Eq, candidates[i + 1]->value, Value::text(e.evo_to)) &&
          candidates[i + 1]->valid)
        return Cell::plain(Value::date(candidates[i + 1]->valid->first_begin()));
    }
    fail(Errc::NoSuchValue,
         cd.name + " never evolved from '" + e.evo_from + "' to '" + e.evo_to + "'");
  }
  case ColumnFnKind::Timestamps: {
    bool txProj = inner->proj == Proj::TransactionStamp || dim == Dimension::Transaction;
    TemporalElement acc;
    Cell txOut;
    bool found = false;
    for (const VersionedEntry *en : candidates) {
      if (!cmp_holds(BinOp::Eq, en->value, e.fn_value->literal)) continue;
      found = true;
      if (txProj) {
        if (en->transaction) txOut.parts.push_back({Value::null(), {}, *en->transaction});
      } else if (en->valid) {
        acc = element_union(acc, *en->valid);
      }
    }
    if (!found)
      fail(Errc::NoSuchValue, cd.name + " never held " + e.fn_value->literal.to_string());
    if (txProj) return txOut;
    return Cell::of_element(acc);
  }
  }
  fail(Errc::TypeMismatch, "unsupported column function");
}

Cell Evaluator::eval_pred_fn(const ast::Expr &e, Ctx &ctx) {
  const Expr *inner = e.args[0].get();
  if (inner->kind != Expr::Kind::ColumnRef)
    fail(Errc::UnknownColumn, "a predicate function applies to a column");
  auto loc = resolve_column(inner->qualifier, inner->name, ctx);
  if (!loc || loc->column < 0) fail(Errc::UnknownColumn, "unknown column " + inner->name);
  const Scope &s = loc->ctx->row->scopes[loc->scope_index];
  const ColumnDef &cd = s.table->def.columns[loc->column];
  auto candidates = valid_candidates(s.row->cells[loc->column]);
  Instant ref = today_.truncate(has_valid(cd.kind) ? cd.valid_granularity : Granularity::Second);

  if (e.pred_fn == PredFnKind::Always || e.pred_fn == PredFnKind::AnytimePast) {
    Value rhs = eval_expr(e.args[1], ctx).scalar();
    std::optional<TemporalElement> when;
    if (e.term && e.term->cond) when = cond_element(e.term->cond, ctx);
    bool anyInScope = false, all = true, some = false;
    for (const VersionedEntry *en : candidates) {
      auto elem = op_element(*en, Dimension::Valid);
      if (!elem) {
        // plain value: in scope unconditionally
        anyInScope = true;
        bool ok = cmp_holds(e.op, en->value, rhs);
        all = all && ok;
        some = some || ok;
        continue;
      }
      TemporalElement scopeElem = *elem;
      if (when) scopeElem = element_intersect(scopeElem, *when);
      if (e.pred_fn == PredFnKind::AnytimePast) {
        WindowSpec past{WindowKind::Past, Dimension::Valid, {}, {}, {}};
        scopeElem = window_restrict(scopeElem, past, ref);
      }
      if (scopeElem.empty()) continue;
      anyInScope = true;
      bool ok = cmp_holds(e.op, en->value, rhs);
      all = all && ok;
      some = some || ok;
    }
    bool result;
    if (e.pred_fn == PredFnKind::Always)
      // an attached WHEN window asks about a concrete period, which must
      // exist; the unwindowed form is vacuously true on empty history
      result = when ? (anyInScope && all) : all;
    else
      result = anyInScope && some;
    return Cell::plain(Value::integer(result ? 1 : 0));
  }

  // INCREASE / FIRST INCREASE / DECREASE
  std::vector<Value> values;
  for (const VersionedEntry *en : candidates) values.push_back(en->value);
  for (const Value &v : values)
    if (v.is_text())
      fail(Errc::NonComparableType, cd.name + " holds text; INCREASE/DECREASE need an ordered type");
  if (values.size() < 2) return Cell::plain(Value::integer(0));
  bool result;
  if (e.pred_fn == PredFnKind::FirstIncrease) {
    auto c = compare_values(values[0], values[1]);
    result = c && *c < 0;
  } else {
    result = true;
    for (size_t i = 0; i + 1 < values.size(); i++) {
      auto c = compare_values(values[i], values[i + 1]);
      bool ok = c && (e.pred_fn == PredFnKind::Increase ? *c < 0 : *c > 0);
      if (!ok) {
        result = false;
        break;
      }
    }
  }
  return Cell::plain(Value::integer(result ? 1 : 0));
}

Cell Evaluator::eval_bitemporal(const ast::Expr &e, Ctx &ctx) {
  const Expr *inner = e.args[0].get();
  if (inner->kind != Expr::Kind::ColumnRef)
    fail(Errc::UnknownColumn, "a bitemporal selector applies to a column");
  auto loc = resolve_column(inner->qualifier, inner->name, ctx);
  if (!loc || loc->column < 0) fail(Errc::UnknownColumn, "unknown column " + inner->name);
  const Scope &s = loc->ctx->row->scopes[loc->scope_index];
  const ColumnDef &cd = s.table->def.columns[loc->column];
  if (cd.kind != TemporalKind::VT)
    fail(Errc::NotBitemporal, cd.name + " is not a bitemporal column");
  Cell out;
  for (const VersionedEntry *en : tx_candidates(s.row->cells[loc->column]))
    if (classify_bitemporal(*en, cd.valid_granularity, e.bitemp, e.duration))
      out.parts.push_back({en->value, en->valid, en->transaction});
  return out;
}

Cell Evaluator::eval_binary(const ast::Expr &e, Ctx &ctx) {
  if (e.op == BinOp::And || e.op == BinOp::Or) {
    bool a = eval_bool(e.args[0], ctx);
    if (e.op == BinOp::And && !a) return Cell::plain(Value::integer(0));
    if (e.op == BinOp::Or && a) return Cell::plain(Value::integer(1));
    return Cell::plain(Value::integer(eval_bool(e.args[1], ctx) ? 1 : 0));
  }

  // date arithmetic with duration literals
  if (e.op == BinOp::Add || e.op == BinOp::Sub) {
    bool rhsDur = e.args[1]->kind == Expr::Kind::DurationLit;
    bool lhsDur = e.args[0]->kind == Expr::Kind::DurationLit;
    if (rhsDur || lhsDur) {
      if (lhsDur && e.op == BinOp::Sub)
        fail(Errc::TypeMismatch, "cannot subtract an instant from a duration");
      const ExprPtr &datePart = rhsDur ? e.args[0] : e.args[1];
      const Duration &d = *(rhsDur ? e.args[1] : e.args[0])->duration;
      Value v = eval_expr(datePart, ctx).scalar();
      if (v.is_null()) return Cell::null();
      Instant base = v.is_date() ? v.as_date() : Instant::parse(v.to_string());
      return Cell::plain(Value::date(shift_instant(base, d, e.op == BinOp::Add ? 1 : -1)));
    }
  }

  if (is_cmp(e.op)) {
    Cell a = eval_expr(e.args[0], ctx);
    Cell b = eval_expr(e.args[1], ctx);
    if (a.is_null() || b.is_null()) return Cell::plain(Value::integer(0));
    return Cell::plain(Value::integer(cmp_holds(e.op, a.scalar(), b.scalar()) ? 1 : 0));
  }

  // arithmetic; a bare timestamped column under a termed table contributes
  // its whole history (the temporal version of the operator)
  auto operand = [&](const ExprPtr &x) -> Cell {
    if (x->kind == Expr::Kind::ColumnRef && x->proj == Proj::Value) {
      auto loc = resolve_column(x->qualifier, x->name, ctx);
      if (loc && loc->column >= 0) {
        const Scope &s = loc->ctx->row->scopes[loc->scope_index];
        const ColumnDef &cd = s.table->def.columns[loc->column];
        if (cd.timestamped() && s.termed) {
          // T-only columns historize through their transaction stamps, so
          // closed entries belong to their history too
          auto entries = has_valid(cd.kind) ? valid_candidates(s.row->cells[loc->column])
                                            : tx_candidates(s.row->cells[loc->column]);
          Cell c;
          for (const VersionedEntry *en : entries) {
            auto elem = op_element(*en, Dimension::Valid);
            if (elem) c.parts.push_back({en->value, *elem, {}});
          }
          return c;
        }
      }
    }
    return eval_expr(x, ctx);
  };

  Cell a = operand(e.args[0]);
  Cell b = operand(e.args[1]);

  auto apply = [&](const Value &x, const Value &y) -> Value {
    if (x.is_null() || y.is_null()) return Value::null();
    if (!x.is_numeric() || !y.is_numeric())
      fail(Errc::TypeMismatch, "arithmetic needs numeric operands");
    double l = x.numeric(), r = y.numeric();
    double res;
    switch (e.op) {
    case BinOp::Add: res = l + r; break;
    case BinOp::Sub: res = l - r; break;
    case BinOp::Mul: res = l * r; break;
    case BinOp::Div:
      if (r == 0) fail(Errc::DivisionByZero, "division by zero");
      res = l / r;
      break;
    default: res = 0;
    }
    if (x.is_integer() && y.is_integer() && e.op != BinOp::Div)
      return Value::integer(static_cast<std::int64_t>(res));
    if (x.is_integer() && y.is_integer() && res == static_cast<std::int64_t>(res))
      return Value::integer(static_cast<std::int64_t>(res));
    return Value::decimal(res);
  };

  auto temporal = [](const Cell &c) {
    if (c.parts.size() > 1) return true;
    return !c.parts.empty() && c.parts[0].valid.has_value();
  };

  if (!temporal(a) && !temporal(b)) {
    if (a.is_null() || b.is_null()) return Cell::null();
    return Cell::plain(apply(a.scalar(), b.scalar()));
  }

  // pair entries on common timestamps
  Cell out;
  auto partsOf = [](const Cell &c) {
    std::vector<CellPart> ps = c.parts;
    if (ps.empty()) ps.push_back({Value::null(), {}, {}});
    return ps;
  };
  for (const CellPart &pa : partsOf(a)) {
    for (const CellPart &pb : partsOf(b)) {
      if (pa.valid && pb.valid) {
        TemporalElement inter = element_intersect(*pa.valid, *pb.valid);
        if (inter.empty()) continue;
        out.parts.push_back({apply(pa.value, pb.value), inter, {}});
      } else {
        const std::optional<TemporalElement> &stamp = pa.valid ? pa.valid : pb.valid;
        Value v = apply(pa.value, pb.value);
        if (v.is_null()) continue;
        out.parts.push_back({v, stamp, {}});
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Aggregates and grouping

namespace {

// Locates the column and optional temporal term inside an aggregate
// argument: Max(HISTORY Budget) / Count(Status) / Sum(HISTORY Budget).
struct AggArg {
  const Expr *column = nullptr;           // ColumnRef
  const Expr *restrict_node = nullptr;    // Restrict wrapper, when present
};

std::optional<AggArg> analyze_agg_arg(const ExprPtr &arg) {
  AggArg out;
  const Expr *e = arg.get();
  if (e->kind == Expr::Kind::Restrict) {
    out.restrict_node = e;
    e = e->args[0].get();
  }
  while (e->kind == Expr::Kind::FnCall && e->args.size() == 1) e = e->args[0].get();
  if (e->kind != Expr::Kind::ColumnRef) return std::nullopt;
  out.column = e;
  return out;
}

} // namespace

Cell Evaluator::eval_aggregate_rowless(const ast::Expr &e, Ctx &ctx) {
  if (!ctx.group)
    fail(Errc::NoTimestampInScope, "aggregates need a FROM scope");
  const std::vector<const JRow *> &rows = *ctx.group;

  std::string fn = to_upper_str(e.fn_name);
  if (e.star) {
    if (fn != "COUNT") fail(Errc::NonNumericAggregate, "only Count(*) takes '*'");
    return Cell::plain(Value::integer(static_cast<std::int64_t>(rows.size())));
  }

  // collect the values the aggregate ranges over
  std::vector<Value> values;
  auto arg = analyze_agg_arg(e.args[0]);
  for (const JRow *r : rows) {
    Ctx rowCtx{r, ctx.bindings, ctx.outer, nullptr, {}};
    if (arg) {
      Cell c = arg->restrict_node ? eval_expr(e.args[0], rowCtx) : eval_expr(e.args[0], rowCtx);
      for (const CellPart &p : c.parts)
        if (!p.value.is_null()) values.push_back(p.value);
    } else {
      Cell c = eval_expr(e.args[0], rowCtx);
      for (const CellPart &p : c.parts)
        if (!p.value.is_null()) values.push_back(p.value);
    }
  }

  if (fn == "COUNT") return Cell::plain(Value::integer(static_cast<std::int64_t>(values.size())));
  if (values.empty()) return Cell::null();
  if (fn == "SUM" || fn == "AVG") {
    double total = 0;
    bool allInt = true;
    for (const Value &v : values) {
      if (!v.is_numeric())
        fail(Errc::NonNumericAggregate, fn + " needs numeric values");
      allInt = allInt && v.is_integer();
      total += v.numeric();
    }
    if (fn == "AVG") return Cell::plain(Value::decimal(total / static_cast<double>(values.size())));
    if (allInt) return Cell::plain(Value::integer(static_cast<std::int64_t>(total)));
    return Cell::plain(Value::decimal(total));
  }
  // MIN / MAX
  const Value *best = &values[0];
  for (const Value &v : values) {
    auto c = compare_values(v, *best);
    if (!c) fail(Errc::NonComparableType, fn + " over mixed value types");
    if ((fn == "MIN" && *c < 0) || (fn == "MAX" && *c > 0)) best = &v;
  }
  return Cell::plain(*best);
}

// ---------------------------------------------------------------------------
// SELECT core

namespace {

bool contains_aggregate(const ExprPtr &e) {
  if (!e) return false;
  if (e->kind == Expr::Kind::Aggregate) return true;
  for (const ExprPtr &a : e->args)
    if (contains_aggregate(a)) return true;
  return false;
}

// The one select item that expands groups into granule buckets (an
// aggregate with a scale, or a bare granule-grouped column).
int scale_item_index(const std::vector<SelectItem> &items) {
  for (size_t i = 0; i < items.size(); i++) {
    const Expr &e = *items[i].expr;
    if (e.kind == Expr::Kind::Granule) return static_cast<int>(i);
    if (e.kind == Expr::Kind::Aggregate && e.scale) return static_cast<int>(i);
  }
  return -1;
}

std::string item_header(const SelectItem &item) {
  if (!item.alias.empty()) return item.alias;
  return pretty_print(item.expr);
}

} // namespace

ResultSet Evaluator::eval_core(const ast::SelectCore &core, const Ctx *outer) {
  std::vector<JRow> rows = from_rows(core, outer);
  for (const ast::Join &join : core.joins) apply_join(rows, join, outer);

  // WHERE, keeping the per-row THIS bindings for the select list
  std::vector<std::map<std::string, CellPart>> bindingStore;
  bindingStore.reserve(rows.size());
  std::vector<JRow> kept;
  std::vector<std::map<std::string, CellPart>> keptBindings;
  for (JRow &r : rows) {
    std::map<std::string, CellPart> bindings;
    Ctx ctx{&r, &bindings, outer, nullptr, {}};
    if (core.where && !eval_bool(core.where, ctx)) continue;
    kept.push_back(std::move(r));
    keptBindings.push_back(std::move(bindings));
  }

  bool hasAgg = core.having != nullptr;
  for (const auto &item : core.items) hasAgg = hasAgg || contains_aggregate(item.expr);
  int scaleItem = scale_item_index(core.items);
  bool grouped = hasAgg || !core.group_by.empty() || core.group_scale.has_value();

  ResultSet out;

  // headers
  auto star_headers = [&](const JRow &sample) {
    for (const Scope &s : sample.scopes) {
      for (const ColumnDef &c : s.table->def.columns) {
        if (!s.merged_column.empty() && c.name == s.merged_column) continue;
        out.headers.push_back(c.name);
      }
    }
    bool anyStamp = sample.combined.has_value();
    bool anyTx = false;
    for (const Scope &s : sample.scopes) {
      anyStamp = anyStamp || (s.stamped && s.row_elem.has_value());
      anyTx = anyTx || (s.stamped && s.row_tx.has_value());
    }
    if (anyStamp) out.headers.push_back("Validity");
    if (anyTx) out.headers.push_back("Transaction");
    return std::make_pair(anyStamp, anyTx);
  };

  auto star_row = [&](const JRow &r, bool withValidity, bool withTx) {
    std::vector<Cell> cells;
    for (size_t si = 0; si < r.scopes.size(); si++) {
      const Scope &s = r.scopes[si];
      for (size_t c = 0; c < s.table->def.columns.size(); c++) {
        const ColumnDef &cd = s.table->def.columns[c];
        if (!s.merged_column.empty() && cd.name == s.merged_column) continue;
        if (const Value *ov = r.override_for(static_cast<int>(si), static_cast<int>(c))) {
          cells.push_back(ov->is_null() ? Cell::null() : Cell::plain(*ov));
          continue;
        }
        Cell cell;
        for (const VersionedEntry *en : current_entries(cd, s.row->cells[c], today_))
          if (!en->value.is_null()) cell.parts.push_back({en->value, {}, {}});
        if (cd.multiplicity == 1 && cell.parts.size() > 1) cell.parts.resize(1);
        cells.push_back(std::move(cell));
      }
    }
    if (withValidity) {
      if (r.combined)
        cells.push_back(Cell::of_element(*r.combined));
      else {
        TemporalElement acc;
        for (const Scope &s : r.scopes)
          if (s.stamped && s.row_elem) acc = element_union(acc, *s.row_elem);
        cells.push_back(acc.empty() ? Cell::null() : Cell::of_element(acc));
      }
    }
    if (withTx) {
      Cell c;
      for (const Scope &s : r.scopes)
        if (s.stamped && s.row_tx)
          for (const Period &p : s.row_tx->periods()) c.parts.push_back({Value::null(), {}, p});
      cells.push_back(std::move(c));
    }
    return cells;
  };

  if (core.star) {
    if (kept.empty()) return out;
    auto [withValidity, withTx] = star_headers(kept.front());
    for (const JRow &r : kept) out.rows.push_back(star_row(r, withValidity, withTx));
    return out;
  }

  for (const auto &item : core.items) out.headers.push_back(item_header(item));

  if (!grouped && scaleItem < 0) {
    for (size_t i = 0; i < kept.size(); i++) {
      Ctx ctx{&kept[i], &keptBindings[i], outer, nullptr, {}};
      std::vector<Cell> cells;
      for (const auto &item : core.items) {
        ctx.last_bound.reset();
        Cell c = eval_expr(item.expr, ctx);
        if (!item.alias.empty() && ctx.last_bound)
          (*ctx.bindings)[item.alias] = *ctx.last_bound;
        else if (!item.alias.empty() && c.parts.size() == 1)
          (*ctx.bindings)[item.alias] = c.parts[0];
        cells.push_back(std::move(c));
      }
      out.rows.push_back(std::move(cells));
    }
    return out;
  }

  // --- grouped evaluation ---------------------------------------------------

  struct GroupedRow {
    const JRow *row;
    std::map<std::string, CellPart> *bindings;
    std::optional<Instant> bucket;
  };
  std::vector<GroupedRow> grows;
  if (core.group_scale) {
    // replicate each row into the granule groups its element overlaps
    for (size_t i = 0; i < kept.size(); i++) {
      const JRow &r = kept[i];
      std::optional<TemporalElement> elem = r.combined;
      if (!elem && r.scopes.front().row_elem) elem = r.scopes.front().row_elem;
      if (!elem)
        fail(Errc::NoTimestampInScope, "granule grouping needs row timestamps in scope");
      auto buckets = bucketize({{Value::integer(0), *elem}}, *core.group_scale,
                               today_.truncate(elem->granularity()));
      for (const auto &[k, _] : buckets)
        grows.push_back({&kept[i], &keptBindings[i], Instant(*core.group_scale, k)});
    }
  } else {
    for (size_t i = 0; i < kept.size(); i++) grows.push_back({&kept[i], &keptBindings[i], {}});
  }

  // group keys
  struct Group {
    std::vector<Value> keys;
    std::optional<Instant> bucket;
    std::vector<const JRow *> rows;
    GroupedRow first;
  };
  std::vector<Group> groups;
  auto key_matches = [](const Group &g, const std::vector<Value> &keys,
                        const std::optional<Instant> &bucket) {
    if (g.keys.size() != keys.size()) return false;
    for (size_t i = 0; i < keys.size(); i++) {
      auto c = Value::compare(g.keys[i], keys[i]);
      if (!c || *c != 0) return false;
    }
    if (g.bucket.has_value() != bucket.has_value()) return false;
    if (g.bucket && Instant::compare(*g.bucket, *bucket) != 0) return false;
    return true;
  };
  for (const GroupedRow &gr : grows) {
    std::vector<Value> keys;
    Ctx ctx{gr.row, gr.bindings, outer, nullptr, {}};
    for (const auto &k : core.group_by) keys.push_back(eval_expr(k, ctx).scalar());
    Group *target = nullptr;
    for (Group &g : groups)
      if (key_matches(g, keys, gr.bucket)) {
        target = &g;
        break;
      }
    if (!target) {
      groups.push_back({keys, gr.bucket, {}, gr});
      target = &groups.back();
    }
    target->rows.push_back(gr.row);
  }
  if (groups.empty() && hasAgg && core.group_by.empty() && !core.group_scale) {
    // aggregates over an empty table still produce one row
    groups.push_back({{}, {}, {}, {nullptr, nullptr, {}}});
  }
  // deterministic group order: by bucket then keys
  std::stable_sort(groups.begin(), groups.end(), [](const Group &a, const Group &b) {
    if (a.bucket && b.bucket) {
      int c = Instant::compare(*a.bucket, *b.bucket);
      if (c != 0) return c < 0;
    }
    for (size_t i = 0; i < a.keys.size() && i < b.keys.size(); i++) {
      auto c = Value::compare(a.keys[i], b.keys[i]);
      if (c && *c != 0) return *c < 0;
    }
    return false;
  });

  if (core.group_scale) out.headers.push_back(granularity_name(*core.group_scale));
  if (scaleItem >= 0) {
    const Expr &se = *core.items[scaleItem].expr;
    out.headers.push_back(granularity_name(*se.scale));
  }

  for (Group &g : groups) {
    std::map<std::string, CellPart> groupBindings =
        g.first.bindings ? *g.first.bindings : std::map<std::string, CellPart>{};
    Ctx ctx{g.first.row, &groupBindings, outer, &g.rows, {}};
    if (core.having && !eval_bool(core.having, ctx)) continue;

    if (scaleItem < 0) {
      std::vector<Cell> cells;
      for (const auto &item : core.items) cells.push_back(eval_expr(item.expr, ctx));
      if (core.group_scale)
        cells.push_back(g.bucket ? Cell::plain(Value::date(*g.bucket)) : Cell::null());
      out.rows.push_back(std::move(cells));
      continue;
    }

    // expand the scale-carrying item into one output row per bucket
    const Expr &se = *core.items[scaleItem].expr;
    Granularity scale = *se.scale;
    // gather (value, element) entries the item ranges over, across the group
    std::vector<std::pair<Value, TemporalElement>> entries;
    const ExprPtr &colExpr = se.kind == Expr::Kind::Granule ? se.args[0] : se.args[0];
    for (const JRow *r : g.rows) {
      Ctx rowCtx{r, &groupBindings, outer, nullptr, {}};
      const Expr *colNode = colExpr.get();
      if (colNode->kind == Expr::Kind::Restrict) {
        Cell c = eval_expr(colExpr, rowCtx);
        for (const CellPart &p : c.parts)
          if (p.valid) entries.emplace_back(p.value, *p.valid);
        continue;
      }
      while (colNode->kind == Expr::Kind::FnCall && colNode->args.size() == 1)
        colNode = colNode->args[0].get();
      if (colNode->kind != Expr::Kind::ColumnRef)
        fail(Errc::NoTimestampInScope, "granule grouping needs a timestamped column");
      auto loc = resolve_column(colNode->qualifier, colNode->name, rowCtx);
      if (!loc || loc->column < 0) fail(Errc::UnknownColumn, "unknown column " + colNode->name);
      const Scope &s = loc->ctx->row->scopes[loc->scope_index];
      for (const VersionedEntry *en : valid_candidates(s.row->cells[loc->column])) {
        auto elem = op_element(*en, Dimension::Valid);
        if (elem) entries.emplace_back(en->value, *elem);
      }
    }
    Instant ref = today_;
    auto buckets = bucketize(entries, scale, ref);
    for (auto &[k, list] : buckets) {
      std::vector<Cell> cells;
      for (size_t i = 0; i < core.items.size(); i++) {
        if (static_cast<int>(i) == scaleItem) {
          if (se.kind == Expr::Kind::Granule) {
            Cell c;
            for (auto &[v, el] : list) c.parts.push_back({v, el, {}});
            cells.push_back(std::move(c));
          } else {
            // aggregate over this bucket's values
            std::string fn = to_upper_str(se.fn_name);
            std::vector<Value> vals;
            for (auto &[v, el] : list)
              if (!v.is_null()) vals.push_back(v);
            if (fn == "COUNT")
              cells.push_back(Cell::plain(Value::integer(static_cast<std::int64_t>(vals.size()))));
            else if (vals.empty())
              cells.push_back(Cell::null());
            else if (fn == "SUM" || fn == "AVG") {
              double total = 0;
              bool allInt = true;
              for (const Value &v : vals) {
                if (!v.is_numeric()) fail(Errc::NonNumericAggregate, fn + " needs numeric values");
                allInt = allInt && v.is_integer();
                total += v.numeric();
              }
              if (fn == "AVG")
                cells.push_back(Cell::plain(Value::decimal(total / static_cast<double>(vals.size()))));
              else if (allInt)
                cells.push_back(Cell::plain(Value::integer(static_cast<std::int64_t>(total))));
              else
                cells.push_back(Cell::plain(Value::decimal(total)));
            } else {
              const Value *best = &vals[0];
              for (const Value &v : vals) {
                auto c = compare_values(v, *best);
                if (!c) fail(Errc::NonComparableType, fn + " over mixed value types");
                if ((fn == "MIN" && *c < 0) || (fn == "MAX" && *c > 0)) best = &v;
              }
              cells.push_back(Cell::plain(*best));
            }
          }
        } else {
          cells.push_back(eval_expr(core.items[i].expr, ctx));
        }
      }
      if (core.group_scale)
        cells.push_back(g.bucket ? Cell::plain(Value::date(*g.bucket)) : Cell::null());
      cells.push_back(Cell::plain(Value::date(Instant(scale, k))));
      out.rows.push_back(std::move(cells));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Temporal set operators

namespace {

// Explodes history cells: one output row per stamped part.
ResultSet explode(const ResultSet &rs) {
  ResultSet out;
  out.headers = rs.headers;
  for (const auto &row : rs.rows) {
    size_t multi = 0;
    for (const Cell &c : row) multi = std::max(multi, c.parts.size());
    if (multi <= 1) {
      out.rows.push_back(row);
      continue;
    }
    for (size_t i = 0; i < multi; i++) {
      std::vector<Cell> r;
      for (const Cell &c : row) {
        Cell nc;
        if (c.parts.size() > i)
          nc.parts.push_back(c.parts.size() > 1 ? c.parts[i] : c.parts[0]);
        else if (!c.parts.empty())
          nc.parts.push_back(c.parts[0]);
        r.push_back(std::move(nc));
      }
      out.rows.push_back(std::move(r));
    }
  }
  return out;
}

std::string row_key(const std::vector<Cell> &row) {
  std::string key;
  for (const Cell &c : row) {
    key += "|";
    for (const CellPart &p : c.parts) key += p.value.to_string() + ",";
  }
  return key;
}

std::optional<TemporalElement> row_element(const std::vector<Cell> &row) {
  std::optional<TemporalElement> acc;
  for (const Cell &c : row)
    for (const CellPart &p : c.parts) {
      std::optional<TemporalElement> e;
      if (p.valid)
        e = *p.valid;
      else if (p.transaction)
        e = TemporalElement::of(*p.transaction);
      if (!e) continue;
      acc = acc ? element_intersect(*acc, *e) : *e;
    }
  return acc;
}

std::vector<Cell> with_element(const std::vector<Cell> &row, const TemporalElement &e) {
  std::vector<Cell> out = row;
  for (Cell &c : out)
    for (CellPart &p : c.parts) {
      if (p.valid) p.valid = e;
      if (p.transaction) {
        p.transaction.reset();
        p.valid = e;
      }
    }
  return out;
}

} // namespace

ResultSet temporal_set_op(ast::Select::SetOp op, const ResultSet &lhsIn, const ResultSet &rhsIn) {
  if (lhsIn.headers.size() != rhsIn.headers.size())
    fail(Errc::IncompatibleArity, "set operands have different arities");
  ResultSet lhs = explode(lhsIn), rhs = explode(rhsIn);

  struct Entry {
    std::vector<Cell> row;
    std::optional<TemporalElement> elem;
    bool stamped;
  };
  auto collapse = [](const ResultSet &rs) {
    std::vector<std::pair<std::string, Entry>> out;
    for (const auto &row : rs.rows) {
      std::string key = row_key(row);
      auto elem = row_element(row);
      bool found = false;
      for (auto &[k, e] : out) {
        if (k == key) {
          found = true;
          if (e.elem && elem) e.elem = element_union(*e.elem, *elem);
          break;
        }
      }
      if (!found) out.push_back({key, Entry{row, elem, elem.has_value()}});
    }
    return out;
  };

  auto L = collapse(lhs), R = collapse(rhs);
  auto find = [](std::vector<std::pair<std::string, Entry>> &v,
                 const std::string &k) -> Entry * {
    for (auto &[key, e] : v)
      if (key == k) return &e;
    return nullptr;
  };

  ResultSet out;
  out.headers = lhsIn.headers;
  switch (op) {
  case ast::Select::SetOp::Intersect:
    for (auto &[k, e] : L) {
      Entry *r = find(R, k);
      if (!r) continue;
      if (e.stamped && r->stamped) {
        TemporalElement inter = element_intersect(*e.elem, *r->elem);
        if (inter.empty()) continue;
        out.rows.push_back(with_element(e.row, inter));
      } else {
        out.rows.push_back(e.row);
      }
    }
    break;
  case ast::Select::SetOp::Union:
    for (auto &[k, e] : L) {
      Entry *r = find(R, k);
      if (r && e.stamped && r->stamped)
        out.rows.push_back(with_element(e.row, element_union(*e.elem, *r->elem)));
      else
        out.rows.push_back(e.row);
    }
    for (auto &[k, e] : R)
      if (!find(L, k)) out.rows.push_back(e.row);
    break;
  case ast::Select::SetOp::Except:
    for (auto &[k, e] : L) {
      Entry *r = find(R, k);
      if (!r) {
        out.rows.push_back(e.row);
        continue;
      }
      if (e.stamped && r->stamped) {
        TemporalElement diff = element_difference(*e.elem, *r->elem);
        if (diff.empty()) continue;
        out.rows.push_back(with_element(e.row, diff));
      }
      // common unstamped rows drop
    }
    break;
  }
  return out;
}

} // namespace chronoql
