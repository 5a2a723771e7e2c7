#include "chronoql/render.hpp"

#include <algorithm>
#include <sstream>

namespace chronoql {

std::string render_part(const CellPart &p) {
  std::string out;
  if (!p.value.is_null()) out = p.value.to_string();
  if (p.valid) {
    if (!out.empty()) out += " ";
    out += p.valid->to_string();
  }
  if (p.transaction) {
    if (!out.empty()) out += " ";
    out += p.transaction->to_string();
  }
  return out;
}

namespace {

bool is_value_set(const Cell &c) {
  if (c.parts.size() < 2) return false;
  for (const CellPart &p : c.parts)
    if (p.valid || p.transaction) return false;
  return true;
}

// The text lines a cell occupies.
std::vector<std::string> cell_lines(const Cell &c) {
  if (c.is_null()) return {""};
  if (is_value_set(c)) {
    std::string s = "{";
    for (size_t i = 0; i < c.parts.size(); i++) {
      if (i) s += ", ";
      s += c.parts[i].value.to_string();
    }
    s += "}";
    return {s};
  }
  std::vector<std::string> lines;
  for (const CellPart &p : c.parts) lines.push_back(render_part(p));
  if (lines.empty()) lines.push_back("");
  return lines;
}

} // namespace

std::string render_table(const ResultSet &rs) {
  size_t ncols = rs.headers.size();
  std::vector<size_t> width(ncols);
  for (size_t c = 0; c < ncols; c++) width[c] = rs.headers[c].size();

  std::vector<std::vector<std::vector<std::string>>> grid; // row -> col -> lines
  for (const auto &row : rs.rows) {
    std::vector<std::vector<std::string>> cells;
    for (size_t c = 0; c < ncols; c++) {
      auto lines = c < row.size() ? cell_lines(row[c]) : std::vector<std::string>{""};
      for (const std::string &l : lines) width[c] = std::max(width[c], l.size());
      cells.push_back(std::move(lines));
    }
    grid.push_back(std::move(cells));
  }

  std::ostringstream os;
  auto pad = [&](const std::string &s, size_t w) {
    os << s;
    for (size_t i = s.size(); i < w; i++) os << ' ';
  };
  for (size_t c = 0; c < ncols; c++) {
    if (c) os << " | ";
    pad(rs.headers[c], width[c]);
  }
  os << "\n";
  for (size_t c = 0; c < ncols; c++) {
    if (c) os << "-+-";
    os << std::string(width[c], '-');
  }
  os << "\n";
  for (const auto &cells : grid) {
    size_t nlines = 1;
    for (const auto &cell : cells) nlines = std::max(nlines, cell.size());
    for (size_t l = 0; l < nlines; l++) {
      for (size_t c = 0; c < ncols; c++) {
        if (c) os << " | ";
        pad(l < cells[c].size() ? cells[c][l] : "", width[c]);
      }
      os << "\n";
    }
  }
  os << "(" << rs.rows.size() << (rs.rows.size() == 1 ? " row)" : " rows)") << "\n";
  return os.str();
}

namespace {

std::string csv_quote(const std::string &s) {
  bool needs = s.find_first_of(",\"\n") != std::string::npos;
  if (!needs) return s;
  std::string out = "\"";
  for (char c : s) {
    out.push_back(c);
    if (c == '"') out.push_back('"');
  }
  out.push_back('"');
  return out;
}

} // namespace

std::string render_csv(const ResultSet &rs) {
  std::ostringstream os;
  for (size_t c = 0; c < rs.headers.size(); c++) {
    if (c) os << ",";
    os << csv_quote(rs.headers[c]);
  }
  os << "\n";
  for (const auto &row : rs.rows) {
    size_t nlines = 1;
    std::vector<std::vector<std::string>> cells;
    for (const Cell &c : row) {
      cells.push_back(cell_lines(c));
      nlines = std::max(nlines, cells.back().size());
    }
    for (size_t l = 0; l < nlines; l++) {
      for (size_t c = 0; c < cells.size(); c++) {
        if (c) os << ",";
        os << csv_quote(l < cells[c].size() ? cells[c][l] : "");
      }
      os << "\n";
    }
  }
  return os.str();
}

std::string render_report(const MutationReport &r) {
  std::ostringstream os;
  os << r.kind << ": " << r.rows_matched << (r.rows_matched == 1 ? " row" : " rows") << ", "
     << r.entries_created << " created, " << r.entries_closed << " closed, " << r.entries_removed
     << " removed at '" << r.clock.to_string() << "'";
  return os.str();
}

std::string render_dump(const Database &db, const std::string &table) {
  const Table &t = db.table(table);
  std::ostringstream os;
  os << t.def.name << "\n";
  for (const Row &row : t.rows) {
    os << "ROW";
    int k = t.key_index();
    if (k >= 0 && !row.cells[k].empty())
      os << " " << t.def.primary_key << " = " << row.cells[k].front().value.to_string();
    if (row.valid) os << " | Validity " << row.valid->to_string();
    if (row.transaction) os << " | Transaction " << row.transaction->to_string();
    if (row.cause != TerminationCause::Open) os << " " << termination_cause_name(row.cause);
    os << "\n";
    for (size_t c = 0; c < t.def.columns.size(); c++) {
      const ColumnDef &cd = t.def.columns[c];
      if (static_cast<int>(c) == k) continue;
      if (!cd.timestamped() && cd.multiplicity == 1) {
        os << "  " << cd.name << " = "
           << (row.cells[c].empty() ? "Null" : row.cells[c].front().value.to_string()) << "\n";
        continue;
      }
      os << "  " << cd.name << ":\n";
      // Table-1 order: newest first (valid begin desc, then transaction desc)
      std::vector<const VersionedEntry *> entries;
      for (const VersionedEntry &e : row.cells[c]) entries.push_back(&e);
      std::stable_sort(entries.begin(), entries.end(),
                       [](const VersionedEntry *a, const VersionedEntry *b) {
                         if (a->valid && b->valid && !a->valid->empty() && !b->valid->empty()) {
                           int cc = Instant::compare(a->valid->first_begin(),
                                                     b->valid->first_begin());
                           if (cc != 0) return cc > 0;
                         }
                         if (a->transaction && b->transaction)
                           return Instant::compare(a->transaction->begin_instant(),
                                                   b->transaction->begin_instant()) > 0;
                         return false;
                       });
      for (const VersionedEntry *e : entries) {
        os << "    " << e->value.to_string();
        if (e->valid) os << " " << e->valid->to_string();
        if (e->transaction) os << " " << e->transaction->to_string();
        if (e->cause != TerminationCause::Open) os << " " << termination_cause_name(e->cause);
        os << "\n";
      }
    }
  }
  return os.str();
}

} // namespace chronoql
