#pragma once

#include <string>

#include "chronoql/eval.hpp"
#include "chronoql/mutate.hpp"

namespace chronoql {

// One cell part as text: value, then valid element, then transaction stamp.
std::string render_part(const CellPart &p);

// Aligned text table; history cells span one line per entry, current value
// sets print as {a, b}.
std::string render_table(const ResultSet &rs);

// Flat CSV: one line per (row, entry).
std::string render_csv(const ResultSet &rs);

std::string render_report(const MutationReport &r);

// Full Table-1 style dump of one table: every entry with both timestamps
// and its termination cause, newest first.
std::string render_dump(const Database &db, const std::string &table);

} // namespace chronoql
