#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "chronoql/chrono.hpp"
#include "chronoql/schema.hpp"
#include "chronoql/value.hpp"

namespace chronoql {

namespace ast {

struct Expr;
using ExprPtr = std::shared_ptr<Expr>;
struct Select;
using SelectPtr = std::shared_ptr<Select>;

// Surface form of a temporal term; bounds may still be conditions or
// subqueries that the evaluator resolves into a WindowSpec.
struct Term {
  WindowKind kind = WindowKind::History;
  Dimension dim = Dimension::Valid;
  bool dim_explicit = false;
  std::optional<Instant> d1, d2; // @ / BETWEEN / SINCE / BEFORE / AFTER bounds
  ExprPtr cond;                  // WHEN 'Condition' and condition-bound terms
  SelectPtr subquery;            // bracketed subquery window
  bool bracket = false;          // written as ['d1'-'d2']
};

enum class BinOp { Add, Sub, Mul, Div, Eq, Ne, Lt, Le, Gt, Ge, And, Or };
const char *binop_name(BinOp op);

enum class ColumnFnKind {
  First,
  Last,
  Previous,
  Next,
  PreviousScale,
  NextScale,
  EvolutionHistory,
  Evolution,
  FirstEvolution,
  LastEvolution,
  EvolutionFromTo,
  Timestamps,
};

enum class PredFnKind { Always, AnytimePast, Increase, FirstIncrease, Decrease };

enum class BitempKind { Retroactif, Postactif, Erroneous };
const char *bitemp_name(BitempKind k);

// Projection of a timestamped item: its value, valid element, or
// transaction stamp.
enum class Proj { Value, ValidElement, TransactionStamp };

struct Expr {
  enum class Kind {
    Literal,        // value (NULL, number, text)
    InstantLit,     // text literal that names an instant, kept as written
    DurationLit,    // 7 YEARS
    ColumnRef,      // [qualifier.]name[.V|.T] — name may also be a table/alias
    Star,           // inside Count(*)
    Unary,          // NOT
    Binary,         // arithmetic / comparison / logic
    FnCall,         // Initcap, Upper, Begin, End, CurrentDate
    Aggregate,      // Count/Sum/Min/Max/Avg
    Restrict,       // temporal term applied to a column
    ColumnFn,       // Table-3 functions
    PredFn,         // ALWAYS / ANYTIME PAST / INCREASE / ...
    Bitemporal,     // RETROACTIF / POSTACTIF / ERRONEOUS column
    This,           // THIS name[.V|.T]
    InHistory,      // needle IN HISTORY(inner)
    InSelect,       // needle IN (SELECT ...)
    Exists,         // EXISTS (SELECT ...)
    ScalarSubquery, // (SELECT ...) in scalar position
    DurationCmp,    // expr LonguestThen 7 YEARS
    Granule,        // column DECADE — temporal grouping suffix
  };

  Kind kind;
  int line = 0, column = 0;

  // Literal / InstantLit
  Value literal;
  std::string instant_text;

  // DurationLit / DurationCmp / Bitemporal phase
  std::optional<Duration> duration;

  // ColumnRef / This
  std::string qualifier; // alias or table
  std::string name;
  Proj proj = Proj::Value;
  std::string bind_alias; // Grade G inside HISTORY(...)

  // Unary / Binary / FnCall / Aggregate / nested operands
  BinOp op = BinOp::Eq;
  std::string fn_name; // FnCall (canonical spelling) or aggregate name
  std::vector<ExprPtr> args;

  // Restrict / PredFn WHEN attachment
  std::optional<Term> term;

  // ColumnFn
  ColumnFnKind column_fn = ColumnFnKind::First;
  std::optional<Dimension> fn_dim;  // FIRST T Status
  ExprPtr fn_value;                 // PREVIOUS 'v' / TIMESTAMPS 'v'
  std::string evo_from, evo_to;     // EVOLUTION 'v1'-'v2'

  // PredFn
  PredFnKind pred_fn = PredFnKind::Always;

  // Bitemporal
  BitempKind bitemp = BitempKind::Retroactif;

  // Aggregate / Granule
  std::optional<Granularity> scale;
  bool star = false;

  // InSelect / Exists / ScalarSubquery
  SelectPtr subquery;
  bool negated = false;
};

ExprPtr make_expr(Expr::Kind kind);

struct SelectItem {
  ExprPtr expr;
  std::string alias;
};

struct FromItem {
  std::string table;
  std::string alias;
  std::optional<Term> term; // row-dimension window
  const std::string &binding() const { return alias.empty() ? table : alias; }
};

struct Join {
  enum class Kind { Natural, Cross };
  Kind kind = Kind::Natural;
  FromItem right;
  std::optional<Term> term;            // link / concatenation window
  std::optional<BitempKind> bitemp;    // POSTACTIF Natural Join ...
  std::optional<Duration> phase;       // WITH n SCALE
};

struct SelectCore {
  bool star = false;
  std::vector<SelectItem> items;
  FromItem from;
  std::vector<Join> joins;
  ExprPtr where;
  std::vector<ExprPtr> group_by;
  std::optional<Granularity> group_scale;
  ExprPtr having;
};

struct Select {
  SelectCore core;
  enum class SetOp { Union, Intersect, Except };
  struct Part {
    SetOp op;
    SelectCore core;
  };
  std::vector<Part> parts;
};

// INSERT value clause for one column: a scalar, or a braced set of
// (value, element) entries.
struct InsertValue {
  bool braced = false;
  struct Entry {
    ExprPtr value;
    std::optional<TemporalElement> element;
  };
  std::vector<Entry> entries;
};

struct InsertRow {
  std::vector<InsertValue> values;
  std::optional<TemporalElement> row_valid;
};

struct Insert {
  std::string table;
  std::vector<InsertRow> rows;
};

struct UpdateSet {
  std::string table;
  std::vector<std::pair<std::string, ExprPtr>> assignments;
  ExprPtr where;
};

struct TagOnItem {
  std::string column;
  std::vector<InsertValue::Entry> entries;
  bool braced = false;
};

struct UpdateTagOn {
  std::string table;
  std::vector<TagOnItem> items;
  ExprPtr where;
};

struct UpdateCorrect {
  std::string table;
  bool row_validity = false;            // CORRECT VALIDITY [e]
  std::string column;
  std::optional<TemporalElement> target_element; // which entry to correct
  ExprPtr target_value;                 // CORRECT col 'v' ... (timestamp fix)
  ExprPtr new_value;                    // CORRECT col = expr ...
  std::optional<TemporalElement> new_element;
  ExprPtr where;
};

struct Delete {
  std::string table;
  ExprPtr where;
};

struct Vacuum {
  std::string table;
  std::vector<std::string> columns; // empty = whole rows
  ExprPtr where;                    // required
};

struct CreateTable {
  TableDef def;
};

using Statement =
    std::variant<SelectPtr, Insert, UpdateSet, UpdateTagOn, UpdateCorrect, Delete, Vacuum, CreateTable>;

} // namespace ast

// Recursive-descent parser over the token stream; reports ParseError with
// the expected-token set and a 1-based source position.
ast::Statement parse_statement(const std::string &src);

// Splits a script into statements at top-level ';' boundaries and parses
// each. Comments and blank statements are skipped.
std::vector<ast::Statement> parse_script(const std::string &src);

// Grammar-production coverage counters (used by the corpus coverage audit).
namespace parser_coverage {
std::vector<std::string> all_productions();
std::vector<std::string> fired_productions();
void reset();
} // namespace parser_coverage

// Canonical surface form; parsing the result yields an identical tree.
std::string pretty_print(const ast::Statement &stmt);
std::string pretty_print(const ast::ExprPtr &expr);

} // namespace chronoql
