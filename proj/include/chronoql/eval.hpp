#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chronoql/ast.hpp"
#include "chronoql/storage.hpp"

namespace chronoql {

// One stamped value inside a result cell.
struct CellPart {
  Value value;
  std::optional<TemporalElement> valid;
  std::optional<Period> transaction;
};

// A result cell: empty (NULL), one plain part, a set of current values, or
// a nested history (several stamped parts).
struct Cell {
  std::vector<CellPart> parts;

  static Cell null() { return {}; }
  static Cell plain(Value v) {
    Cell c;
    c.parts.push_back({std::move(v), {}, {}});
    return c;
  }
  static Cell of_element(TemporalElement e) {
    Cell c;
    c.parts.push_back({Value::null(), std::move(e), {}});
    return c;
  }
  bool is_null() const { return parts.empty(); }
  const Value &scalar() const; // fails TypeMismatch when not scalar
};

struct ResultSet {
  std::vector<std::string> headers;
  std::vector<std::vector<Cell>> rows;
};

// Read-only query evaluation over an immutable store snapshot. `today`
// anchors the valid dimension, the clock reading anchors the transaction
// dimension.
class Evaluator {
public:
  Evaluator(const Database &db, Instant today, Instant clock_now)
      : db_(db), today_(std::move(today)), clock_(std::move(clock_now)) {}

  ResultSet eval(const ast::Select &sel);

  // Entry points shared with the mutation engine.
  bool row_matches(const ast::ExprPtr &where, const Table &t, const Row &row);
  Value scalar(const ast::ExprPtr &expr); // no row context (subqueries, literals)
  Value scalar_on_row(const ast::ExprPtr &expr, const Table &t, const Row &row);

  const Instant &today() const { return today_; }

  struct Scope;
  struct JRow;
  struct Ctx;

private:
  ResultSet eval_core(const ast::SelectCore &core, const Ctx *outer);
  ResultSet eval_select(const ast::Select &sel, const Ctx *outer);

  std::vector<JRow> from_rows(const ast::SelectCore &core, const Ctx *outer);
  void apply_join(std::vector<JRow> &rows, const ast::Join &join, const Ctx *outer);

  WindowSpec resolve_term(const ast::Term &term, const std::string &scopeTable, const Ctx *outer);
  TemporalElement when_element_global(const ast::ExprPtr &cond, const Table &t, const Ctx *outer);
  std::optional<TemporalElement> cond_element(const ast::ExprPtr &cond, Ctx &ctx);
  std::optional<std::vector<std::pair<Value, TemporalElement>>> timestamped_entries(
      const ast::ExprPtr &side, Ctx &ctx);

  struct ColumnLoc {
    const Ctx *ctx;
    int scope_index;
    int column; // -1: row-level reference
  };
  std::optional<ColumnLoc> resolve_column(const std::string &qualifier, const std::string &name,
                                          const Ctx &ctx) const;

  Cell eval_expr(const ast::ExprPtr &expr, Ctx &ctx);
  bool eval_bool(const ast::ExprPtr &expr, Ctx &ctx);
  Cell eval_restrict(const ast::Expr &e, Ctx &ctx);
  Cell eval_column_fn(const ast::Expr &e, Ctx &ctx);
  Cell eval_pred_fn(const ast::Expr &e, Ctx &ctx);
  Cell eval_bitemporal(const ast::Expr &e, Ctx &ctx);
  Cell eval_binary(const ast::Expr &e, Ctx &ctx);
  Cell eval_aggregate_rowless(const ast::Expr &e, Ctx &ctx); // inside grouped eval

  const Database &db_;
  Instant today_;
  Instant clock_;
};

// Temporal set combination of two result sets (UNION / INTERSECT / EXCEPT
// over timestamped cells; plain cells follow conventional set semantics).
ResultSet temporal_set_op(ast::Select::SetOp op, const ResultSet &lhs, const ResultSet &rhs);

} // namespace chronoql
