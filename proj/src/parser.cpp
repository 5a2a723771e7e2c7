#include <algorithm>
#include <set>

#include "chronoql/ast.hpp"
#include "chronoql/token.hpp"

namespace chronoql {

using namespace ast;

// ---------------------------------------------------------------------------
// Production coverage registry

namespace parser_coverage {

namespace {
std::set<std::string> &fired() {
  static std::set<std::string> s;
  return s;
}
} // namespace

static const char *kProductions[] = {
    "select_core", "select_star", "select_item", "select_item_alias", "set_op",
    "from_item", "from_prefix_term", "from_suffix_term", "from_bracket_window",
    "from_subquery_window", "natural_join", "cross_join", "join_prefix_term",
    "join_suffix_term", "join_bracket_window", "join_subquery_window", "join_bitemporal",
    "where_clause", "group_by", "group_scale", "having_clause",
    "term_history", "term_past", "term_future", "term_at", "term_between", "term_when",
    "term_since", "term_before", "term_after", "term_condition_bound", "term_dim_explicit",
    "restrict_prefix", "restrict_call", "restrict_suffix",
    "colfn_first", "colfn_last", "colfn_previous", "colfn_next", "colfn_previous_scale",
    "colfn_next_scale", "colfn_evolution_history", "colfn_evolution", "colfn_first_evolution",
    "colfn_last_evolution", "colfn_evolution_fromto", "colfn_timestamps", "colfn_dim",
    "this_ref", "proj_suffix", "qualified_column", "column_binder",
    "predfn_always", "predfn_anytime_past", "predfn_increase", "predfn_first_increase",
    "predfn_decrease", "predfn_when",
    "bitemporal_select", "bitemporal_phase",
    "in_history", "in_select", "exists", "scalar_subquery", "duration_cmp", "granule_suffix",
    "aggregate", "aggregate_star", "aggregate_scale", "fn_call", "fn_currentdate",
    "cmp", "arith_add", "arith_mul", "logic_and", "logic_or", "logic_not", "paren_expr",
    "literal_null", "literal_number", "literal_text", "duration_literal",
    "insert", "insert_multi_row", "insert_braced_value", "insert_entry_element",
    "insert_row_valid", "update_set", "tag_on", "tag_on_braced",
    "correct_value", "correct_timestamp", "correct_both", "correct_validity",
    "delete_stmt", "vacuum_stmt", "vacuum_columns",
    "create_table", "column_valid_time", "column_transaction_time", "column_multiplicity",
    "column_references", "column_default", "column_primary_key", "table_valid_time",
    "table_transaction_time", "vacuum_keep", "vacuum_lifecycle",
};

std::vector<std::string> all_productions() {
  return {std::begin(kProductions), std::end(kProductions)};
}

std::vector<std::string> fired_productions() { return {fired().begin(), fired().end()}; }

void reset() { fired().clear(); }

} // namespace parser_coverage

namespace {

void mark(const char *production) { parser_coverage::fired().insert(production); }

bool ident_is(const Token &t, const char *word) {
  if (t.kind != TokenKind::Identifier) return false;
  const std::string &s = t.lexeme;
  for (size_t i = 0;; i++) {
    char w = word[i];
    if (i == s.size()) return w == '\0';
    if (w == '\0') return false;
    if (std::toupper(static_cast<unsigned char>(s[i])) != std::toupper(static_cast<unsigned char>(w)))
      return false;
  }
}

class Parser {
public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Statement statement() {
    const Token &t = cur();
    if (t.is_kw("SELECT")) return select();
    if (t.is_kw("INSERT")) return insert();
    if (t.is_kw("UPDATE")) return update();
    if (t.is_kw("DELETE")) return del();
    if (t.is_kw("VACUUM")) return vacuum();
    if (t.is_kw("CREATE")) return create_table();
    expected("a statement (SELECT, INSERT, UPDATE, DELETE, VACUUM or CREATE TABLE)");
  }

  bool at_end() const { return toks_[pos_].kind == TokenKind::End; }
  void expect_terminator() {
    if (accept_punct(";")) return;
    if (!at_end()) expected("';'");
  }
  void expect_end() {
    if (!at_end()) expected("end of statement");
  }

private:
  std::vector<Token> toks_;
  size_t pos_ = 0;

  const Token &cur() const { return toks_[pos_]; }
  const Token &peek(size_t k = 1) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  Token take() { return toks_[pos_++]; }

  [[noreturn]] void expected(const std::string &what) const {
    const Token &t = cur();
    std::string got = t.kind == TokenKind::End ? "end of input" : "'" + t.lexeme + "'";
    fail(Errc::ParseError, "expected " + what + ", got " + got, t.line, t.column);
  }

  bool accept_kw(const char *kw) {
    if (cur().is_kw(kw)) {
      pos_++;
      return true;
    }
    return false;
  }
  void expect_kw(const char *kw) {
    if (!accept_kw(kw)) expected(std::string("'") + kw + "'");
  }
  bool accept_punct(const char *p) {
    if (cur().is_punct(p)) {
      pos_++;
      return true;
    }
    return false;
  }
  void expect_punct(const char *p) {
    if (!accept_punct(p)) expected(std::string("'") + p + "'");
  }
  std::string expect_ident(const std::string &what) {
    if (cur().kind != TokenKind::Identifier) expected(what);
    return take().lexeme;
  }
  std::string expect_name(const std::string &what) {
    // table/column names; a few keywords double as names nowhere, so
    // identifiers only
    return expect_ident(what);
  }

  ExprPtr node(Expr::Kind k) {
    ExprPtr e = make_expr(k);
    e->line = cur().line;
    e->column = cur().column;
    return e;
  }

  // --- dimensions and granularities -------------------------------------

  std::optional<Dimension> try_dimension() {
    if (ident_is(cur(), "V")) {
      pos_++;
      mark("term_dim_explicit");
      return Dimension::Valid;
    }
    if (ident_is(cur(), "T")) {
      pos_++;
      mark("term_dim_explicit");
      return Dimension::Transaction;
    }
    return std::nullopt;
  }

  std::optional<Granularity> try_granularity() {
    if (cur().kind != TokenKind::Keyword) return std::nullopt;
    auto g = granularity_from_name(cur().lexeme);
    if (g) pos_++;
    return g;
  }

  Instant expect_instant() {
    if (cur().kind != TokenKind::Text) expected("a quoted instant");
    const Token &t = cur();
    try {
      Instant i = Instant::parse(t.lexeme);
      pos_++;
      return i;
    } catch (const Error &) {
      fail(Errc::ParseError, "'" + t.lexeme + "' is not a valid instant", t.line, t.column);
    }
  }

  bool looks_like_instant() const {
    if (cur().kind != TokenKind::Text) return false;
    try {
      Instant::parse(cur().lexeme);
      return true;
    } catch (...) {
      return false;
    }
  }

  // --- temporal elements and periods -------------------------------------

  // Parses ['a'-'b'] with b an instant, uc or now; cursor on '['.
  Period period_literal(Dimension dim) {
    expect_punct("[");
    Instant begin = expect_instant();
    expect_punct("-");
    if (cur().kind != TokenKind::Text) expected("an instant, 'uc' or 'now'");
    Token endTok = take();
    expect_punct("]");
    std::string endLower;
    for (char c : endTok.lexeme)
      endLower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    try {
      if (endLower == "uc" || endLower == "now") {
        Dimension d = endLower == "uc" ? Dimension::Valid : Dimension::Transaction;
        if (d != dim)
          fail(Errc::BadMarker, "'" + endLower + "' is not legal on this dimension");
        return Period::open(begin, begin.granularity(), endLower == "uc" ? OpenEnd::Uc : OpenEnd::Now);
      }
      Instant end = Instant::parse(endTok.lexeme);
      return Period::make(begin, end, finer_of(begin.granularity(), end.granularity()), dim);
    } catch (const Error &e) {
      if (e.code() == Errc::BadMarker || e.code() == Errc::FutureOnTransaction) throw;
      fail(Errc::ParseError, std::string("bad period literal: ") + e.what(), endTok.line,
           endTok.column);
    }
  }

  TemporalElement element_literal(Dimension dim) {
    std::vector<Period> ps;
    ps.push_back(period_literal(dim));
    while (ident_is(cur(), "U")) {
      pos_++;
      ps.push_back(period_literal(dim));
    }
    return TemporalElement::normalize(std::move(ps));
  }

  Duration duration_literal() {
    if (cur().kind != TokenKind::Number) expected("a duration count");
    Duration d;
    d.count = std::stoll(take().lexeme);
    auto g = try_granularity();
    if (!g) expected("a granularity (YEARS, MONTHS, ...)");
    d.scale = *g;
    mark("duration_literal");
    return d;
  }

  // --- temporal terms -----------------------------------------------------

  bool at_prefix_term() const {
    return cur().is_kw("HISTORY") || cur().is_kw("PAST") || cur().is_kw("FUTURE");
  }

  // HISTORY | PAST | FUTURE, with optional explicit dimension letter.
  Term prefix_term() {
    Term t;
    if (accept_kw("HISTORY")) {
      t.kind = WindowKind::History;
      mark("term_history");
    } else if (accept_kw("PAST")) {
      t.kind = WindowKind::Past;
      mark("term_past");
    } else if (accept_kw("FUTURE")) {
      t.kind = WindowKind::Future;
      mark("term_future");
    } else {
      expected("HISTORY, PAST or FUTURE");
    }
    if (auto d = try_dimension()) {
      t.dim = *d;
      t.dim_explicit = true;
    }
    if (t.kind == WindowKind::Future && t.dim == Dimension::Transaction)
      fail(Errc::FutureOnTransaction, "FUTURE can not apply with the transaction-time dimension",
           cur().line, cur().column);
    return t;
  }

  bool at_suffix_term() const {
    const Token &t = cur();
    if (t.is_punct("@")) return true;
    if (t.is_kw("BETWEEN") || t.is_kw("WHEN") || t.is_kw("SINCE") || t.is_kw("BEFORE") ||
        t.is_kw("AFTER"))
      return true;
    if (t.is_kw("HISTORY") || t.is_kw("PAST") || t.is_kw("FUTURE")) return true;
    if (t.is_punct("[")) return true; // bracket window or subquery window
    return false;
  }

  // A condition bound used by WHEN / SINCE / BEFORE / AFTER. In clause
  // position (FROM) the condition may chain AND; in expression position it
  // is a single comparison unless parenthesized.
  ExprPtr condition_bound(bool clausePosition) {
    mark("term_condition_bound");
    if (clausePosition) return and_expr();
    return comparison();
  }

  // Windows written after the operand. `clausePosition` selects how greedy
  // condition bounds are.
  std::optional<Term> suffix_term(bool clausePosition) {
    Term t;
    if (accept_punct("@")) {
      t.kind = WindowKind::At;
      t.d1 = expect_instant();
      mark("term_at");
    } else if (cur().is_kw("BETWEEN")) {
      pos_++;
      t.kind = WindowKind::Between;
      t.d1 = expect_instant();
      expect_kw("AND");
      t.d2 = expect_instant();
      mark("term_between");
    } else if (cur().is_kw("WHEN")) {
      pos_++;
      t.kind = WindowKind::When;
      t.cond = condition_bound(clausePosition);
      mark("term_when");
    } else if (cur().is_kw("SINCE") || cur().is_kw("BEFORE") || cur().is_kw("AFTER")) {
      Token op = take();
      t.kind = op.is_kw("SINCE") ? WindowKind::Since
               : op.is_kw("BEFORE") ? WindowKind::Before
                                    : WindowKind::After;
      mark(op.is_kw("SINCE") ? "term_since" : op.is_kw("BEFORE") ? "term_before" : "term_after");
      if (looks_like_instant())
        t.d1 = expect_instant();
      else
        t.cond = condition_bound(clausePosition);
    } else if (cur().is_kw("HISTORY") || cur().is_kw("PAST") || cur().is_kw("FUTURE")) {
      return prefix_term();
    } else if (cur().is_punct("[")) {
      if (peek().is_kw("SELECT")) {
        pos_++;
        t.kind = WindowKind::When;
        t.subquery = select_ptr();
        expect_punct("]");
        mark("from_subquery_window");
      } else {
        // ['d1'-'d2'] is shorthand for BETWEEN 'd1' AND 'd2' (both bounds
        // inclusive); an open end turns it into SINCE 'd1'.
        expect_punct("[");
        t.bracket = true;
        t.d1 = expect_instant();
        expect_punct("-");
        if (cur().kind != TokenKind::Text) expected("an instant, 'uc' or 'now'");
        Token endTok = take();
        expect_punct("]");
        std::string el;
        for (char c : endTok.lexeme)
          el.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        if (el == "uc" || el == "now") {
          t.kind = WindowKind::Since;
        } else {
          t.kind = WindowKind::Between;
          try {
            t.d2 = Instant::parse(endTok.lexeme);
          } catch (const Error &) {
            fail(Errc::ParseError, "'" + endTok.lexeme + "' is not a valid instant", endTok.line,
                 endTok.column);
          }
        }
        mark("from_bracket_window");
      }
    } else {
      return std::nullopt;
    }
    if (auto d = try_dimension()) {
      t.dim = *d;
      t.dim_explicit = true;
      if (t.kind == WindowKind::Future && t.dim == Dimension::Transaction)
        fail(Errc::FutureOnTransaction, "FUTURE can not apply with the transaction-time dimension",
             cur().line, cur().column);
    }
    return t;
  }

  // --- expressions ----------------------------------------------------------

  ExprPtr expr() { return or_expr(); }

  ExprPtr or_expr() {
    ExprPtr lhs = and_expr();
    while (cur().is_kw("OR")) {
      pos_++;
      mark("logic_or");
      ExprPtr n = node(Expr::Kind::Binary);
      n->op = BinOp::Or;
      n->args = {lhs, and_expr()};
      lhs = n;
    }
    return lhs;
  }

  ExprPtr and_expr() {
    ExprPtr lhs = not_expr();
    while (cur().is_kw("AND")) {
      pos_++;
      mark("logic_and");
      ExprPtr n = node(Expr::Kind::Binary);
      n->op = BinOp::And;
      n->args = {lhs, not_expr()};
      lhs = n;
    }
    return lhs;
  }

  ExprPtr not_expr() {
    if (cur().is_kw("NOT") && !peek().is_kw("EXISTS")) {
      pos_++;
      mark("logic_not");
      ExprPtr n = node(Expr::Kind::Unary);
      n->args = {not_expr()};
      return n;
    }
    return comparison();
  }

  ExprPtr comparison() {
    ExprPtr lhs = additive();
    const Token &t = cur();
    if (t.is_punct("=") || t.is_punct("<>") || t.is_punct("<") || t.is_punct("<=") ||
        t.is_punct(">") || t.is_punct(">=")) {
      std::string op = take().lexeme;
      mark("cmp");
      ExprPtr n = node(Expr::Kind::Binary);
      n->op = op == "=" ? BinOp::Eq
              : op == "<>" ? BinOp::Ne
              : op == "<" ? BinOp::Lt
              : op == "<=" ? BinOp::Le
              : op == ">" ? BinOp::Gt
                          : BinOp::Ge;
      n->args = {lhs, additive()};
      return n;
    }
    // instant comparisons spelled BEFORE / AFTER (bare columns take these
    // as windows earlier, so only computed instants arrive here)
    if (t.is_kw("BEFORE") || t.is_kw("AFTER")) {
      bool before = take().is_kw("BEFORE");
      ExprPtr n = node(Expr::Kind::Binary);
      n->op = before ? BinOp::Lt : BinOp::Gt;
      n->args = {lhs, additive()};
      mark("cmp");
      return n;
    }
    if (t.is_kw("LONGUESTTHEN") || t.is_kw("LASTS_MORE_THAN")) {
      pos_++;
      mark("duration_cmp");
      ExprPtr n = node(Expr::Kind::DurationCmp);
      n->duration = duration_literal();
      n->args = {lhs};
      return n;
    }
    if (t.is_kw("IN")) {
      pos_++;
      if (cur().is_kw("HISTORY")) {
        pos_++;
        mark("in_history");
        expect_punct("(");
        bool saved = allow_binder_;
        allow_binder_ = true;
        ExprPtr inner = additive();
        allow_binder_ = saved;
        expect_punct(")");
        ExprPtr n = node(Expr::Kind::InHistory);
        n->args = {lhs, inner};
        return n;
      }
      expect_punct("(");
      mark("in_select");
      ExprPtr n = node(Expr::Kind::InSelect);
      n->subquery = select_ptr();
      n->args = {lhs};
      expect_punct(")");
      return n;
    }
    return lhs;
  }

  ExprPtr additive() {
    ExprPtr lhs = multiplicative();
    while (cur().is_punct("+") || cur().is_punct("-")) {
      bool add = take().is_punct("+");
      mark("arith_add");
      ExprPtr n = node(Expr::Kind::Binary);
      n->op = add ? BinOp::Add : BinOp::Sub;
      n->args = {lhs, multiplicative()};
      lhs = n;
    }
    return lhs;
  }

  ExprPtr multiplicative() {
    ExprPtr lhs = unary();
    while (cur().is_punct("*") || cur().is_punct("/")) {
      bool mul = take().is_punct("*");
      mark("arith_mul");
      ExprPtr n = node(Expr::Kind::Binary);
      n->op = mul ? BinOp::Mul : BinOp::Div;
      n->args = {lhs, unary()};
      lhs = n;
    }
    return lhs;
  }

  ExprPtr unary() {
    if (cur().is_punct("-")) {
      pos_++;
      ExprPtr zero = node(Expr::Kind::Literal);
      zero->literal = Value::integer(0);
      ExprPtr n = node(Expr::Kind::Binary);
      n->op = BinOp::Sub;
      n->args = {zero, unary()};
      return n;
    }
    return primary();
  }

  bool at_aggregate() const {
    return cur().is_kw("COUNT") || cur().is_kw("SUM") || cur().is_kw("MIN") ||
           cur().is_kw("MAX") || cur().is_kw("AVG");
  }

  ExprPtr primary() {
    const Token &t = cur();

    if (t.kind == TokenKind::Number) {
      mark("literal_number");
      ExprPtr n = node(Expr::Kind::Literal);
      std::string lex = take().lexeme;
      if (lex.find('.') != std::string::npos)
        n->literal = Value::decimal(std::stod(lex));
      else
        n->literal = Value::integer(std::stoll(lex));
      // trailing granularity keyword makes it a duration literal: 7 YEARS
      if (cur().kind == TokenKind::Keyword && granularity_from_name(cur().lexeme) &&
          n->literal.is_integer()) {
        Granularity g = *try_granularity();
        ExprPtr d = node(Expr::Kind::DurationLit);
        d->duration = Duration{n->literal.as_integer(), g};
        mark("duration_literal");
        return d;
      }
      return n;
    }
    if (t.kind == TokenKind::Text) {
      mark("literal_text");
      ExprPtr n = node(Expr::Kind::Literal);
      n->literal = Value::text(take().lexeme);
      return n;
    }
    if (t.is_kw("NULL")) {
      pos_++;
      mark("literal_null");
      ExprPtr n = node(Expr::Kind::Literal);
      n->literal = Value::null();
      return n;
    }
    if (t.is_punct("(")) {
      pos_++;
      if (cur().is_kw("SELECT")) {
        mark("scalar_subquery");
        ExprPtr n = node(Expr::Kind::ScalarSubquery);
        n->subquery = select_ptr();
        expect_punct(")");
        return n;
      }
      mark("paren_expr");
      ExprPtr inner = expr();
      expect_punct(")");
      return inner;
    }
    if (t.is_kw("NOT") || t.is_kw("EXISTS")) {
      bool neg = accept_kw("NOT");
      expect_kw("EXISTS");
      expect_punct("(");
      mark("exists");
      ExprPtr n = node(Expr::Kind::Exists);
      n->negated = neg;
      n->subquery = select_ptr();
      expect_punct(")");
      return n;
    }
    if (at_aggregate()) return aggregate();
    if (t.is_kw("THIS")) return this_ref();
    if (at_prefix_term()) return restrict_expr();
    if (at_column_fn()) return column_fn();
    if (at_pred_fn()) return pred_fn();
    if (at_bitemp()) return bitemp_select();
    if (t.kind == TokenKind::Identifier) {
      if (ident_is(t, "CurrentDate") && !peek().is_punct("(")) {
        pos_++;
        mark("fn_currentdate");
        ExprPtr n = node(Expr::Kind::FnCall);
        n->fn_name = "CurrentDate";
        return n;
      }
      if (peek().is_punct("(")) return fn_call();
      return column_operand(/*allowSuffix=*/true);
    }
    expected("an expression");
  }

  ExprPtr fn_call() {
    mark("fn_call");
    ExprPtr n = node(Expr::Kind::FnCall);
    n->fn_name = expect_ident("a function name");
    expect_punct("(");
    if (!cur().is_punct(")")) {
      n->args.push_back(expr());
      while (accept_punct(",")) n->args.push_back(expr());
    }
    expect_punct(")");
    return n;
  }

  ExprPtr aggregate() {
    mark("aggregate");
    ExprPtr n = node(Expr::Kind::Aggregate);
    n->fn_name = take().lexeme; // COUNT/SUM/MIN/MAX/AVG
    expect_punct("(");
    if (cur().is_punct("*")) {
      pos_++;
      n->star = true;
      mark("aggregate_star");
    } else {
      n->args.push_back(expr());
      if (auto g = try_granularity()) {
        n->scale = g;
        mark("aggregate_scale");
      }
    }
    expect_punct(")");
    return n;
  }

  ExprPtr this_ref() {
    expect_kw("THIS");
    mark("this_ref");
    ExprPtr n = node(Expr::Kind::This);
    n->name = expect_ident("a column or alias after THIS");
    if (accept_punct(".")) {
      if (ident_is(cur(), "V")) {
        pos_++;
        n->proj = Proj::ValidElement;
      } else if (ident_is(cur(), "T")) {
        pos_++;
        n->proj = Proj::TransactionStamp;
      } else if (ident_is(cur(), "Value")) {
        pos_++;
        n->proj = Proj::Value;
      } else {
        expected("V, T or Value after '.'");
      }
      mark("proj_suffix");
    }
    return n;
  }

  // Restriction written prefix (HISTORY Status), call-style
  // (HISTORY(Initcap(Grade))) or around a parenthesized expression.
  ExprPtr restrict_expr() {
    Term t = prefix_term();
    ExprPtr n = node(Expr::Kind::Restrict);
    if (cur().is_punct("(")) {
      pos_++;
      mark("restrict_call");
      bool saved = allow_binder_;
      allow_binder_ = true;
      n->args = {expr()};
      allow_binder_ = saved;
      expect_punct(")");
    } else {
      mark("restrict_prefix");
      n->args = {column_operand(/*allowSuffix=*/false)};
    }
    n->term = t;
    return n;
  }

  bool at_column_fn() const {
    const Token &t = cur();
    if (t.is_kw("FIRST") || t.is_kw("LAST")) return true;
    if (t.is_kw("PREVIOUS") || t.is_kw("NEXT") || t.is_kw("PREVIOUS_SCALE") ||
        t.is_kw("NEXT_SCALE") || t.is_kw("EVOLUTION"))
      return true;
    return false;
  }

  ExprPtr column_fn() {
    ExprPtr n = node(Expr::Kind::ColumnFn);
    const Token &t = cur();
    if (t.is_kw("FIRST") || t.is_kw("LAST")) {
      bool first = take().is_kw("FIRST");
      if (accept_kw("EVOLUTION")) {
        n->column_fn = first ? ColumnFnKind::FirstEvolution : ColumnFnKind::LastEvolution;
        mark(first ? "colfn_first_evolution" : "colfn_last_evolution");
      } else if (first && cur().is_kw("INCREASE")) {
        // FIRST INCREASE — hand over to the predicate-function parser
        pos_++;
        mark("predfn_first_increase");
        ExprPtr p = node(Expr::Kind::PredFn);
        p->pred_fn = PredFnKind::FirstIncrease;
        p->args = {column_operand(false)};
        return p;
      } else {
        n->column_fn = first ? ColumnFnKind::First : ColumnFnKind::Last;
        mark(first ? "colfn_first" : "colfn_last");
      }
    } else if (t.is_kw("PREVIOUS") || t.is_kw("NEXT")) {
      bool prev = take().is_kw("PREVIOUS");
      n->column_fn = prev ? ColumnFnKind::Previous : ColumnFnKind::Next;
      mark(prev ? "colfn_previous" : "colfn_next");
      if (cur().kind == TokenKind::Text) {
        n->fn_value = node(Expr::Kind::Literal);
        n->fn_value->literal = Value::text(take().lexeme);
      }
    } else if (t.is_kw("PREVIOUS_SCALE") || t.is_kw("NEXT_SCALE")) {
      bool prev = take().is_kw("PREVIOUS_SCALE");
      n->column_fn = prev ? ColumnFnKind::PreviousScale : ColumnFnKind::NextScale;
      mark(prev ? "colfn_previous_scale" : "colfn_next_scale");
    } else if (t.is_kw("EVOLUTION")) {
      pos_++;
      if (accept_kw("HISTORY")) {
        n->column_fn = ColumnFnKind::EvolutionHistory;
        mark("colfn_evolution_history");
      } else if (cur().kind == TokenKind::Text) {
        n->column_fn = ColumnFnKind::EvolutionFromTo;
        n->evo_from = take().lexeme;
        expect_punct("-");
        if (cur().kind != TokenKind::Text) expected("the target value of EVOLUTION 'v1'-'v2'");
        n->evo_to = take().lexeme;
        mark("colfn_evolution_fromto");
      } else {
        n->column_fn = ColumnFnKind::Evolution;
        mark("colfn_evolution");
      }
    } else {
      expected("a column function");
    }
    if (auto d = try_dimension()) {
      n->fn_dim = d;
      mark("colfn_dim");
    }
    // operand: call style or bare column
    if (cur().is_punct("(")) {
      pos_++;
      n->args = {expr()};
      expect_punct(")");
    } else {
      n->args = {column_operand(/*allowSuffix=*/false)};
    }
    return n;
  }

  bool at_pred_fn() const {
    const Token &t = cur();
    return t.is_kw("ALWAYS") || t.is_kw("ANYTIME") || t.is_kw("INCREASE") || t.is_kw("DECREASE");
  }

  ExprPtr pred_fn() {
    ExprPtr n = node(Expr::Kind::PredFn);
    if (accept_kw("ALWAYS")) {
      n->pred_fn = PredFnKind::Always;
      mark("predfn_always");
    } else if (accept_kw("ANYTIME")) {
      expect_kw("PAST");
      n->pred_fn = PredFnKind::AnytimePast;
      mark("predfn_anytime_past");
    } else if (accept_kw("INCREASE")) {
      n->pred_fn = PredFnKind::Increase;
      mark("predfn_increase");
    } else if (accept_kw("DECREASE")) {
      n->pred_fn = PredFnKind::Decrease;
      mark("predfn_decrease");
    }
    n->args.push_back(column_operand(/*allowSuffix=*/false));
    if (n->pred_fn == PredFnKind::Always || n->pred_fn == PredFnKind::AnytimePast) {
      // embedded comparison: ALWAYS Budget >= 300
      const Token &t = cur();
      if (!(t.is_punct("=") || t.is_punct("<>") || t.is_punct("<") || t.is_punct("<=") ||
            t.is_punct(">") || t.is_punct(">=")))
        expected("a comparison operator");
      std::string op = take().lexeme;
      n->op = op == "=" ? BinOp::Eq
              : op == "<>" ? BinOp::Ne
              : op == "<" ? BinOp::Lt
              : op == "<=" ? BinOp::Le
              : op == ">" ? BinOp::Gt
                          : BinOp::Ge;
      n->args.push_back(additive());
      if (cur().is_kw("WHEN")) {
        pos_++;
        Term w;
        w.kind = WindowKind::When;
        w.cond = condition_bound(/*clausePosition=*/false);
        n->term = w;
        mark("predfn_when");
      }
    }
    return n;
  }

  bool at_bitemp() const {
    const Token &t = cur();
    return t.is_kw("RETROACTIF") || t.is_kw("RETROACTIVE") || t.is_kw("POSTACTIF") ||
           t.is_kw("POSTACTIVE") || t.is_kw("ERRONEOUS");
  }

  std::optional<BitempKind> try_bitemp_kw() {
    const Token &t = cur();
    if (t.is_kw("RETROACTIF") || t.is_kw("RETROACTIVE")) {
      pos_++;
      return BitempKind::Retroactif;
    }
    if (t.is_kw("POSTACTIF") || t.is_kw("POSTACTIVE")) {
      pos_++;
      return BitempKind::Postactif;
    }
    if (t.is_kw("ERRONEOUS")) {
      pos_++;
      return BitempKind::Erroneous;
    }
    return std::nullopt;
  }

  std::optional<Duration> try_phase() {
    if (!cur().is_kw("WITH")) return std::nullopt;
    pos_++;
    Duration d = duration_literal();
    accept_kw("SCALE"); // the paper writes WITH Value SCALE
    mark("bitemporal_phase");
    return d;
  }

  ExprPtr bitemp_select() {
    mark("bitemporal_select");
    ExprPtr n = node(Expr::Kind::Bitemporal);
    n->bitemp = *try_bitemp_kw();
    n->duration = try_phase();
    n->args = {column_operand(/*allowSuffix=*/false)};
    return n;
  }

  // A possibly qualified column reference with .V/.T projection, an
  // optional binder alias, and (when allowed) suffix windows, TIMESTAMPS
  // and granule grouping.
  ExprPtr column_operand(bool allowSuffix) {
    ExprPtr n = node(Expr::Kind::ColumnRef);
    n->name = expect_ident("a column name");
    if (cur().is_punct(".") &&
        (peek().kind == TokenKind::Identifier || peek().is_kw("VALIDITY"))) {
      pos_++;
      std::string second = cur().is_kw("VALIDITY") ? (pos_++, std::string("VALIDITY"))
                                                   : expect_ident("a column name");
      if (second == "V" || second == "VALIDITY") {
        n->proj = Proj::ValidElement;
        mark("proj_suffix");
      } else if (second == "T") {
        n->proj = Proj::TransactionStamp;
        mark("proj_suffix");
      } else {
        n->qualifier = n->name;
        n->name = second;
        mark("qualified_column");
        if (accept_punct(".")) {
          if (ident_is(cur(), "V")) {
            pos_++;
            n->proj = Proj::ValidElement;
          } else if (ident_is(cur(), "T")) {
            pos_++;
            n->proj = Proj::TransactionStamp;
          } else {
            expected("V or T");
          }
          mark("proj_suffix");
        }
      }
    }
    if (allow_binder_ && cur().kind == TokenKind::Identifier && !ident_is(cur(), "U")) {
      n->bind_alias = take().lexeme;
      mark("column_binder");
    }
    if (!allowSuffix) return n;

    // TIMESTAMPS 'v'
    if (cur().is_kw("TIMESTAMPS")) {
      pos_++;
      mark("colfn_timestamps");
      ExprPtr f = node(Expr::Kind::ColumnFn);
      f->column_fn = ColumnFnKind::Timestamps;
      f->args = {n};
      if (cur().kind != TokenKind::Text && cur().kind != TokenKind::Number)
        expected("a value literal after TIMESTAMPS");
      f->fn_value = node(Expr::Kind::Literal);
      f->fn_value->literal = cur().kind == TokenKind::Text
                                 ? Value::text(take().lexeme)
                                 : Value::integer(std::stoll(take().lexeme));
      return f;
    }
    // suffix windows: @, BETWEEN, WHEN, SINCE/BEFORE/AFTER, brackets
    if (at_suffix_term() && !(cur().is_punct("[") && !peek().is_kw("SELECT") &&
                              peek().kind != TokenKind::Text)) {
      if (auto t = suffix_term(/*clausePosition=*/false)) {
        mark("restrict_suffix");
        ExprPtr r = node(Expr::Kind::Restrict);
        r->term = t;
        r->args = {n};
        return r;
      }
    }
    // granule grouping suffix: Budget DECADE
    if (cur().kind == TokenKind::Keyword) {
      if (auto g = granularity_from_name(cur().lexeme)) {
        pos_++;
        mark("granule_suffix");
        ExprPtr r = node(Expr::Kind::Granule);
        r->scale = g;
        r->args = {n};
        return r;
      }
    }
    return n;
  }

  // --- SELECT ---------------------------------------------------------------

  SelectPtr select_ptr() {
    auto s = std::make_shared<Select>();
    s->core = select_core();
    while (cur().is_kw("UNION") || cur().is_kw("INTERSECT") || cur().is_kw("EXCEPT")) {
      mark("set_op");
      Select::SetOp op = cur().is_kw("UNION") ? Select::SetOp::Union
                         : cur().is_kw("INTERSECT") ? Select::SetOp::Intersect
                                                    : Select::SetOp::Except;
      pos_++;
      s->parts.push_back({op, select_core()});
    }
    return s;
  }

  Statement select() { return select_ptr(); }

  SelectCore select_core() {
    expect_kw("SELECT");
    mark("select_core");
    SelectCore core;
    if (accept_punct("*")) {
      core.star = true;
      mark("select_star");
    } else {
      core.items.push_back(select_item());
      while (accept_punct(",")) core.items.push_back(select_item());
    }
    expect_kw("FROM");
    core.from = from_item();
    while (true) {
      size_t save = pos_;
      std::optional<Term> preTerm;
      std::optional<BitempKind> bitemp;
      if (at_prefix_term() && (peek().is_kw("NATURAL") || peek().is_kw("CROSS")) ) {
        preTerm = prefix_term();
        mark("join_prefix_term");
      } else if (at_bitemp()) {
        bitemp = try_bitemp_kw();
        mark("join_bitemporal");
      }
      if (cur().is_kw("NATURAL") || cur().is_kw("CROSS")) {
        Join j;
        j.kind = cur().is_kw("NATURAL") ? Join::Kind::Natural : Join::Kind::Cross;
        mark(j.kind == Join::Kind::Natural ? "natural_join" : "cross_join");
        pos_++;
        expect_kw("JOIN");
        j.term = preTerm;
        j.bitemp = bitemp;
        if (bitemp) j.phase = try_phase();
        if (!j.term && at_suffix_term()) {
          j.term = suffix_term(/*clausePosition=*/true);
          if (j.term) {
            mark(j.term->subquery ? "join_subquery_window"
                                  : j.term->bracket ? "join_bracket_window" : "join_suffix_term");
          }
        }
        j.right.table = expect_name("a table name");
        if (cur().kind == TokenKind::Identifier && !ident_is(cur(), "V") && !ident_is(cur(), "T"))
          j.right.alias = take().lexeme;
        core.joins.push_back(std::move(j));
        continue;
      }
      pos_ = save;
      break;
    }
    if (accept_kw("WHERE")) {
      mark("where_clause");
      core.where = expr();
    }
    if (accept_kw("GROUP")) {
      expect_kw("BY");
      mark("group_by");
      while (true) {
        if (auto g = try_granularity()) {
          core.group_scale = g;
          mark("group_scale");
        } else {
          core.group_by.push_back(column_operand(false));
        }
        if (!accept_punct(",")) break;
      }
    }
    if (accept_kw("HAVING")) {
      mark("having_clause");
      core.having = expr();
    }
    return core;
  }

  SelectItem select_item() {
    mark("select_item");
    SelectItem item;
    item.expr = expr();
    if (accept_kw("AS")) {
      item.alias = expect_ident("an alias");
      mark("select_item_alias");
    } else if (cur().kind == TokenKind::Identifier) {
      item.alias = take().lexeme;
      mark("select_item_alias");
    }
    return item;
  }

  FromItem from_item() {
    mark("from_item");
    FromItem f;
    std::optional<Term> term;
    if (at_prefix_term()) {
      term = prefix_term();
      mark("from_prefix_term");
    }
    f.table = expect_name("a table name");
    if (cur().kind == TokenKind::Identifier && !ident_is(cur(), "V") && !ident_is(cur(), "T"))
      f.alias = take().lexeme;
    // HISTORY/PAST/FUTURE ahead of Natural/Cross Join belongs to the join
    bool joinTermAhead =
        at_prefix_term() && (peek().is_kw("NATURAL") || peek().is_kw("CROSS"));
    if (!term && !joinTermAhead && at_suffix_term()) {
      term = suffix_term(/*clausePosition=*/true);
      if (term) {
        mark(term->subquery ? "from_subquery_window"
                            : term->bracket ? "from_bracket_window" : "from_suffix_term");
      }
    }
    f.term = term;
    return f;
  }

  // --- DML --------------------------------------------------------------------

  Statement insert() {
    expect_kw("INSERT");
    expect_kw("INTO");
    mark("insert");
    Insert ins;
    ins.table = expect_name("a table name");
    expect_kw("VALUES");
    ins.rows.push_back(insert_row());
    while (accept_punct(",")) {
      ins.rows.push_back(insert_row());
      mark("insert_multi_row");
    }
    return ins;
  }

  InsertRow insert_row() {
    InsertRow row;
    expect_punct("(");
    if (!cur().is_punct(")")) {
      row.values.push_back(insert_value());
      while (accept_punct(",")) row.values.push_back(insert_value());
    }
    expect_punct(")");
    if (cur().is_punct("[")) {
      row.row_valid = element_literal(Dimension::Valid);
      mark("insert_row_valid");
    }
    return row;
  }

  InsertValue insert_value() {
    InsertValue v;
    if (accept_punct("{")) {
      v.braced = true;
      mark("insert_braced_value");
      if (!cur().is_punct("}")) {
        v.entries.push_back(insert_entry());
        while (accept_punct(",")) v.entries.push_back(insert_entry());
      }
      expect_punct("}");
      return v;
    }
    InsertValue::Entry e;
    e.value = additive();
    if (cur().is_punct("[")) {
      e.element = element_literal(Dimension::Valid);
      mark("insert_entry_element");
    }
    v.entries.push_back(std::move(e));
    return v;
  }

  InsertValue::Entry insert_entry() {
    InsertValue::Entry e;
    e.value = additive();
    if (cur().is_punct("[")) {
      e.element = element_literal(Dimension::Valid);
      mark("insert_entry_element");
    }
    return e;
  }

  Statement update() {
    expect_kw("UPDATE");
    std::string table = expect_name("a table name");
    if (accept_kw("SET")) {
      mark("update_set");
      UpdateSet u;
      u.table = table;
      do {
        std::string col = expect_ident("a column name");
        expect_punct("=");
        u.assignments.emplace_back(col, expr());
      } while (accept_punct(","));
      if (accept_kw("WHERE")) u.where = expr();
      return u;
    }
    if (accept_kw("TAG")) {
      expect_kw("ON");
      mark("tag_on");
      UpdateTagOn u;
      u.table = table;
      do {
        TagOnItem item;
        item.column = expect_ident("a column name");
        if (accept_punct("{")) {
          item.braced = true;
          mark("tag_on_braced");
          item.entries.push_back(insert_entry());
          while (accept_punct(",")) item.entries.push_back(insert_entry());
          expect_punct("}");
        } else {
          item.entries.push_back(insert_entry());
        }
        u.items.push_back(std::move(item));
      } while (accept_punct(","));
      if (accept_kw("WHERE")) u.where = expr();
      return u;
    }
    if (accept_kw("CORRECT")) {
      UpdateCorrect u;
      u.table = table;
      if (accept_kw("VALIDITY")) {
        u.row_validity = true;
        u.new_element = element_literal(Dimension::Valid);
        mark("correct_validity");
      } else {
        u.column = expect_ident("a column name");
        if (cur().is_punct("[")) {
          u.target_element = element_literal(Dimension::Valid);
          expect_punct("=");
          u.new_value = additive();
          if (cur().is_punct("[")) u.new_element = element_literal(Dimension::Valid);
          mark("correct_both");
        } else if (accept_punct("=")) {
          u.new_value = additive();
          if (cur().is_punct("[")) u.target_element = element_literal(Dimension::Valid);
          mark("correct_value");
        } else {
          u.target_value = additive();
          if (cur().is_punct("[")) u.new_element = element_literal(Dimension::Valid);
          mark("correct_timestamp");
        }
      }
      if (accept_kw("WHERE")) u.where = expr();
      return u;
    }
    expected("SET, TAG ON or CORRECT");
  }

  Statement del() {
    expect_kw("DELETE");
    expect_kw("FROM");
    mark("delete_stmt");
    Delete d;
    d.table = expect_name("a table name");
    if (accept_kw("WHERE")) d.where = expr();
    return d;
  }

  Statement vacuum() {
    expect_kw("VACUUM");
    mark("vacuum_stmt");
    Vacuum v;
    if (cur().kind == TokenKind::Identifier) {
      v.columns.push_back(take().lexeme);
      while (accept_punct(",")) v.columns.push_back(expect_ident("a column name"));
      mark("vacuum_columns");
    }
    expect_kw("FROM");
    v.table = expect_name("a table name");
    expect_kw("WHERE"); // an unfiltered VACUUM would silently drop history
    v.where = expr();
    return v;
  }

  // --- DDL ---------------------------------------------------------------------

  Statement create_table() {
    expect_kw("CREATE");
    expect_kw("TABLE");
    mark("create_table");
    CreateTable ct;
    ct.def.name = expect_name("a table name");
    expect_punct("(");
    do {
      ct.def.columns.push_back(column_def(ct.def));
    } while (accept_punct(","));
    expect_punct(")");
    table_options(ct.def);
    return ct;
  }

  ColumnDef column_def(TableDef &table) {
    ColumnDef c;
    c.name = expect_ident("a column name");
    const Token &ty = cur();
    if (!(ty.is_kw("TEXT") || ty.is_kw("INTEGER") || ty.is_kw("INT") || ty.is_kw("DECIMAL") ||
          ty.is_kw("DATE")))
      expected("a column type");
    c.type = *value_type_from_name(take().lexeme);
    bool validTime = false, txTime = false;
    while (true) {
      if (cur().is_kw("VALID")) {
        pos_++;
        expect_kw("TIME");
        expect_kw("GRANULARITY");
        auto g = try_granularity();
        if (!g) expected("a granularity");
        c.valid_granularity = *g;
        validTime = true;
        mark("column_valid_time");
      } else if (cur().is_kw("TRANSACTION")) {
        pos_++;
        expect_kw("TIME");
        txTime = true;
        mark("column_transaction_time");
      } else if (cur().is_kw("MULTIPLICITY")) {
        pos_++;
        if (cur().kind != TokenKind::Number) expected("a multiplicity bound");
        c.multiplicity = std::stoi(take().lexeme);
        mark("column_multiplicity");
      } else if (cur().is_kw("REFERENCES")) {
        pos_++;
        ForeignKey fk;
        fk.table = expect_name("a table name");
        expect_punct("(");
        fk.column = expect_ident("a column name");
        expect_punct(")");
        if (accept_kw("ON")) {
          expect_kw("DELETE");
          if (accept_kw("CASCADE"))
            fk.on_delete = ReferentialAction::Cascade;
          else if (accept_kw("CORRECT")) {
            expect_kw("NULL");
            fk.on_delete = ReferentialAction::CorrectNull;
          } else if (accept_kw("RESTRICT"))
            fk.on_delete = ReferentialAction::Restrict;
          else
            expected("CASCADE, CORRECT NULL or RESTRICT");
        }
        c.references = fk;
        mark("column_references");
      } else if (cur().is_kw("DEFAULT")) {
        pos_++;
        c.default_valid = element_literal(Dimension::Valid);
        mark("column_default");
      } else if (cur().is_kw("PRIMARY") || cur().is_kw("KEY")) {
        accept_kw("PRIMARY");
        expect_kw("KEY");
        table.primary_key = c.name;
        mark("column_primary_key");
      } else if (cur().is_kw("VACUUM")) {
        pos_++;
        vacuum_option(c.vacuum_keep, c.vacuum_lifecycle);
      } else {
        break;
      }
    }
    if (validTime && txTime)
      c.kind = TemporalKind::VT;
    else if (validTime)
      c.kind = TemporalKind::V;
    else if (txTime)
      c.kind = TemporalKind::T;
    return c;
  }

  void table_options(TableDef &def) {
    bool validTime = false, txTime = false;
    while (true) {
      if (cur().is_kw("VALID")) {
        pos_++;
        expect_kw("TIME");
        expect_kw("GRANULARITY");
        auto g = try_granularity();
        if (!g) expected("a granularity");
        def.row_granularity = *g;
        validTime = true;
        mark("table_valid_time");
      } else if (cur().is_kw("TRANSACTION")) {
        pos_++;
        expect_kw("TIME");
        txTime = true;
        mark("table_transaction_time");
      } else if (cur().is_kw("VACUUM")) {
        pos_++;
        vacuum_option(def.vacuum_keep, def.vacuum_lifecycle);
      } else {
        break;
      }
    }
    if (validTime && txTime)
      def.row_kind = TemporalKind::VT;
    else if (validTime)
      def.row_kind = TemporalKind::V;
    else if (txTime)
      def.row_kind = TemporalKind::T;
  }

  void vacuum_option(std::optional<int> &keep, std::optional<Duration> &lifecycle) {
    if (accept_kw("KEEP")) {
      if (cur().kind != TokenKind::Number) expected("a count after VACUUM KEEP");
      keep = std::stoi(take().lexeme);
      mark("vacuum_keep");
    } else if (accept_kw("LIFECYCLE")) {
      lifecycle = duration_literal();
      mark("vacuum_lifecycle");
    } else {
      expected("KEEP or LIFECYCLE");
    }
  }

  bool allow_binder_ = false;
};

} // namespace

ExprPtr ast::make_expr(Expr::Kind kind) {
  auto e = std::make_shared<Expr>();
  e->kind = kind;
  return e;
}

const char *ast::binop_name(BinOp op) {
  switch (op) {
  case BinOp::Add: return "+";
  case BinOp::Sub: return "-";
  case BinOp::Mul: return "*";
  case BinOp::Div: return "/";
  case BinOp::Eq: return "=";
  case BinOp::Ne: return "<>";
  case BinOp::Lt: return "<";
  case BinOp::Le: return "<=";
  case BinOp::Gt: return ">";
  case BinOp::Ge: return ">=";
  case BinOp::And: return "AND";
  case BinOp::Or: return "OR";
  }
  return "?";
}

const char *ast::bitemp_name(BitempKind k) {
  switch (k) {
  case BitempKind::Retroactif: return "RETROACTIF";
  case BitempKind::Postactif: return "POSTACTIF";
  case BitempKind::Erroneous: return "ERRONEOUS";
  }
  return "?";
}

ast::Statement parse_statement(const std::string &src) {
  Parser p(tokenize(src));
  ast::Statement s = p.statement();
  p.expect_terminator();
  p.expect_end();
  return s;
}

std::vector<ast::Statement> parse_script(const std::string &src) {
  Parser p(tokenize(src));
  std::vector<ast::Statement> out;
  while (!p.at_end()) {
    out.push_back(p.statement());
    p.expect_terminator();
  }
  return out;
}

} // namespace chronoql
