#include <sstream>

#include "chronoql/ast.hpp"

namespace chronoql {

using namespace ast;

namespace {

std::string quote_text(const std::string &s) {
  std::string out = "'";
  for (char c : s) {
    out.push_back(c);
    if (c == '\'') out.push_back('\'');
  }
  out.push_back('\'');
  return out;
}

std::string print_value(const Value &v) {
  if (v.is_text()) return quote_text(v.as_text());
  return v.to_string();
}

int precedence(const Expr &e) {
  if (e.kind != Expr::Kind::Binary) return 6;
  switch (e.op) {
  case BinOp::Or: return 1;
  case BinOp::And: return 2;
  case BinOp::Eq:
  case BinOp::Ne:
  case BinOp::Lt:
  case BinOp::Le:
  case BinOp::Gt:
  case BinOp::Ge: return 3;
  case BinOp::Add:
  case BinOp::Sub: return 4;
  case BinOp::Mul:
  case BinOp::Div: return 5;
  }
  return 6;
}

class Printer {
public:
  std::string statement(const Statement &s) {
    std::ostringstream os;
    std::visit([&](const auto &v) { print(os, v); }, s);
    os << ";";
    return os.str();
  }

  std::string expression(const ExprPtr &e) {
    std::ostringstream os;
    expr(os, *e, 0);
    return os.str();
  }

private:
  void print(std::ostream &os, const SelectPtr &s) {
    core(os, s->core);
    for (const auto &part : s->parts) {
      os << (part.op == Select::SetOp::Union ? " UNION "
             : part.op == Select::SetOp::Intersect ? " INTERSECT "
                                                   : " EXCEPT ");
      core(os, part.core);
    }
  }

  void core(std::ostream &os, const SelectCore &c) {
    os << "SELECT ";
    if (c.star) {
      os << "*";
    } else {
      for (size_t i = 0; i < c.items.size(); i++) {
        if (i) os << ", ";
        expr(os, *c.items[i].expr, 0);
        if (!c.items[i].alias.empty()) os << " " << c.items[i].alias;
      }
    }
    os << " FROM ";
    from(os, c.from);
    for (const auto &j : c.joins) {
      os << " ";
      if (j.bitemp) {
        os << bitemp_name(*j.bitemp);
        if (j.phase) os << " WITH " << j.phase->to_string() << " SCALE";
        os << " ";
      } else if (j.term && is_prefix(*j.term)) {
        term_prefix(os, *j.term);
        os << " ";
      }
      os << (j.kind == Join::Kind::Natural ? "Natural Join " : "Cross Join ");
      if (j.term && !is_prefix(*j.term)) {
        term_suffix(os, *j.term);
        os << " ";
      }
      os << j.right.table;
      if (!j.right.alias.empty()) os << " " << j.right.alias;
    }
    if (c.where) {
      os << " WHERE ";
      expr(os, *c.where, 0);
    }
    if (!c.group_by.empty() || c.group_scale) {
      os << " GROUP BY ";
      bool first = true;
      for (const auto &g : c.group_by) {
        if (!first) os << ", ";
        first = false;
        expr(os, *g, 0);
      }
      if (c.group_scale) {
        if (!first) os << ", ";
        os << granularity_name(*c.group_scale);
      }
    }
    if (c.having) {
      os << " HAVING ";
      expr(os, *c.having, 0);
    }
  }

  void from(std::ostream &os, const FromItem &f) {
    if (f.term && is_prefix(*f.term)) {
      term_prefix(os, *f.term);
      os << " ";
    }
    os << f.table;
    if (!f.alias.empty()) os << " " << f.alias;
    if (f.term && !is_prefix(*f.term)) {
      os << " ";
      term_suffix(os, *f.term);
    }
  }

  static bool is_prefix(const Term &t) {
    return t.kind == WindowKind::History || t.kind == WindowKind::Past ||
           t.kind == WindowKind::Future;
  }

  void term_prefix(std::ostream &os, const Term &t) {
    os << window_kind_name(t.kind);
    if (t.dim_explicit) os << (t.dim == Dimension::Valid ? " V" : " T");
  }

  void term_suffix(std::ostream &os, const Term &t) {
    if (is_prefix(t)) {
      term_prefix(os, t);
      return;
    }
    if (t.subquery) {
      os << "[";
      print(os, t.subquery);
      os << "]";
    } else if (t.bracket) {
      os << "['" << t.d1->to_string() << "'-'";
      if (t.kind == WindowKind::Since)
        os << (t.dim == Dimension::Transaction ? "now" : "uc");
      else
        os << t.d2->to_string();
      os << "']";
    } else {
      switch (t.kind) {
      case WindowKind::At:
        os << "@ '" << t.d1->to_string() << "'";
        break;
      case WindowKind::Between:
        os << "BETWEEN '" << t.d1->to_string() << "' AND '" << t.d2->to_string() << "'";
        break;
      case WindowKind::When:
        os << "WHEN ";
        expr(os, *t.cond, 3);
        break;
      case WindowKind::Since:
      case WindowKind::Before:
      case WindowKind::After:
        os << window_kind_name(t.kind) << " ";
        if (t.d1)
          os << "'" << t.d1->to_string() << "'";
        else
          expr(os, *t.cond, 3);
        break;
      default:
        break;
      }
    }
    if (t.dim_explicit) os << (t.dim == Dimension::Valid ? " V" : " T");
  }

  void column_ref(std::ostream &os, const Expr &e) {
    if (!e.qualifier.empty()) os << e.qualifier << ".";
    os << e.name;
    if (e.proj == Proj::ValidElement) os << ".V";
    if (e.proj == Proj::TransactionStamp) os << ".T";
    if (!e.bind_alias.empty()) os << " " << e.bind_alias;
  }

  void expr(std::ostream &os, const Expr &e, int parentPrec) {
    switch (e.kind) {
    case Expr::Kind::Literal:
      os << print_value(e.literal);
      return;
    case Expr::Kind::InstantLit:
      os << "'" << e.instant_text << "'";
      return;
    case Expr::Kind::DurationLit:
      os << e.duration->to_string();
      return;
    case Expr::Kind::ColumnRef:
      column_ref(os, e);
      return;
    case Expr::Kind::Star:
      os << "*";
      return;
    case Expr::Kind::Unary:
      os << "NOT ";
      expr(os, *e.args[0], 6);
      return;
    case Expr::Kind::Binary: {
      int prec = precedence(e);
      bool parens = prec < parentPrec ||
                    (prec == parentPrec && prec == 3); // no comparison chaining
      if (parens) os << "(";
      expr(os, *e.args[0], prec);
      os << " " << binop_name(e.op) << " ";
      // right operand of - and / needs protection from reassociation
      int rightPrec = (e.op == BinOp::Sub || e.op == BinOp::Div) ? prec + 1 : prec;
      expr(os, *e.args[1], rightPrec);
      if (parens) os << ")";
      return;
    }
    case Expr::Kind::FnCall:
      os << e.fn_name;
      if (!(e.fn_name == "CurrentDate" && e.args.empty())) {
        os << "(";
        for (size_t i = 0; i < e.args.size(); i++) {
          if (i) os << ", ";
          expr(os, *e.args[i], 0);
        }
        os << ")";
      }
      return;
    case Expr::Kind::Aggregate: {
      std::string fn = e.fn_name;
      for (size_t i = 1; i < fn.size(); i++)
        fn[i] = static_cast<char>(std::tolower(static_cast<unsigned char>(fn[i])));
      os << fn << "(";
      if (e.star)
        os << "*";
      else {
        expr(os, *e.args[0], 0);
        if (e.scale) os << " " << granularity_name(*e.scale);
      }
      os << ")";
      return;
    }
    case Expr::Kind::Restrict:
      if (is_prefix(*e.term)) {
        term_prefix(os, *e.term);
        os << " ";
        expr(os, *e.args[0], 6);
      } else {
        expr(os, *e.args[0], 6);
        os << " ";
        term_suffix(os, *e.term);
      }
      return;
    case Expr::Kind::ColumnFn:
      switch (e.column_fn) {
      case ColumnFnKind::First: os << "FIRST"; break;
      case ColumnFnKind::Last: os << "LAST"; break;
      case ColumnFnKind::Previous: os << "PREVIOUS"; break;
      case ColumnFnKind::Next: os << "NEXT"; break;
      case ColumnFnKind::PreviousScale: os << "PREVIOUS_SCALE"; break;
      case ColumnFnKind::NextScale: os << "NEXT_SCALE"; break;
      case ColumnFnKind::EvolutionHistory: os << "EVOLUTION HISTORY"; break;
      case ColumnFnKind::Evolution: os << "EVOLUTION"; break;
      case ColumnFnKind::FirstEvolution: os << "FIRST EVOLUTION"; break;
      case ColumnFnKind::LastEvolution: os << "LAST EVOLUTION"; break;
      case ColumnFnKind::EvolutionFromTo:
        os << "EVOLUTION " << quote_text(e.evo_from) << "-" << quote_text(e.evo_to);
        break;
      case ColumnFnKind::Timestamps:
        expr(os, *e.args[0], 6);
        os << " TIMESTAMPS " << print_value(e.fn_value->literal);
        return;
      }
      if ((e.column_fn == ColumnFnKind::Previous || e.column_fn == ColumnFnKind::Next) &&
          e.fn_value)
        os << " " << print_value(e.fn_value->literal);
      if (e.fn_dim) os << (*e.fn_dim == Dimension::Valid ? " V" : " T");
      os << " ";
      expr(os, *e.args[0], 6);
      return;
    case Expr::Kind::PredFn:
      switch (e.pred_fn) {
      case PredFnKind::Always: os << "ALWAYS "; break;
      case PredFnKind::AnytimePast: os << "ANYTIME PAST "; break;
      case PredFnKind::Increase: os << "INCREASE "; break;
      case PredFnKind::FirstIncrease: os << "FIRST INCREASE "; break;
      case PredFnKind::Decrease: os << "DECREASE "; break;
      }
      expr(os, *e.args[0], 6);
      if (e.args.size() > 1) {
        os << " " << binop_name(e.op) << " ";
        expr(os, *e.args[1], 4);
      }
      if (e.term) {
        os << " WHEN ";
        expr(os, *e.term->cond, 3);
      }
      return;
    case Expr::Kind::Bitemporal:
      os << bitemp_name(e.bitemp);
      if (e.duration) os << " WITH " << e.duration->to_string() << " SCALE";
      os << " ";
      expr(os, *e.args[0], 6);
      return;
    case Expr::Kind::This:
      os << "THIS " << e.name;
      if (e.proj == Proj::ValidElement) os << ".V";
      if (e.proj == Proj::TransactionStamp) os << ".T";
      return;
    case Expr::Kind::InHistory:
      expr(os, *e.args[0], 4);
      os << " IN HISTORY(";
      expr(os, *e.args[1], 0);
      os << ")";
      return;
    case Expr::Kind::InSelect:
      expr(os, *e.args[0], 4);
      os << " IN (";
      print(os, e.subquery);
      os << ")";
      return;
    case Expr::Kind::Exists:
      if (e.negated) os << "NOT ";
      os << "EXISTS (";
      print(os, e.subquery);
      os << ")";
      return;
    case Expr::Kind::ScalarSubquery:
      os << "(";
      print(os, e.subquery);
      os << ")";
      return;
    case Expr::Kind::DurationCmp:
      expr(os, *e.args[0], 4);
      os << " LonguestThen " << e.duration->to_string();
      return;
    case Expr::Kind::Granule:
      expr(os, *e.args[0], 6);
      os << " " << granularity_name(*e.scale);
      return;
    }
  }

  void entry(std::ostream &os, const InsertValue::Entry &en) {
    expr(os, *en.value, 0);
    if (en.element) os << " " << en.element->to_string();
  }

  void print(std::ostream &os, const Insert &s) {
    os << "INSERT INTO " << s.table << " VALUES ";
    for (size_t r = 0; r < s.rows.size(); r++) {
      if (r) os << ", ";
      os << "(";
      const auto &row = s.rows[r];
      for (size_t i = 0; i < row.values.size(); i++) {
        if (i) os << ", ";
        const InsertValue &v = row.values[i];
        if (v.braced) {
          os << "{";
          for (size_t k = 0; k < v.entries.size(); k++) {
            if (k) os << ", ";
            entry(os, v.entries[k]);
          }
          os << "}";
        } else {
          entry(os, v.entries[0]);
        }
      }
      os << ")";
      if (row.row_valid) os << " " << row.row_valid->to_string();
    }
  }

  void print(std::ostream &os, const UpdateSet &s) {
    os << "UPDATE " << s.table << " SET ";
    for (size_t i = 0; i < s.assignments.size(); i++) {
      if (i) os << ", ";
      os << s.assignments[i].first << " = ";
      expr(os, *s.assignments[i].second, 0);
    }
    where(os, s.where);
  }

  void print(std::ostream &os, const UpdateTagOn &s) {
    os << "UPDATE " << s.table << " TAG ON ";
    for (size_t i = 0; i < s.items.size(); i++) {
      if (i) os << ", ";
      os << s.items[i].column << " ";
      if (s.items[i].braced) {
        os << "{";
        for (size_t k = 0; k < s.items[i].entries.size(); k++) {
          if (k) os << ", ";
          entry(os, s.items[i].entries[k]);
        }
        os << "}";
      } else {
        entry(os, s.items[i].entries[0]);
      }
    }
    where(os, s.where);
  }

  void print(std::ostream &os, const UpdateCorrect &s) {
    os << "UPDATE " << s.table << " CORRECT ";
    if (s.row_validity) {
      os << "VALIDITY " << s.new_element->to_string();
    } else {
      os << s.column;
      if (s.target_element && s.new_value) {
        os << " " << s.target_element->to_string() << " = ";
        expr(os, *s.new_value, 0);
        if (s.new_element) os << " " << s.new_element->to_string();
      } else if (s.new_value) {
        os << " = ";
        expr(os, *s.new_value, 0);
        if (s.target_element) os << " " << s.target_element->to_string();
      } else {
        os << " ";
        expr(os, *s.target_value, 0);
        if (s.new_element) os << " " << s.new_element->to_string();
      }
    }
    where(os, s.where);
  }

  void print(std::ostream &os, const Delete &s) {
    os << "DELETE FROM " << s.table;
    where(os, s.where);
  }

  void print(std::ostream &os, const Vacuum &s) {
    os << "VACUUM ";
    for (size_t i = 0; i < s.columns.size(); i++) {
      if (i) os << ", ";
      os << s.columns[i];
    }
    if (!s.columns.empty()) os << " ";
    os << "FROM " << s.table;
    where(os, s.where);
  }

  void print(std::ostream &os, const CreateTable &s) {
    const TableDef &d = s.def;
    os << "CREATE TABLE " << d.name << " (";
    for (size_t i = 0; i < d.columns.size(); i++) {
      if (i) os << ", ";
      const ColumnDef &c = d.columns[i];
      os << c.name << " " << value_type_name(c.type);
      if (has_valid(c.kind))
        os << " VALID TIME GRANULARITY " << granularity_name(c.valid_granularity);
      if (has_transaction(c.kind)) os << " TRANSACTION TIME";
      if (c.multiplicity != 1) os << " MULTIPLICITY " << c.multiplicity;
      if (c.references) {
        os << " REFERENCES " << c.references->table << "(" << c.references->column
           << ") ON DELETE " << referential_action_name(c.references->on_delete);
      }
      if (c.default_valid) os << " DEFAULT " << c.default_valid->to_string();
      if (c.vacuum_keep) os << " VACUUM KEEP " << *c.vacuum_keep;
      if (c.vacuum_lifecycle) os << " VACUUM LIFECYCLE " << c.vacuum_lifecycle->to_string();
      if (c.name == d.primary_key) os << " PRIMARY KEY";
    }
    os << ")";
    if (has_valid(d.row_kind))
      os << " VALID TIME GRANULARITY " << granularity_name(d.row_granularity);
    if (has_transaction(d.row_kind)) os << " TRANSACTION TIME";
    if (d.vacuum_keep) os << " VACUUM KEEP " << *d.vacuum_keep;
    if (d.vacuum_lifecycle) os << " VACUUM LIFECYCLE " << d.vacuum_lifecycle->to_string();
  }

  void where(std::ostream &os, const ExprPtr &w) {
    if (w) {
      os << " WHERE ";
      std::ostringstream tmp;
      expr(tmp, *w, 0);
      os << tmp.str();
    }
  }
};

} // namespace

std::string pretty_print(const ast::Statement &stmt) { return Printer().statement(stmt); }

std::string pretty_print(const ast::ExprPtr &e) { return Printer().expression(e); }

} // namespace chronoql
