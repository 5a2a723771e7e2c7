#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "chronoql/storage.hpp"

using namespace chronoql;

namespace {

Instant year(int y) { return Instant::from_fields(Granularity::Year, y); }
Instant sec(int y, int mo, int d, int h = 0, int mi = 0, int s = 0) {
  return Instant::from_fields(Granularity::Second, y, mo, d, h, mi, s);
}

TemporalElement elem(const std::string &lit) {
  return TemporalElement::parse(lit, Dimension::Valid);
}

ColumnDef col(std::string name, ValueType t, TemporalKind k = TemporalKind::None,
              Granularity g = Granularity::Year) {
  ColumnDef c;
  c.name = std::move(name);
  c.type = t;
  c.kind = k;
  c.valid_granularity = g;
  return c;
}

TableDef teacher_def() {
  TableDef t;
  t.name = "TEACHER";
  t.row_kind = TemporalKind::V;
  t.row_granularity = Granularity::Year;
  t.columns = {col("TeacherNum", ValueType::Integer),
               col("Status", ValueType::Text, TemporalKind::VT),
               col("Grade", ValueType::Text, TemporalKind::V)};
  t.primary_key = "TeacherNum";
  return t;
}

VersionedEntry entry(Value v, const std::string &validLit,
                     const std::string &txLit = "",
                     TerminationCause cause = TerminationCause::Open) {
  VersionedEntry e;
  e.value = std::move(v);
  if (!validLit.empty()) e.valid = elem(validLit);
  if (!txLit.empty()) e.transaction = Period::parse(txLit, Dimension::Transaction);
  e.cause = cause;
  return e;
}

// The Table-1 teacher 777 shape, built directly against the store.
Database table1_db() {
  Database db;
  db.define_table(teacher_def());
  Table &t = *db.find_table("TEACHER");
  Row r;
  r.cells.resize(3);
  r.valid = elem("['2002'-'uc']");
  r.cells[0].push_back(entry(Value::integer(777), ""));
  r.cells[1].push_back(entry(Value::text("T"), "['2002'-'2005']", "['10/1/2002 09:00:00'-'now']"));
  r.cells[1].push_back(entry(Value::text("PS"), "['2005'-'2009']",
                             "['15/3/2006 10:30:00'-'20/3/2006 11:00:00']",
                             TerminationCause::Correction));
  r.cells[1].push_back(entry(Value::text("PS"), "['2005'-'2008']", "['20/3/2006 11:00:00'-'now']"));
  r.cells[1].push_back(entry(Value::text("R"), "['2008'-'uc']", "['5/11/2010 08:15:00'-'now']"));
  r.cells[2].push_back(entry(Value::text("AP"), "['2004'-'2010']"));
  r.cells[2].push_back(entry(Value::text("Pr"), "['2010'-'uc']"));
  t.rows.push_back(std::move(r));

  Row r2;
  r2.cells.resize(3);
  r2.valid = elem("['2010'-'uc']");
  r2.cells[0].push_back(entry(Value::integer(555), ""));
  r2.cells[1].push_back(entry(Value::text("PS"), "['2010'-'uc']", "['20/12/2010 14:45:00'-'now']"));
  r2.cells[2].push_back(entry(Value::text("AP"), "['2010'-'uc']"));
  t.rows.push_back(std::move(r2));

  db.clock().restore(TransactionClock::Mode::Manual, sec(2010, 12, 20, 14, 45, 0));
  return db;
}

} // namespace

TEST_CASE("define_table validations") {
  Database db;
  db.define_table(teacher_def());
  CHECK(db.find_table("TEACHER") != nullptr);

  SUBCASE("duplicate name") {
    CHECK_THROWS_WITH_AS(db.define_table(teacher_def()), doctest::Contains("DuplicateTable"),
                         Error);
  }
  SUBCASE("temporal primary key") {
    TableDef bad = teacher_def();
    bad.name = "BAD";
    bad.columns[0].kind = TemporalKind::V;
    CHECK_THROWS_WITH_AS(db.define_table(bad), doctest::Contains("TemporalPrimaryKey"), Error);
  }
  SUBCASE("unknown foreign key target") {
    TableDef bad = teacher_def();
    bad.name = "BAD";
    bad.columns[2].references = ForeignKey{"NOPE", "X", ReferentialAction::Restrict};
    CHECK_THROWS_WITH_AS(db.define_table(bad), doctest::Contains("UnknownTarget"), Error);
  }
  SUBCASE("row-timestamped table with plain columns is fine") {
    TableDef audit;
    audit.name = "AUDIT_MOD";
    audit.row_kind = TemporalKind::V;
    audit.columns = {col("AffectationNum", ValueType::Integer),
                     col("Coefficient", ValueType::Decimal)};
    audit.primary_key = "AffectationNum";
    db.define_table(audit);
    CHECK(db.find_table("AUDIT_MOD") != nullptr);
  }
}

TEST_CASE("current_view reduces to open, valid-today entries") {
  Database db = table1_db();
  Instant today = Instant::parse("15/6/2011");

  auto view = db.current_view("TEACHER", today);
  REQUIRE(view.size() == 2);
  CHECK(view[0][0] == std::vector<Value>{Value::integer(777)});
  CHECK(view[0][1] == std::vector<Value>{Value::text("R")});
  CHECK(view[0][2] == std::vector<Value>{Value::text("Pr")});
  CHECK(view[1][0] == std::vector<Value>{Value::integer(555)});
  CHECK(view[1][1] == std::vector<Value>{Value::text("PS")});
  CHECK(view[1][2] == std::vector<Value>{Value::text("AP")});

  SUBCASE("past-only rows vanish") {
    Table &t = *db.find_table("TEACHER");
    for (Row &r : t.rows) r.valid = elem("['1990'-'1995']");
    CHECK(db.current_view("TEACHER", today).empty());
  }
}

TEST_CASE("clock is strictly monotonic") {
  TransactionClock clock;
  clock.set(sec(2002, 1, 10, 9, 0, 0));
  CHECK(clock.acquire() == sec(2002, 1, 10, 9, 0, 0));
  CHECK_THROWS_WITH_AS(clock.set(sec(2002, 1, 10, 9, 0, 0)),
                       doctest::Contains("NonMonotonicClock"), Error);
  clock.set(sec(2006, 3, 15, 10, 30, 0));
  CHECK(clock.read() == sec(2006, 3, 15, 10, 30, 0));
  CHECK(clock.acquire() == sec(2006, 3, 15, 10, 30, 0));
  // without a set, the next statement still gets a later stamp
  CHECK(clock.acquire() == sec(2006, 3, 15, 10, 30, 1));

  TransactionClock sys;
  sys.set_mode(TransactionClock::Mode::System);
  Instant a = sys.acquire(), b = sys.acquire();
  CHECK(a < b);
  CHECK_THROWS_AS(sys.set(sec(2030, 1, 1, 0, 0, 0)), Error);
}

TEST_CASE("save/load round trip") {
  Database db = table1_db();
  std::string text = db.save_to_string();
  Database back = Database::load_from_string(text);
  CHECK(back.save_to_string() == text);
  CHECK(back.audit().empty());
  CHECK(back.clock().mode() == TransactionClock::Mode::Manual);
  REQUIRE(back.clock().last().has_value());
  CHECK(*back.clock().last() == sec(2010, 12, 20, 14, 45, 0));

  SUBCASE("truncated file is corrupt") {
    std::string cut = text.substr(0, text.size() / 2);
    // cut inside a block: either a parse error or an unexpected EOF
    CHECK_THROWS_AS(Database::load_from_string(cut), Error);
  }
  SUBCASE("missing header") {
    CHECK_THROWS_WITH_AS(Database::load_from_string("nonsense\n"),
                         doctest::Contains("CorruptFile"), Error);
  }
  SUBCASE("corrupt line carries its position") {
    std::string bad = text;
    bad.insert(bad.find("CELL Status"), "GARBAGE LINE\n");
    try {
      Database::load_from_string(bad);
      FAIL("expected CorruptFile");
    } catch (const Error &e) {
      CHECK(e.code() == Errc::CorruptFile);
      CHECK(e.line() > 1);
    }
  }
}

TEST_CASE("audit flags overlapping open entries") {
  Database db = table1_db();
  CHECK(db.audit().empty());
  Table &t = *db.find_table("TEACHER");
  t.rows[0].cells[1].push_back(
      entry(Value::text("X"), "['2007'-'2012']", "['1/1/2011 00:00:00'-'now']"));
  auto problems = db.audit();
  REQUIRE(!problems.empty());
  CHECK(problems[0].find("overlap") != std::string::npos);
}
