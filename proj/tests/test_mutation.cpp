#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dml_fuzz.hpp"
#include "fixture.hpp"

using namespace chronoql;
using testfix::cell_text;
using testfix::q;

namespace {

Session fresh_university() { return testfix::university(); }

MutationReport exec(Session &s, const std::string &text) {
  return s.execute_text(text).report;
}

void set_clock(Session &s, const std::string &instant) {
  s.db.clock().set(Instant::parse(instant));
}

} // namespace

TEST_CASE("INSERT") {
  Session s = fresh_university();

  SUBCASE("the worked multi-row insert creates two rows") {
    set_clock(s, "1/3/2011 09:00:00");
    auto r = exec(s, "INSERT INTO MODULE VALUES (30, 'NETWORKS', {777 ['2011'-'uc']}), "
                     "(31, 'ALGEBRA', {333 ['2011'-'uc']});");
    CHECK(r.rows_matched == 2);
    CHECK(r.entries_created == 6);
  }
  SUBCASE("omitted valid stamp defaults to [today, uc)") {
    set_clock(s, "1/3/2011 09:00:00");
    exec(s, "INSERT INTO DEPARTMENT VALUES ('PH', 'Physics', 500, 777);");
    auto rs = q(s, "SELECT HISTORY Budget FROM DEPARTMENT WHERE DepartementCod = 'PH';");
    CHECK(cell_text(rs.rows[0][0]) == "500 ['2011'-'uc']");
  }
  SUBCASE("duplicate live key is rejected") {
    set_clock(s, "1/3/2011 09:00:00");
    CHECK_THROWS_WITH_AS(
        exec(s, "INSERT INTO DEPARTMENT VALUES ('CS', 'Clone', 1, 1);"),
        doctest::Contains("DuplicateKey"), Error);
  }
  SUBCASE("overlapping valid stamps in one braced value are rejected") {
    set_clock(s, "1/3/2011 09:00:00");
    CHECK_THROWS_WITH_AS(
        exec(s, "INSERT INTO DEPARTMENT VALUES ('PH', 'Physics', {500 ['2000'-'2010'], 600 "
                "['2005'-'2015']}, 777);"),
        doctest::Contains("OverlappingValidTime"), Error);
  }
  SUBCASE("multiplicity bound is enforced over current entries") {
    set_clock(s, "1/3/2011 09:00:00");
    CHECK_THROWS_WITH_AS(
        exec(s, "INSERT INTO TEACHER VALUES (901, 'X', 'Y', 'M', '1/1/1980', 'T', 'T', Null, "
                "{}, {'a' ['2000'-'uc'], 'b' ['2000'-'uc'], 'c' ['2000'-'uc'], 'd' "
                "['2000'-'uc']}, {}, {}, {'CS' ['2000'-'uc']}) ['2000'-'uc'];"),
        doctest::Contains("MultiplicityExceeded"), Error);
  }
  SUBCASE("foreign keys demand timestamp containment at link introduction") {
    set_clock(s, "1/3/2011 09:00:00");
    // G2 exists only from 2008; a link from 2005 pokes outside it
    CHECK_THROWS_WITH_AS(
        exec(s, "INSERT INTO STUDENT VALUES (810099, 'X', 'Y', 'T', '1/1/2005', {'G2' "
                "['2005'-'2009']}) ['2005'-'2009'];"),
        doctest::Contains("ForeignKeyViolation"), Error);
    CHECK_THROWS_WITH_AS(
        exec(s, "INSERT INTO STUDENT VALUES (810099, 'X', 'Y', 'T', '1/1/2005', {'G9' "
                "['2008'-'2009']}) ['2005'-'2009'];"),
        doctest::Contains("ForeignKeyViolation"), Error);
  }
}

TEST_CASE("UPDATE SET") {
  Session s = fresh_university();
  set_clock(s, "1/3/2011 09:00:00");

  SUBCASE("plain column changes destructively") {
    auto before = exec(s, "UPDATE TEACHER SET Adress = 'Sousse' WHERE TeacherNum = 777;");
    CHECK(before.rows_matched == 1);
    auto rs = q(s, "SELECT Adress FROM TEACHER WHERE TeacherNum = 777;");
    CHECK(cell_text(rs.rows[0][0]) == "'Sousse'");
  }
  SUBCASE("T column closes the old value and opens the new one") {
    auto r = exec(s, "UPDATE NOTIFICATION SET PExMark = 11 WHERE NotificationNum = 7001;");
    CHECK(r.entries_created == 1);
    CHECK(r.entries_closed == 1);
    auto rs = q(s, "SELECT HISTORY T PExMark FROM NOTIFICATION WHERE NotificationNum = 7001;");
    CHECK(rs.rows[0][0].parts.size() == 2);
  }
  SUBCASE("SET NULL closes without replacement") {
    auto r = exec(s, "UPDATE NOTIFICATION SET PExMark = Null WHERE NotificationNum = 7001;");
    CHECK(r.entries_closed == 1);
    CHECK(r.entries_created == 0);
    auto rs = q(s, "SELECT PExMark FROM NOTIFICATION WHERE NotificationNum = 7001;");
    CHECK(cell_text(rs.rows[0][0]).empty());
  }
  SUBCASE("valid-timestamped columns reject SET") {
    CHECK_THROWS_WITH_AS(exec(s, "UPDATE TEACHER SET Grade = 'X' WHERE TeacherNum = 777;"),
                         doctest::Contains("SetOnValidColumn"), Error);
  }
}

TEST_CASE("UPDATE TAG ON") {
  Session s = fresh_university();
  set_clock(s, "1/3/2011 09:00:00");

  SUBCASE("an overlapping valid timestamp rejects the whole statement") {
    std::string before = s.db.save_to_string();
    CHECK_THROWS_WITH_AS(
        exec(s, "UPDATE TEACHER TAG ON Status 'X' ['2007'-'2009'] WHERE TeacherNum = 777;"),
        doctest::Contains("OverlappingValidTime"), Error);
    CHECK(s.db.save_to_string() == before); // atomic
  }
  SUBCASE("a gap accepts new values") {
    auto r = exec(s, "UPDATE TEACHER TAG ON Status 'Consultant' ['2010'-'2012'] WHERE "
                     "TeacherNum = 444;");
    CHECK(r.entries_created == 1);
  }
  SUBCASE("VT entries are stamped with the statement clock") {
    auto r = exec(s, "UPDATE TEACHER TAG ON Status 'Consultant' ['2010'-'2012'] WHERE "
                     "TeacherNum = 444;");
    auto rs = q(s, "SELECT Status.T TIMESTAMPS 'Consultant' FROM TEACHER WHERE TeacherNum "
                   "= 444;");
    CHECK(cell_text(rs.rows[0][0]) == "['1/3/2011 09:00:00'-'now']");
    CHECK(r.clock == Instant::parse("1/3/2011 09:00:00"));
  }
}

TEST_CASE("UPDATE CORRECT") {
  Session s = fresh_university();
  set_clock(s, "1/3/2011 09:00:00");

  SUBCASE("VT correction keeps the erroneous entry and flags it") {
    auto before = q(s, "SELECT ERRONEOUS TeacherNum FROM EDUCATION WHERE EducationNum = 3004;");
    REQUIRE(before.rows[0][0].parts.size() == 1); // fixture already corrected once
    exec(s, "UPDATE EDUCATION CORRECT TeacherNum = 333 ['2010'-'2011'] WHERE EducationNum "
            "= 3004;");
    auto after = q(s, "SELECT ERRONEOUS TeacherNum FROM EDUCATION WHERE EducationNum = 3004;");
    CHECK(after.rows[0][0].parts.size() == 2);
    // the corrected element covers granule 2010 only, so snapshot there
    auto at2010 = q(s, "SELECT TeacherNum @ '2010' FROM EDUCATION WHERE EducationNum = 3004;");
    CHECK(cell_text(at2010.rows[0][0]) == "333 ['2010'-'2011']");
  }
  SUBCASE("valid-only corrections are destructive") {
    auto r = exec(s, "UPDATE DEPARTMENT CORRECT Budget ['2010'-'uc'] = 410 WHERE "
                     "DepartementCod = 'CS';");
    CHECK(r.entries_created == 0);
    CHECK(r.entries_closed == 0);
    auto rs = q(s, "SELECT HISTORY Budget FROM DEPARTMENT WHERE DepartementCod = 'CS';");
    CHECK(rs.rows[0][0].parts.size() == 3); // still three entries
    CHECK(cell_text(q(s, "SELECT Budget FROM DEPARTMENT WHERE DepartementCod = 'CS';")
                        .rows[0][0]) == "410");
  }
  SUBCASE("timestamp correction by value") {
    exec(s, "UPDATE DEPARTMENT CORRECT Budget 250 ['2004'-'2007'] WHERE DepartementCod = 'MG';");
    auto rs = q(s, "SELECT Budget.V TIMESTAMPS 250 FROM DEPARTMENT WHERE DepartementCod = 'MG';");
    CHECK(cell_text(rs.rows[0][0]) == "['2004'-'2007']");
  }
  SUBCASE("no matching entry") {
    CHECK_THROWS_WITH_AS(exec(s, "UPDATE TEACHER CORRECT Status 'Nope' ['2000'-'2001'] WHERE "
                                 "TeacherNum = 777;"),
                         doctest::Contains("NoMatchingEntry"), Error);
  }
  SUBCASE("CORRECT NULL logically deletes the entry") {
    exec(s, "UPDATE TEACHER CORRECT Status = Null ['2008'-'uc'] WHERE TeacherNum = 777;");
    auto rs = q(s, "SELECT Status FROM TEACHER WHERE TeacherNum = 777;");
    CHECK(cell_text(rs.rows[0][0]).empty()); // no current status anymore
    auto closed = q(s, "SELECT ERRONEOUS Status FROM TEACHER WHERE TeacherNum = 777;");
    CHECK(closed.rows[0][0].parts.size() == 2);
  }
  SUBCASE("row validity correction on a VT table adds a corrected row version") {
    size_t before = s.db.table("TEACHER").rows.size();
    exec(s, "UPDATE TEACHER CORRECT VALIDITY ['2003'-'uc'] WHERE TeacherNum = 777;");
    CHECK(s.db.table("TEACHER").rows.size() == before + 1);
    auto rs = q(s, "SELECT TeacherNum, TEACHER.V FROM TEACHER WHERE TeacherNum = 777;");
    CHECK(cell_text(rs.rows[0][1]) == "['2003'-'uc']");
  }
  SUBCASE("ambiguous target: two entries hold the corrected value") {
    exec(s, "INSERT INTO DEPARTMENT VALUES ('XX', 'Twice', {100 ['2000'-'2005'], 100 "
            "['2007'-'2010']}, Null);");
    CHECK_THROWS_WITH_AS(exec(s, "UPDATE DEPARTMENT CORRECT Budget 100 ['2001'-'2002'] WHERE "
                                 "DepartementCod = 'XX';"),
                         doctest::Contains("AmbiguousTarget"), Error);
  }
}

TEST_CASE("DELETE and referential actions") {
  Session s = fresh_university();
  set_clock(s, "1/3/2011 09:00:00");

  SUBCASE("transaction-stamped rows close instead of vanishing") {
    auto r = exec(s, "DELETE FROM TEACHER WHERE TeacherNum = 444;");
    CHECK(r.entries_closed >= 1);
    CHECK(r.entries_removed == 0);
    CHECK(q(s, "SELECT TeacherNum FROM TEACHER WHERE TeacherNum = 444;").rows.empty());
    auto hist = q(s, "SELECT TeacherNum FROM TEACHER HISTORY T WHERE TeacherNum = 444;");
    CHECK(hist.rows.size() == 1);
  }
  SUBCASE("plain rows are removed physically") {
    set_clock(s, "2/3/2011 09:00:00");
    exec(s, "INSERT INTO MODULE VALUES (99, 'TEMP', {777 ['2011'-'uc']});");
    set_clock(s, "3/3/2011 09:00:00");
    auto r = exec(s, "DELETE FROM MODULE WHERE ModuleNum = 99;");
    CHECK(r.entries_removed >= 1);
    CHECK(q(s, "SELECT ModuleNum FROM MODULE WHERE ModuleNum = 99;").rows.empty());
  }
  SUBCASE("RESTRICT blocks deleting a referenced master") {
    CHECK_THROWS_WITH_AS(exec(s, "DELETE FROM AUDIENCE WHERE AudienceCod = 'A1';"),
                         doctest::Contains("RestrictViolation"), Error);
  }
  SUBCASE("CASCADE deletes details the same way") {
    auto r = exec(s, "DELETE FROM TEACHER WHERE TeacherNum = 555;");
    // education 3003 references 555 and cascades; its rows are valid-only
    CHECK(r.entries_removed >= 1);
    CHECK(q(s, "SELECT EducationNum FROM EDUCATION WHERE EducationNum = 3003;").rows.empty());
  }
  SUBCASE("CORRECT NULL closes the link on the detail") {
    auto r = exec(s, "DELETE FROM GROUPE WHERE GroupCod = 'G1';");
    (void)r;
    // student 810055 linked G1 currently; link entry must now be closed
    auto rs = q(s, "SELECT GroupCod FROM STUDENT WHERE StudentNum = 810055;");
    CHECK(cell_text(rs.rows[0][0]).empty());
    auto closed = q(s, "SELECT ERRONEOUS GroupCod FROM STUDENT WHERE StudentNum = 810055;");
    CHECK(closed.rows[0][0].parts.size() == 1);
  }
}

TEST_CASE("VACUUM") {
  Session s = fresh_university();
  set_clock(s, "1/3/2011 09:00:00");

  SUBCASE("closed entries of a column vanish physically") {
    auto r = exec(s, "VACUUM Status FROM TEACHER WHERE TeacherNum = 777;");
    CHECK(r.entries_removed == 1);
    auto rs = q(s, "SELECT HISTORY T Status FROM TEACHER WHERE TeacherNum = 777;");
    CHECK(rs.rows[0][0].parts.size() == 3);
    CHECK(q(s, "SELECT ERRONEOUS Status FROM TEACHER WHERE TeacherNum = 777;")
              .rows[0][0]
              .parts.empty());
  }
  SUBCASE("open entries never vacuum") {
    auto r = exec(s, "VACUUM FROM TEACHER WHERE TeacherNum = 555;");
    CHECK(r.entries_removed == 0);
    CHECK(!q(s, "SELECT TeacherNum FROM TEACHER WHERE TeacherNum = 555;").rows.empty());
  }
  SUBCASE("matching nothing removes nothing") {
    auto r = exec(s, "VACUUM FROM TEACHER WHERE TeacherNum = -5;");
    CHECK(r.rows_matched == 0);
    CHECK(r.entries_removed == 0);
  }
  SUBCASE("valid-only targets are not vacuumable") {
    CHECK_THROWS_WITH_AS(exec(s, "VACUUM Grade FROM TEACHER WHERE TeacherNum = 777;"),
                         doctest::Contains("VacuumOpenEntry"), Error);
    CHECK_THROWS_WITH_AS(exec(s, "VACUUM FROM MODULE WHERE ModuleNum = 25;"),
                         doctest::Contains("VacuumOpenEntry"), Error);
  }
  SUBCASE("automatic vacuuming keeps a bounded closed history") {
    Session v;
    v.pin_today(Instant::parse("15/6/2011"));
    ScriptOptions opts;
    opts.echo = false;
    run_script(v, "CREATE TABLE K (Id INTEGER PRIMARY KEY, Price INTEGER TRANSACTION TIME "
                  "VACUUM KEEP 2);\n",
               opts);
    v.db.clock().set(Instant::parse("1/1/2011 10:00:00"));
    v.execute_text("INSERT INTO K VALUES (1, 10);");
    for (int i = 0; i < 4; i++) {
      v.db.clock().set(Instant::parse("1/1/2011 10:0" + std::to_string(i + 1) + ":00"));
      v.execute_text("UPDATE K SET Price = " + std::to_string(20 + i) + " WHERE Id = 1;");
    }
    // 5 values were recorded; at most 2 closed survive next to the open one
    auto rs = Evaluator(v.db, v.today(), v.db.clock().read())
                  .eval(*std::get<ast::SelectPtr>(
                      parse_statement("SELECT HISTORY T Price FROM K;")));
    CHECK(rs.rows[0][0].parts.size() == 3);
  }
}

TEST_CASE("mutation state machine holds under randomized DML") {
  dmlfuzz::Fuzzer fuzz(2011);
  dmlfuzz::Stats stats;
  int lastCount = dmlfuzz::entry_count(fuzz.session().db);
  for (int i = 0; i < 400; i++) {
    std::string before = fuzz.session().db.save_to_string();
    bool wasVacuum = false;
    std::string err = fuzz.step(stats);
    const auto &log = fuzz.log();
    wasVacuum = !err.empty() ? false : log.back().second.rfind("VACUUM", 0) == 0;
    if (!err.empty()) {
      // atomicity: failed statements leave the store byte-identical
      REQUIRE(fuzz.session().db.save_to_string() == before);
    } else {
      REQUIRE(fuzz.session().db.audit().empty());
      int now = dmlfuzz::entry_count(fuzz.session().db);
      if (!wasVacuum) REQUIRE(now >= lastCount); // only VACUUM shrinks the store
      lastCount = now;
    }
  }
  CHECK(stats.executed > 100);
  CHECK(stats.failed > 10); // the generator does provoke rejections

  // replay determinism
  Database replayed = fuzz.replay();
  REQUIRE(replayed.save_to_string() == fuzz.session().db.save_to_string());
}

TEST_CASE("mutation reports are consistent with store deltas") {
  Session s = fresh_university();
  set_clock(s, "1/3/2011 09:00:00");
  int before = dmlfuzz::entry_count(s.db);
  auto r = exec(s, "UPDATE TEACHER TAG ON Status 'Consultant' ['2010'-'2012'] WHERE "
                   "TeacherNum = 444;");
  CHECK(dmlfuzz::entry_count(s.db) - before == r.entries_created);
  CHECK(r.entries_created == 1);
  CHECK(r.rows_matched == 1);
}
