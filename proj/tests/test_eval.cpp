#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixture.hpp"
#include "oracle.hpp"

using namespace chronoql;
using testfix::cell_text;
using testfix::q;

namespace {

Session &uni() {
  static Session s = testfix::university();
  return s;
}

std::vector<std::string> column_texts(const ResultSet &rs, size_t col = 0) {
  std::vector<std::string> out;
  for (const auto &row : rs.rows) out.push_back(cell_text(row.at(col)));
  return out;
}

} // namespace

TEST_CASE("legacy queries bring current data") {
  auto rs = q(uni(), "SELECT Status, Grade FROM TEACHER WHERE TeacherNum = 777;");
  REQUIRE(rs.rows.size() == 1);
  CHECK(cell_text(rs.rows[0][0]) == "'R'");
  CHECK(cell_text(rs.rows[0][1]) == "'Professor'");

  auto t555 = q(uni(), "SELECT Status, Grade FROM TEACHER WHERE TeacherNum = 555;");
  CHECK(cell_text(t555.rows[0][0]) == "'PS'");

  // current_view agrees with the engine's own plain SELECT *
  auto view = uni().db.current_view("TEACHER", uni().today());
  auto star = q(uni(), "SELECT * FROM TEACHER;");
  REQUIRE(view.size() == star.rows.size());
  for (size_t r = 0; r < view.size(); r++)
    for (size_t c = 0; c < view[r].size(); c++) {
      REQUIRE(view[r][c].size() == star.rows[r][c].parts.size());
      for (size_t k = 0; k < view[r][c].size(); k++)
        CHECK(view[r][c][k] == star.rows[r][c].parts[k].value);
    }
}

TEST_CASE("temporal restriction") {
  SUBCASE("HISTORY keeps open entries with their stamps") {
    auto rs = q(uni(), "SELECT HISTORY Status FROM TEACHER WHERE TeacherNum = 777;");
    REQUIRE(rs.rows.size() == 1);
    CHECK(cell_text(rs.rows[0][0]) ==
          "'T' ['2002'-'2005'] | 'PS' ['2005'-'2008'] | 'R' ['2008'-'uc']");
  }
  SUBCASE("HISTORY T sees closed entries too") {
    auto rs = q(uni(), "SELECT HISTORY T Status FROM TEACHER WHERE TeacherNum = 777;");
    REQUIRE(rs.rows[0][0].parts.size() == 4);
  }
  SUBCASE("snapshot law over the whole fixture range") {
    // Column @ t returns exactly the open entry whose element contains t
    for (int y = 1995; y <= 2020; y++) {
      auto rs = q(uni(), "SELECT Status @ '" + std::to_string(y) +
                             "' FROM TEACHER WHERE TeacherNum = 777;");
      std::string got = cell_text(rs.rows[0][0]);
      std::string want;
      if (y >= 2002 && y < 2005) want = "'T'";
      else if (y >= 2005 && y < 2008) want = "'PS'";
      else if (y >= 2008) want = "'R'";
      if (want.empty())
        CHECK(got.empty());
      else
        CHECK(got.substr(0, want.size()) == want);
    }
  }
  SUBCASE("AT a day granule") {
    auto rs = q(uni(), "SELECT Status @ '2/1/2008' FROM TEACHER WHERE TeacherNum = 777;");
    CHECK(cell_text(rs.rows[0][0]) == "'R' ['2/1/2008'-'3/1/2008']");
  }
  SUBCASE("partition law: PAST, AT today, FUTURE rebuild HISTORY") {
    auto past = q(uni(), "SELECT PAST Status FROM TEACHER WHERE TeacherNum = 777;");
    auto at = q(uni(), "SELECT Status @ '2011' FROM TEACHER WHERE TeacherNum = 777;");
    auto fut = q(uni(), "SELECT FUTURE Status FROM TEACHER WHERE TeacherNum = 777;");
    auto hist = q(uni(), "SELECT HISTORY Status FROM TEACHER WHERE TeacherNum = 777;");
    auto granules = [](const Cell &c) {
      std::set<std::int64_t> out;
      for (const CellPart &p : c.parts)
        if (p.valid)
          for (std::int64_t g : oracle::granules(*p.valid)) out.insert(g);
      return out;
    };
    auto gp = granules(past.rows[0][0]), ga = granules(at.rows[0][0]),
         gf = granules(fut.rows[0][0]), gh = granules(hist.rows[0][0]);
    CHECK(oracle::set_intersect(gp, ga).empty());
    CHECK(oracle::set_intersect(ga, gf).empty());
    CHECK(oracle::set_intersect(gp, gf).empty());
    CHECK(oracle::set_union(oracle::set_union(gp, ga), gf) == gh);
  }
  SUBCASE("terms on plain columns are rejected") {
    CHECK_THROWS_WITH_AS(q(uni(), "SELECT HISTORY LName FROM TEACHER;"),
                         doctest::Contains("TemporalTermOnPlainColumn"), Error);
  }
  SUBCASE("transaction window on the FROM table") {
    auto rs = q(uni(), "SELECT StudentNum FROM STUDENT BETWEEN '2002' AND '2006' T;");
    CHECK(column_texts(rs) == std::vector<std::string>{"900105"});
    auto sugar = q(uni(), "SELECT StudentNum FROM STUDENT ['2002'-'2006'] T;");
    CHECK(column_texts(sugar) == column_texts(rs));
  }
}

TEST_CASE("column functions") {
  SUBCASE("FIRST and LAST carry the valid stamp") {
    auto rs = q(uni(), "SELECT FIRST Status, LAST Status FROM TEACHER WHERE TeacherNum = 777;");
    CHECK(cell_text(rs.rows[0][0]) == "'T' ['2002'-'2005']");
    CHECK(cell_text(rs.rows[0][1]) == "'R' ['2008'-'uc']");
  }
  SUBCASE("PREVIOUS and NEXT anchor at the current value") {
    auto rs = q(uni(), "SELECT PREVIOUS Status, NEXT Status FROM TEACHER WHERE TeacherNum = 333;");
    CHECK(cell_text(rs.rows[0][0]) == "'T' ['2005'-'2008']"); // current is 'PS'
    CHECK(cell_text(rs.rows[0][1]).empty());
    auto v = q(uni(), "SELECT PREVIOUS 'R' Status FROM TEACHER WHERE TeacherNum = 777;");
    CHECK(cell_text(v.rows[0][0]) == "'PS' ['2005'-'2008']");
    CHECK_THROWS_WITH_AS(
        q(uni(), "SELECT PREVIOUS 'X' Status FROM TEACHER WHERE TeacherNum = 777;"),
        doctest::Contains("NoSuchValue"), Error);
    CHECK_THROWS_WITH_AS(q(uni(), "SELECT NEXT T Status FROM TEACHER WHERE TeacherNum = 777;"),
                         doctest::Contains("TransactionDimUnsupported"), Error);
  }
  SUBCASE("PREVIOUS_SCALE looks one granule back") {
    // today is 2011; one year back is 2010, where 777 already held 'R'
    auto rs = q(uni(), "SELECT PREVIOUS_SCALE Status FROM TEACHER WHERE TeacherNum = 777;");
    CHECK(cell_text(rs.rows[0][0]) == "'R' ['2008'-'uc']");
    auto n = q(uni(), "SELECT NEXT_SCALE Grade FROM TEACHER WHERE TeacherNum = 333;");
    CHECK(cell_text(n.rows[0][0]) == "'Assistant Professor' ['2005'-'2013']");
  }
  SUBCASE("EVOLUTION family") {
    CHECK(cell_text(q(uni(), "SELECT EVOLUTION Status FROM TEACHER WHERE TeacherNum = 777;")
                        .rows[0][0]) == "'2008'");
    CHECK(cell_text(
              q(uni(), "SELECT FIRST EVOLUTION Status FROM TEACHER WHERE TeacherNum = 777;")
                  .rows[0][0]) == "'2002'");
    CHECK(cell_text(q(uni(), "SELECT EVOLUTION HISTORY Status FROM TEACHER WHERE TeacherNum "
                             "= 777;")
                        .rows[0][0]) == "'2002' | '2005' | '2008'");
    CHECK(cell_text(q(uni(), "SELECT EVOLUTION 'Contractual'-'Permanent by Stage' Status "
                             "FROM TEACHER WHERE TeacherNum = 444;")
                        .rows[0][0]) == "'2006'");
  }
  SUBCASE("TIMESTAMPS projects the element of a value") {
    CHECK(cell_text(q(uni(), "SELECT Status.V TIMESTAMPS 'Contractual' FROM TEACHER WHERE "
                             "TeacherNum = 444;")
                        .rows[0][0]) == "['1999'-'2005']");
    CHECK_THROWS_WITH_AS(q(uni(), "SELECT Status.V TIMESTAMPS 'Nope' FROM TEACHER WHERE "
                                  "TeacherNum = 444;"),
                         doctest::Contains("NoSuchValue"), Error);
  }
  SUBCASE("THIS resolves the bound entry") {
    auto rs = q(uni(),
                "SELECT LAST Status S, THIS S.T, THIS S.V FROM TEACHER WHERE TeacherNum = 777;");
    CHECK(cell_text(rs.rows[0][1]) == "['5/11/2010 08:15:00'-'now']");
    CHECK(cell_text(rs.rows[0][2]) == "['2008'-'uc']");
    CHECK_THROWS_WITH_AS(q(uni(), "SELECT THIS X.V FROM TEACHER;"),
                         doctest::Contains("DanglingThis"), Error);
  }
}

TEST_CASE("predicate functions") {
  CHECK(column_texts(q(uni(), "SELECT DepartementCod FROM DEPARTMENT WHERE ALWAYS Budget >= "
                              "300;")) == std::vector<std::string>{"'CS'"});
  CHECK(column_texts(q(uni(), "SELECT DepartementCod FROM DEPARTMENT WHERE ANYTIME PAST "
                              "Budget < 300;")) == std::vector<std::string>{"'MG'"});
  CHECK(column_texts(q(uni(), "SELECT DepartementCod FROM DEPARTMENT WHERE ALWAYS Budget >= "
                              "300 WHEN TeacherLeaderNum = 555;")) ==
        std::vector<std::string>{"'CS'"});
  // CS budgets 300,350,400 strictly increase; MG's 280,250,320 do not
  CHECK(column_texts(q(uni(), "SELECT DepartementCod FROM DEPARTMENT WHERE INCREASE "
                              "Budget;")) == std::vector<std::string>{"'CS'"});
  CHECK(column_texts(q(uni(), "SELECT DepartementCod FROM DEPARTMENT WHERE INCREASE "
                              "TeacherLeaderNum;")) == std::vector<std::string>{"'CS'"});
  CHECK(column_texts(q(uni(), "SELECT DepartementCod FROM DEPARTMENT WHERE FIRST INCREASE "
                              "TeacherLeaderNum;")) == std::vector<std::string>{"'CS'"});
  CHECK(q(uni(), "SELECT DepartementCod FROM DEPARTMENT WHERE DECREASE Budget;").rows.empty());
  CHECK_THROWS_WITH_AS(q(uni(), "SELECT TeacherNum FROM TEACHER WHERE INCREASE Status;"),
                       doctest::Contains("NonComparableType"), Error);
}

TEST_CASE("when-condition windows") {
  SUBCASE("column-level WHEN aligns within the row") {
    auto rs = q(uni(), "SELECT Status WHEN Initcap(Grade) = 'Assistant Professor' FROM "
                       "TEACHER WHERE TeacherNum = 333;");
    CHECK(cell_text(rs.rows[0][0]) == "'T' ['2005'-'2008'] | 'PS' ['2008'-'2013']");
  }
  SUBCASE("SINCE a condition") {
    auto rs = q(uni(), "SELECT Grade SINCE Initcap(Status) = 'Recruited' FROM TEACHER WHERE "
                       "TeacherNum = 900105;");
    CHECK(cell_text(rs.rows[0][0]) == "'Assistant Professor' ['2010'-'uc']");
  }
  SUBCASE("never-true condition yields nothing") {
    auto rs = q(uni(), "SELECT Status WHEN Grade = 'Emperor' FROM TEACHER WHERE TeacherNum "
                       "= 777;");
    CHECK(cell_text(rs.rows[0][0]).empty());
  }
  SUBCASE("table-level WHEN resolves globally") {
    auto rs = q(uni(), "SELECT TeacherNum FROM TEACHER WHEN LName = 'ABDELWAHEB' AND FName "
                       "= 'Mohamed' AND Grade = 'Professor';");
    CHECK(rs.rows.size() == 5); // every teacher alive during the professorship
  }
}

TEST_CASE("temporal joins") {
  SUBCASE("default join follows current links") {
    auto rs = q(uni(), "SELECT TeacherNum, Label FROM TEACHER Natural Join DEPARTMENT;");
    REQUIRE(rs.rows.size() == 5);
    CHECK(cell_text(rs.rows[0][1]) == "'Computer Science'");
  }
  SUBCASE("windowed join carries the overlap") {
    auto rs =
        q(uni(), "SELECT * FROM TEACHER Natural Join ['1997'-'2003'] DEPARTMENT;");
    REQUIRE(rs.rows.size() == 3);
    // trailing Validity column carries the restricted link element
    CHECK(rs.headers.back() == "Validity");
    CHECK(cell_text(rs.rows[0].back()) == "['2002'-'2004']");  // 777, CS from 2002
    CHECK(cell_text(rs.rows[1].back()) == "['1997'-'2004']");  // TOUNSI, MG from 1997
  }
  SUBCASE("snapshot join keeps links valid at the date") {
    auto joined = q(uni(),
                    "SELECT TeacherNum FROM TEACHER Natural Join @ '2006' DEPARTMENT;");
    // links alive in 2006: 777 and 333 (CS), TOUNSI and 444 (MG)
    CHECK(column_texts(joined) ==
          std::vector<std::string>{"777", "333", "900105", "444"});
    auto hist =
        q(uni(), "SELECT TeacherNum FROM TEACHER HISTORY Natural Join DEPARTMENT;");
    CHECK(hist.rows.size() == 6); // every link ever, incl. 444's future CS
  }
  SUBCASE("subquery window") {
    auto rs = q(uni(), "SELECT TeacherNum FROM TEACHER [SELECT S.V FROM HISTORY STUDENT S "
                       "WHERE LName = 'TOUNSI' AND FName = 'Feres'];");
    CHECK(column_texts(rs) ==
          std::vector<std::string>{"777", "333", "900105", "444"});
  }
  SUBCASE("ambiguous subquery window") {
    CHECK_THROWS_WITH_AS(
        q(uni(), "SELECT TeacherNum FROM TEACHER [SELECT S.V FROM HISTORY STUDENT S];"),
        doctest::Contains("AmbiguousWindow"), Error);
  }
  SUBCASE("join without a foreign key is rejected") {
    CHECK_THROWS_WITH_AS(q(uni(), "SELECT * FROM DEPARTMENT Natural Join MODULE;"),
                         doctest::Contains("NotALink"), Error);
  }
}

TEST_CASE("temporal cross product") {
  auto rs = q(uni(), "SELECT TeacherNum, StudentNum FROM TEACHER HISTORY Cross Join STUDENT;");
  CHECK(rs.rows.size() == 14); // 5x3 minus 555 x TOUNSI (disjoint validities)
  // spec example: [2002-2008] x [2005-uc] stamps the concatenation [2005-2008]
  auto one = q(uni(), "SELECT * FROM STUDENT HISTORY Cross Join TEACHER WHERE StudentNum = "
                      "900105 AND TeacherNum = 333;");
  CHECK(cell_text(one.rows.at(0).back()) == "['2005'-'2009']");
  auto past = q(uni(), "SELECT * FROM STUDENT PAST Cross Join TEACHER WHERE StudentNum = "
                       "900105 AND TeacherNum = 333;");
  CHECK(cell_text(past.rows.at(0).back()) == "['2005'-'2009']"); // wholly past at 2011
  CHECK_THROWS_WITH_AS(q(uni(), "SELECT * FROM DEPARTMENT HISTORY Cross Join TEACHER;"),
                       doctest::Contains("NotRowTimestamped"), Error);
}

TEST_CASE("temporal set operators") {
  SUBCASE("INTERSECT intersects the stamps of common values") {
    auto rs = q(uni(), "SELECT HISTORY(NbrGroup) FROM AUDIENCE WHERE LibSection = "
                       "'Marketing' INTERSECT SELECT HISTORY(NbrGroup) FROM AUDIENCE WHERE "
                       "LibSection = 'Management';");
    REQUIRE(rs.rows.size() == 1);
    CHECK(cell_text(rs.rows[0][0]) == "4 ['2008'-'2010']");
  }
  SUBCASE("UNION merges stamps of common values") {
    auto rs = q(uni(), "SELECT HISTORY(NbrGroup) FROM AUDIENCE WHERE LibSection = "
                       "'Marketing' UNION SELECT HISTORY(NbrGroup) FROM AUDIENCE WHERE "
                       "LibSection = 'Management';");
    REQUIRE(rs.rows.size() == 2); // 4 (merged) and 5
    CHECK(cell_text(rs.rows[0][0]) == "4 ['2005'-'uc']");
    CHECK(cell_text(rs.rows[1][0]) == "5 ['2010'-'uc']");
  }
  SUBCASE("EXCEPT subtracts the right stamps") {
    auto rs = q(uni(), "SELECT HISTORY(NbrGroup) FROM AUDIENCE WHERE LibSection = "
                       "'Marketing' EXCEPT SELECT HISTORY(NbrGroup) FROM AUDIENCE WHERE "
                       "LibSection = 'Management';");
    REQUIRE(rs.rows.size() == 2);
    CHECK(cell_text(rs.rows[0][0]) == "4 ['2005'-'2008']");
    auto self = q(uni(), "SELECT HISTORY(NbrGroup) FROM AUDIENCE WHERE LibSection = "
                         "'Marketing' EXCEPT SELECT HISTORY(NbrGroup) FROM AUDIENCE WHERE "
                         "LibSection = 'Marketing';");
    CHECK(self.rows.empty());
  }
  SUBCASE("arity mismatch") {
    CHECK_THROWS_WITH_AS(q(uni(), "SELECT NbrGroup, AudienceCod FROM AUDIENCE INTERSECT "
                                  "SELECT NbrGroup FROM AUDIENCE;"),
                         doctest::Contains("IncompatibleArity"), Error);
  }
}

TEST_CASE("bitemporal selectors") {
  SUBCASE("RETROACTIF: recorded after validity began") {
    auto rs = q(uni(), "SELECT RETROACTIF Status FROM TEACHER WHERE TeacherNum = 777;");
    CHECK(rs.rows[0][0].parts.size() == 3); // both PS versions and R
  }
  SUBCASE("POSTACTIF: recorded before validity begins") {
    auto rs = q(uni(), "SELECT POSTACTIF Status FROM TEACHER WHERE TeacherNum = 444;");
    REQUIRE(rs.rows[0][0].parts.size() == 1);
    CHECK(rs.rows[0][0].parts[0].value == Value::text("Expert"));
    auto none = q(uni(), "SELECT POSTACTIF Status FROM TEACHER WHERE TeacherNum = 555;");
    CHECK(none.rows[0][0].parts.empty()); // lag exactly zero
  }
  SUBCASE("ERRONEOUS keys on correction, not evolution") {
    auto rs = q(uni(), "SELECT ERRONEOUS Status FROM TEACHER WHERE TeacherNum = 777;");
    REQUIRE(rs.rows[0][0].parts.size() == 1);
    CHECK(cell_text(rs.rows[0][0]) ==
          "'PS' ['2005'-'2009'] ['15/3/2006 10:30:00'-'20/3/2006 11:00:00']");
    // the evolution-closed TestMark entry is not erroneous
    auto marks = q(uni(), "SELECT ERRONEOUS Status FROM TEACHER WHERE TeacherNum = 555;");
    CHECK(marks.rows[0][0].parts.empty());
  }
  SUBCASE("WITH phase threshold is strict") {
    // teacher 777: 'R' [2008-uc] recorded 2010 — lag is exactly 2 years
    auto at2 = q(uni(), "SELECT RETROACTIF WITH 2 YEARS SCALE Status FROM TEACHER WHERE "
                        "TeacherNum = 777;");
    for (const CellPart &p : at2.rows[0][0].parts) CHECK(!(p.value == Value::text("R")));
    auto at1 = q(uni(), "SELECT RETROACTIF WITH 1 YEARS SCALE Status FROM TEACHER WHERE "
                        "TeacherNum = 777;");
    bool hasR = false;
    for (const CellPart &p : at1.rows[0][0].parts) hasR = hasR || p.value == Value::text("R");
    CHECK(hasR);
  }
  SUBCASE("selectors need bitemporal columns") {
    CHECK_THROWS_WITH_AS(q(uni(), "SELECT RETROACTIF Grade FROM TEACHER;"),
                         doctest::Contains("NotBitemporal"), Error);
  }
  SUBCASE("POSTACTIF natural join") {
    auto rs = q(uni(), "SELECT TeacherNum, Label FROM TEACHER POSTACTIF Natural Join "
                       "DEPARTMENT;");
    REQUIRE(rs.rows.size() == 1);
    CHECK(cell_text(rs.rows[0][0]) == "444");
  }
}

TEST_CASE("temporal scalar operators") {
  SUBCASE("one value per common transaction period") {
    auto rs = q(uni(), "SELECT TestMark + PExMark FROM HISTORY NOTIFICATION WHERE "
                       "StudentNum = 0900105 AND ModuleNum = 25;");
    REQUIRE(rs.rows.size() == 1);
    REQUIRE(rs.rows[0][0].parts.size() == 2);
    CHECK(rs.rows[0][0].parts[0].value == Value::integer(22));
    CHECK(rs.rows[0][0].parts[1].value == Value::integer(24));
  }
  SUBCASE("without a term only current values combine") {
    auto rs = q(uni(), "SELECT TestMark + PExMark FROM NOTIFICATION WHERE StudentNum = "
                       "0900105 AND ModuleNum = 25;");
    REQUIRE(rs.rows.size() == 1);
    REQUIRE(rs.rows[0][0].parts.size() == 1);
    CHECK(rs.rows[0][0].parts[0].value == Value::integer(24));
  }
  SUBCASE("division by zero") {
    CHECK_THROWS_WITH_AS(q(uni(), "SELECT TestMark / 0 FROM NOTIFICATION;"),
                         doctest::Contains("DivisionByZero"), Error);
  }
}

TEST_CASE("temporal aggregates and grouping") {
  SUBCASE("history aggregates see past, current and future values") {
    CHECK(cell_text(q(uni(), "SELECT Max(HISTORY Budget) FROM DEPARTMENT WHERE "
                             "DepartementCod = 'CS';")
                        .rows[0][0]) == "400");
    CHECK(cell_text(q(uni(), "SELECT Sum(HISTORY Budget) FROM DEPARTMENT WHERE "
                             "DepartementCod = 'CS';")
                        .rows[0][0]) == "1050");
    CHECK(cell_text(q(uni(), "SELECT Count(HISTORY Budget) FROM DEPARTMENT;").rows[0][0]) ==
          "6");
  }
  SUBCASE("granule-scaled aggregate: one result per bucket") {
    auto rs = q(uni(), "SELECT Max(HISTORY Budget DECADE) FROM DEPARTMENT WHERE "
                       "DepartementCod = 'CS';");
    REQUIRE(rs.rows.size() == 3);
    CHECK(rs.headers.back() == "DECADE");
    CHECK(cell_text(rs.rows[0][0]) == "300");
    CHECK(cell_text(rs.rows[0][1]) == "'1990s'");
    CHECK(cell_text(rs.rows[1][0]) == "350");
    CHECK(cell_text(rs.rows[2][0]) == "400");
    // brute-force check of the 2000s bucket: budgets valid in 2000..2009
    oracle::Domain dom;
    auto e300 = TemporalElement::parse("['1995'-'2005']", Dimension::Valid);
    auto e350 = TemporalElement::parse("['2005'-'2010']", Dimension::Valid);
    bool b300 = false, b350 = false;
    for (std::int64_t y = 2000; y <= 2009; y++) {
      b300 = b300 || oracle::granules(e300, dom).count(y);
      b350 = b350 || oracle::granules(e350, dom).count(y);
    }
    CHECK(b300);
    CHECK(b350);
  }
  SUBCASE("row grouping by granule") {
    auto rs = q(uni(), "SELECT DepartementCod, Count(*) FROM HISTORY TEACHER GROUP BY "
                       "DepartementCod, YEAR;");
    REQUIRE(!rs.rows.empty());
    CHECK(rs.headers.back() == "YEAR");
    // 2010: CS has teachers 777, 333 and 555
    bool found = false;
    for (const auto &row : rs.rows)
      if (cell_text(row[2]) == "'2010'" && cell_text(row[0]) == "'CS'") {
        found = true;
        CHECK(cell_text(row[1]) == "3");
      }
    CHECK(found);
  }
  SUBCASE("HAVING filters groups") {
    auto rs = q(uni(), "SELECT DepartementCod, Max(HISTORY Budget) FROM DEPARTMENT GROUP BY "
                       "DepartementCod HAVING Max(HISTORY Budget) > 350;");
    CHECK(column_texts(rs) == std::vector<std::string>{"'CS'"});
  }
  SUBCASE("aggregate over empty history") {
    auto rs = q(uni(), "SELECT Count(HISTORY Status) FROM TEACHER WHERE TeacherNum = -1;");
    CHECK(cell_text(rs.rows[0][0]) == "0");
  }
  SUBCASE("granule select item groups values") {
    auto rs = q(uni(), "SELECT Budget DECADE FROM DEPARTMENT WHERE DepartementCod = 'CS';");
    REQUIRE(rs.rows.size() == 3);
    CHECK(cell_text(rs.rows[0][0]) == "300 ['1995'-'2000']");
  }
  SUBCASE("non-numeric aggregates are rejected") {
    CHECK_THROWS_WITH_AS(q(uni(), "SELECT Sum(HISTORY Status) FROM TEACHER;"),
                         doctest::Contains("NonNumericAggregate"), Error);
  }
}

TEST_CASE("negation and division via NOT EXISTS over HISTORY") {
  auto groups = q(uni(), "SELECT GroupCod FROM HISTORY GROUPE G WHERE NOT EXISTS (SELECT * "
                         "FROM HISTORY STUDENT S WHERE Nationality = 'French' AND "
                         "G.GroupCod IN HISTORY(S.GroupCod));");
  CHECK(column_texts(groups) == std::vector<std::string>{"'G1'", "'G3'"});

  auto div = q(uni(), "SELECT TeacherNum FROM TEACHER T1 WHERE NOT EXISTS (SELECT * FROM "
                      "AUDIENCE A WHERE NOT EXISTS (SELECT * FROM HISTORY EDUCATION E WHERE "
                      "E.TeacherNum = T1.TeacherNum AND E.AudienceCod = A.AudienceCod));");
  CHECK(column_texts(div) == std::vector<std::string>{"777"});
}

TEST_CASE("restriction before join equals join then restrict") {
  // the same window applied on the link is order-independent
  auto a = q(uni(), "SELECT TeacherNum, Label FROM TEACHER Natural Join BETWEEN '2002' AND "
                    "'2005' DEPARTMENT;");
  auto b = q(uni(), "SELECT TeacherNum, Label FROM TEACHER Natural Join ['2002'-'2005'] "
                    "DEPARTMENT;");
  REQUIRE(a.rows.size() == b.rows.size());
  for (size_t i = 0; i < a.rows.size(); i++) {
    CHECK(cell_text(a.rows[i][0]) == cell_text(b.rows[i][0]));
    CHECK(cell_text(a.rows[i][1]) == cell_text(b.rows[i][1]));
  }
}

TEST_CASE("evaluator errors") {
  CHECK_THROWS_WITH_AS(q(uni(), "SELECT Nope FROM TEACHER;"), doctest::Contains("UnknownColumn"),
                       Error);
  CHECK_THROWS_WITH_AS(q(uni(), "SELECT * FROM NOPE;"), doctest::Contains("UnknownTable"),
                       Error);
  CHECK_THROWS_WITH_AS(q(uni(), "SELECT Status FROM HISTORY MODULE;"),
                       doctest::Contains("TemporalTermOnPlainColumn"), Error);
}
