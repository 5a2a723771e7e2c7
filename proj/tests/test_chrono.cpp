#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "chronoql/chrono.hpp"
#include "oracle.hpp"

using namespace chronoql;

namespace {

Instant year(int y) { return Instant::from_fields(Granularity::Year, y); }

TemporalElement elem(const std::string &lit, Dimension dim = Dimension::Valid) {
  return TemporalElement::parse(lit, dim);
}

// Random element generator over the oracle domain.
struct Gen {
  std::mt19937 rng;
  explicit Gen(unsigned seed) : rng(seed) {}

  TemporalElement element() {
    std::uniform_int_distribution<int> nperiods(0, 4);
    std::uniform_int_distribution<int> y(1990, 2039);
    std::uniform_int_distribution<int> len(1, 12);
    std::uniform_int_distribution<int> open(0, 9);
    std::vector<Period> ps;
    int n = nperiods(rng);
    for (int i = 0; i < n; i++) {
      int b = y(rng);
      if (open(rng) == 0)
        ps.push_back(Period::open(year(b), Granularity::Year, OpenEnd::Uc));
      else
        ps.push_back(Period::closed(year(b), year(b + len(rng)), Granularity::Year));
    }
    return TemporalElement::normalize(std::move(ps));
  }
};

void check_invariants(const TemporalElement &e) {
  const auto &ps = e.periods();
  for (size_t i = 0; i < ps.size(); i++) {
    REQUIRE(ps[i].begin_index() < ps[i].end_index());
    if (i) REQUIRE(ps[i - 1].end_index() < ps[i].begin_index()); // disjoint and non-adjacent
    if (ps[i].open_ended()) REQUIRE(i == ps.size() - 1);
  }
}

} // namespace

TEST_CASE("instant literal round trips") {
  CHECK(Instant::parse("2005").to_string() == "2005");
  CHECK(Instant::parse("2/1/2008").to_string() == "2/1/2008");
  CHECK(Instant::parse("1/5/1973").granularity() == Granularity::Day);
  CHECK(Instant::parse("10/1/2002 09:00:00").to_string() == "10/1/2002 09:00:00");
  CHECK(Instant::parse("9/2010").granularity() == Granularity::Month);
  CHECK_THROWS_AS(Instant::parse("13/13/2008"), Error);
  CHECK_THROWS_AS(Instant::parse("2008x"), Error);
}

TEST_CASE("instant comparison crosses granularities") {
  CHECK(Instant::parse("2005") == Instant::parse("1/1/2005"));
  CHECK(Instant::parse("2/1/2005") > Instant::parse("2005"));
  CHECK(Instant::parse("2004") < Instant::parse("1/1/2005"));
}

TEST_CASE("period_make enforces Table-1 literal semantics") {
  Period p = Period::closed(year(2002), year(2005), Granularity::Year);
  CHECK(p.granule_count() == 3); // granules 2002, 2003, 2004
  CHECK(p.contains(year(2004)));
  CHECK(!p.contains(year(2005)));
  CHECK(p.to_string() == "['2002'-'2005']");

  CHECK_THROWS_AS(Period::closed(year(2005), year(2005), Granularity::Year), Error);

  Period open = Period::parse("['2008'-'uc']", Dimension::Valid);
  CHECK(open.open_ended());
  CHECK(open.contains(year(2030)));
  CHECK(open.to_string() == "['2008'-'uc']");

  CHECK_THROWS_AS(Period::parse("['2008'-'uc']", Dimension::Transaction), Error);
  CHECK_THROWS_AS(Period::parse("['2008'-'now']", Dimension::Valid), Error);
}

TEST_CASE("element_normalize coalesces") {
  TemporalElement tennis = elem("['2003'-'2004'] U ['2010'-'uc']");
  CHECK(tennis.periods().size() == 2);
  CHECK(tennis.to_string() == "['2003'-'2004'] U ['2010'-'uc']");

  TemporalElement fused = TemporalElement::normalize(
      {Period::closed(year(2002), year(2005), Granularity::Year),
       Period::closed(year(2005), year(2008), Granularity::Year)});
  CHECK(fused.to_string() == "['2002'-'2008']");

  CHECK(TemporalElement::normalize({}).empty());

  CHECK_THROWS_AS(TemporalElement::normalize(
                      {Period::closed(year(2002), year(2005), Granularity::Year),
                       Period::closed(Instant::parse("1/1/2002"), Instant::parse("1/1/2003"),
                                      Granularity::Day)}),
                  Error);
}

TEST_CASE("element set algebra on spec examples") {
  CHECK(element_intersect(elem("['2002'-'2005']"), elem("['2004'-'2010']")).to_string() ==
        "['2004'-'2005']");
  CHECK(element_intersect(elem("['2005'-'2008']"), elem("['2010'-'uc']")).empty());
  CHECK(element_intersect(elem("['2003'-'2004'] U ['2010'-'uc']"), elem("['2009'-'2012']"))
            .to_string() == "['2010'-'2012']");

  CHECK(element_union(elem("['2002'-'2005']"), elem("['2005'-'2008']")).to_string() ==
        "['2002'-'2008']");
  CHECK(element_difference(elem("['2002'-'2008']"), elem("['2004'-'2006']")).to_string() ==
        "['2002'-'2004'] U ['2006'-'2008']");
  TemporalElement e = elem("['2002'-'2005'] U ['2010'-'uc']");
  CHECK(element_difference(e, e).empty());
}

TEST_CASE("algebra agrees with the exhaustive granule oracle") {
  Gen gen(20110607);
  oracle::Domain dom;
  for (int iter = 0; iter < 4000; iter++) {
    TemporalElement a = gen.element(), b = gen.element();
    auto ga = oracle::granules(a, dom), gb = oracle::granules(b, dom);

    TemporalElement i = element_intersect(a, b);
    TemporalElement u = element_union(a, b);
    TemporalElement d = element_difference(a, b);
    check_invariants(i);
    check_invariants(u);
    check_invariants(d);
    REQUIRE(oracle::granules(i, dom) == oracle::set_intersect(ga, gb));
    REQUIRE(oracle::granules(u, dom) == oracle::set_union(ga, gb));
    REQUIRE(oracle::granules(d, dom) == oracle::set_difference(ga, gb));
  }
}

TEST_CASE("intersect and union are commutative, associative, distributive") {
  Gen gen(42);
  for (int iter = 0; iter < 1500; iter++) {
    TemporalElement a = gen.element(), b = gen.element(), c = gen.element();
    REQUIRE(element_intersect(a, b) == element_intersect(b, a));
    REQUIRE(element_union(a, b) == element_union(b, a));
    REQUIRE(element_intersect(a, element_intersect(b, c)) ==
            element_intersect(element_intersect(a, b), c));
    REQUIRE(element_union(a, element_union(b, c)) == element_union(element_union(a, b), c));
    REQUIRE(element_intersect(a, element_union(b, c)) ==
            element_union(element_intersect(a, b), element_intersect(a, c)));
  }
}

TEST_CASE("normalize is idempotent") {
  Gen gen(7);
  for (int iter = 0; iter < 500; iter++) {
    TemporalElement a = gen.element();
    TemporalElement again = TemporalElement::normalize(a.periods());
    REQUIRE(a == again);
  }
}

TEST_CASE("window_restrict") {
  TemporalElement status = elem("['2002'-'2005'] U ['2005'-'2008'] U ['2008'-'uc']");
  Instant ref = year(2011);

  SUBCASE("HISTORY is the identity") {
    WindowSpec w = WindowSpec::history();
    CHECK(window_restrict(status, w, ref) == status);
  }
  SUBCASE("AT a date keeps one granule") {
    WindowSpec w{WindowKind::At, Dimension::Valid, year(2006), {}, {}};
    CHECK(window_restrict(status, w, ref).to_string() == "['2006'-'2007']");
  }
  SUBCASE("BETWEEN is inclusive of both bounds") {
    WindowSpec w{WindowKind::Between, Dimension::Valid, year(2002), year(2006), {}};
    CHECK(window_restrict(status, w, ref).to_string() == "['2002'-'2007']");
  }
  SUBCASE("PAST stops before the reference") {
    WindowSpec w{WindowKind::Past, Dimension::Valid, {}, {}, {}};
    CHECK(window_restrict(status, w, ref).to_string() == "['2002'-'2011']");
  }
  SUBCASE("FUTURE starts after the reference") {
    WindowSpec w{WindowKind::Future, Dimension::Valid, {}, {}, {}};
    CHECK(window_restrict(status, w, ref).to_string() == "['2012'-'uc']");
  }
  SUBCASE("FUTURE rejected on the transaction dimension") {
    WindowSpec w{WindowKind::Future, Dimension::Transaction, {}, {}, {}};
    CHECK_THROWS_AS(window_restrict(status, w, ref), Error);
  }
  SUBCASE("SINCE / AFTER / BEFORE") {
    WindowSpec since{WindowKind::Since, Dimension::Valid, year(2006), {}, {}};
    CHECK(window_restrict(status, since, ref).to_string() == "['2006'-'uc']");
    WindowSpec after{WindowKind::After, Dimension::Valid, year(2006), {}, {}};
    CHECK(window_restrict(status, after, ref).to_string() == "['2007'-'uc']");
    WindowSpec before{WindowKind::Before, Dimension::Valid, year(2006), {}, {}};
    CHECK(window_restrict(status, before, ref).to_string() == "['2002'-'2006']");
  }
  SUBCASE("WHEN intersects a resolved element") {
    WindowSpec w{WindowKind::When, Dimension::Valid, {}, {}, elem("['2004'-'2006']")};
    CHECK(window_restrict(status, w, ref).to_string() == "['2004'-'2006']");
  }
  SUBCASE("finer window bound converts the element") {
    WindowSpec w{WindowKind::At, Dimension::Valid, Instant::parse("2/1/2008"), {}, {}};
    CHECK(window_restrict(status, w, ref).to_string() == "['2/1/2008'-'3/1/2008']");
  }
}

TEST_CASE("window partition law: PAST, AT ref, FUTURE partition the element") {
  Gen gen(99);
  oracle::Domain dom;
  for (int iter = 0; iter < 2000; iter++) {
    TemporalElement e = gen.element();
    Instant ref = year(1990 + static_cast<int>(gen.rng() % 51));
    auto past = oracle::granules(
        window_restrict(e, {WindowKind::Past, Dimension::Valid, {}, {}, {}}, ref), dom);
    auto at = oracle::granules(
        window_restrict(e, {WindowKind::At, Dimension::Valid, ref, {}, {}}, ref), dom);
    auto fut = oracle::granules(
        window_restrict(e, {WindowKind::Future, Dimension::Valid, {}, {}, {}}, ref), dom);
    REQUIRE(oracle::set_intersect(past, at).empty());
    REQUIRE(oracle::set_intersect(at, fut).empty());
    REQUIRE(oracle::set_intersect(past, fut).empty());
    REQUIRE(oracle::set_union(oracle::set_union(past, at), fut) == oracle::granules(e, dom));
  }
}

TEST_CASE("duration_of") {
  CHECK(duration_of(elem("['2004'-'2010']"), Granularity::Year, year(2013)).count == 6);
  CHECK(duration_of(TemporalElement(), Granularity::Year, year(2013)).count == 0);
  CHECK(duration_of(elem("['2010'-'uc']"), Granularity::Year, year(2013)).count == 3);
  CHECK(duration_of(elem("['2004'-'2010']"), Granularity::Month, year(2013)).count == 72);

  SUBCASE("additive over disjoint elements") {
    Gen gen(5);
    for (int iter = 0; iter < 500; iter++) {
      TemporalElement a = gen.element(), b = gen.element();
      TemporalElement bOnly = element_difference(b, a);
      Instant ref = year(2060); // beyond every closed period the generator can produce
      auto total = duration_of(element_union(a, bOnly), Granularity::Year, ref).count;
      REQUIRE(total == duration_of(a, Granularity::Year, ref).count +
                           duration_of(bOnly, Granularity::Year, ref).count);
    }
  }
}

TEST_CASE("group_key truncation") {
  CHECK(group_key(year(2004), Granularity::Decade).to_string() == "2000s");
  CHECK(group_key(Instant::parse("15/9/2008"), Granularity::Semester).to_string() == "2008-S2");
  CHECK(group_key(year(2010), Granularity::Year).to_string() == "2010");
  CHECK_THROWS_AS(group_key(year(2010), Granularity::Day), Error);
}

TEST_CASE("resolve_open replaces markers with the reference") {
  TemporalElement e = elem("['2003'-'2004'] U ['2010'-'uc']");
  CHECK(e.resolve_open(year(2013)).to_string() == "['2003'-'2004'] U ['2010'-'2013']");
  CHECK(elem("['2013'-'uc']").resolve_open(year(2013)).empty());
  CHECK(e.resolve_open(year(2013)) == e.resolve_open(year(2013)).resolve_open(year(2020)));
}
