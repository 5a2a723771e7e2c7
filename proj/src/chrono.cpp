#include "chronoql/chrono.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <limits>

namespace chronoql {

namespace {

constexpr std::int64_t kOpen = std::numeric_limits<std::int64_t>::max();

std::int64_t floordiv(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b, r = a % b;
  return (r != 0 && (r < 0) != (b < 0)) ? q - 1 : q;
}

std::int64_t floormod(std::int64_t a, std::int64_t b) { return a - floordiv(a, b) * b; }

// Howard Hinnant's civil calendar algorithms (days since 1970-01-01).
std::int64_t days_from_civil(std::int64_t y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = floordiv(y, 400);
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t &y, int &m, int &d) {
  z += 719468;
  const std::int64_t era = floordiv(z, 146097);
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y += m <= 2;
}

int days_in_month(int year, int month) {
  static const int lens[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month == 2) {
    bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    return leap ? 29 : 28;
  }
  return lens[month - 1];
}

int rank(Granularity g) { return static_cast<int>(g); }

// One step finer, with the conversion factor where it is a plain multiple.
// MONTH -> DAY goes through the civil calendar instead.
std::int64_t step_factor(Granularity from) {
  switch (from) {
  case Granularity::Decade: return 10;   // -> Year
  case Granularity::Year: return 2;      // -> Semester
  case Granularity::Semester: return 6;  // -> Month
  case Granularity::Month: return 0;     // -> Day (calendar)
  case Granularity::Day: return 24;      // -> Hour
  case Granularity::Hour: return 60;     // -> Minute
  case Granularity::Minute: return 60;   // -> Second
  case Granularity::Second: return 1;
  }
  return 1;
}

std::int64_t convert_index(std::int64_t idx, Granularity from, Granularity to) {
  while (rank(from) < rank(to)) {
    if (from == Granularity::Month) {
      std::int64_t y = floordiv(idx, 12);
      int m = static_cast<int>(floormod(idx, 12)) + 1;
      idx = days_from_civil(y, m, 1);
      from = Granularity::Day;
    } else {
      idx *= step_factor(from);
      from = static_cast<Granularity>(rank(from) + 1);
    }
  }
  return idx;
}

std::int64_t truncate_index(std::int64_t idx, Granularity from, Granularity to) {
  while (rank(from) > rank(to)) {
    if (from == Granularity::Day) {
      std::int64_t y;
      int m, d;
      civil_from_days(idx, y, m, d);
      idx = y * 12 + (m - 1);
      from = Granularity::Month;
    } else {
      Granularity coarser = static_cast<Granularity>(rank(from) - 1);
      idx = floordiv(idx, step_factor(coarser));
      from = coarser;
    }
  }
  return idx;
}

// Nominal day lengths for duration conversion across the calendar boundary.
std::int64_t nominal_days(Granularity g) {
  switch (g) {
  case Granularity::Decade: return 3650;
  case Granularity::Year: return 365;
  case Granularity::Semester: return 182;
  case Granularity::Month: return 30;
  default: return 1;
  }
}

// Granules of `to` per granule of `from` (from coarser than to).
std::int64_t duration_factor(Granularity from, Granularity to) {
  if (from == to) return 1;
  std::int64_t f = 1;
  if (rank(from) <= rank(Granularity::Month) && rank(to) >= rank(Granularity::Day)) {
    f = nominal_days(from);
    from = Granularity::Day;
  }
  while (rank(from) < rank(to)) {
    f *= step_factor(from);
    from = static_cast<Granularity>(rank(from) + 1);
  }
  return f;
}

} // namespace

const char *granularity_name(Granularity g) {
  switch (g) {
  case Granularity::Decade: return "DECADE";
  case Granularity::Year: return "YEAR";
  case Granularity::Semester: return "SEMESTER";
  case Granularity::Month: return "MONTH";
  case Granularity::Day: return "DAY";
  case Granularity::Hour: return "HOUR";
  case Granularity::Minute: return "MINUTE";
  case Granularity::Second: return "SECOND";
  }
  return "?";
}

std::optional<Granularity> granularity_from_name(const std::string &name) {
  std::string up;
  for (char c : name) up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (!up.empty() && up.back() == 'S') up.pop_back(); // YEARS, DAYS, ...
  static const std::array<Granularity, 8> all = {
      Granularity::Decade, Granularity::Year,   Granularity::Semester, Granularity::Month,
      Granularity::Day,    Granularity::Hour,   Granularity::Minute,   Granularity::Second};
  for (Granularity g : all)
    if (up == granularity_name(g)) return g;
  return std::nullopt;
}

bool is_grouping_only(Granularity g) {
  return g == Granularity::Decade || g == Granularity::Semester;
}

bool coarser(Granularity a, Granularity b) { return rank(a) < rank(b); }

Granularity finer_of(Granularity a, Granularity b) { return rank(a) >= rank(b) ? a : b; }

// ---------------------------------------------------------------------------
// Instant

Instant Instant::from_fields(Granularity g, int year, int month, int day, int hour,
                             int minute, int second) {
  if (month < 1 || month > 12 || day < 1 || day > days_in_month(year, month) ||
      hour < 0 || hour > 23 || minute < 0 || minute > 59 || second < 0 || second > 59)
    fail(Errc::BadInstant, "invalid calendar coordinate");
  std::int64_t idx;
  switch (g) {
  case Granularity::Decade: idx = floordiv(year, 10); break;
  case Granularity::Year: idx = year; break;
  case Granularity::Semester: idx = static_cast<std::int64_t>(year) * 2 + (month > 6 ? 1 : 0); break;
  case Granularity::Month: idx = static_cast<std::int64_t>(year) * 12 + (month - 1); break;
  case Granularity::Day: idx = days_from_civil(year, month, day); break;
  case Granularity::Hour: idx = days_from_civil(year, month, day) * 24 + hour; break;
  case Granularity::Minute: idx = (days_from_civil(year, month, day) * 24 + hour) * 60 + minute; break;
  case Granularity::Second:
    idx = ((days_from_civil(year, month, day) * 24 + hour) * 60 + minute) * 60 + second;
    break;
  default: fail(Errc::BadInstant, "bad granularity");
  }
  return Instant(g, idx);
}

Instant::Fields Instant::fields() const {
  std::int64_t secs = 0, days = 0;
  Fields f{0, 1, 1, 0, 0, 0};
  switch (gran_) {
  case Granularity::Decade: f.year = static_cast<int>(index_ * 10); return f;
  case Granularity::Year: f.year = static_cast<int>(index_); return f;
  case Granularity::Semester:
    f.year = static_cast<int>(floordiv(index_, 2));
    f.month = floormod(index_, 2) == 0 ? 1 : 7;
    return f;
  case Granularity::Month: {
    f.year = static_cast<int>(floordiv(index_, 12));
    f.month = static_cast<int>(floormod(index_, 12)) + 1;
    return f;
  }
  case Granularity::Day: days = index_; break;
  case Granularity::Hour: days = floordiv(index_, 24); secs = floormod(index_, 24) * 3600; break;
  case Granularity::Minute: days = floordiv(index_, 1440); secs = floormod(index_, 1440) * 60; break;
  case Granularity::Second: days = floordiv(index_, 86400); secs = floormod(index_, 86400); break;
  default: break;
  }
  std::int64_t y;
  int m, d;
  civil_from_days(days, y, m, d);
  f.year = static_cast<int>(y);
  f.month = m;
  f.day = d;
  f.hour = static_cast<int>(secs / 3600);
  f.minute = static_cast<int>((secs / 60) % 60);
  f.second = static_cast<int>(secs % 60);
  return f;
}

Instant Instant::convert(Granularity g) const {
  if (rank(g) < rank(gran_))
    fail(Errc::MixedGranularity, "cannot losslessly convert to coarser scale");
  return Instant(g, convert_index(index_, gran_, g));
}

Instant Instant::truncate(Granularity g) const {
  if (rank(g) > rank(gran_)) return convert(g);
  return Instant(g, truncate_index(index_, gran_, g));
}

int Instant::compare(const Instant &a, const Instant &b) {
  Granularity g = finer_of(a.gran_, b.gran_);
  std::int64_t ia = convert_index(a.index_, a.gran_, g);
  std::int64_t ib = convert_index(b.index_, b.gran_, g);
  return ia < ib ? -1 : ia > ib ? 1 : 0;
}

namespace {

std::int64_t parse_int(const std::string &s, size_t &pos) {
  size_t start = pos;
  while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) pos++;
  if (pos == start) fail(Errc::BadInstant, "expected digits in '" + s + "'");
  std::int64_t v = 0;
  std::from_chars(s.data() + start, s.data() + pos, v);
  return v;
}

void pad2(std::string &out, int v) {
  if (v < 10) out.push_back('0');
  out += std::to_string(v);
}

} // namespace

Instant Instant::parse(const std::string &text) {
  size_t pos = 0;
  std::int64_t a = parse_int(text, pos);
  if (pos == text.size()) return from_fields(Granularity::Year, static_cast<int>(a));
  if (text[pos] != '/') fail(Errc::BadInstant, "malformed instant '" + text + "'");
  pos++;
  std::int64_t b = parse_int(text, pos);
  if (pos == text.size()) // M/YYYY
    return from_fields(Granularity::Month, static_cast<int>(b), static_cast<int>(a));
  if (text[pos] != '/') fail(Errc::BadInstant, "malformed instant '" + text + "'");
  pos++;
  std::int64_t y = parse_int(text, pos);
  int day = static_cast<int>(a), month = static_cast<int>(b), year = static_cast<int>(y);
  if (pos == text.size()) return from_fields(Granularity::Day, year, month, day);
  if (text[pos] != ' ') fail(Errc::BadInstant, "malformed instant '" + text + "'");
  pos++;
  std::int64_t hh = parse_int(text, pos);
  if (pos == text.size())
    return from_fields(Granularity::Hour, year, month, day, static_cast<int>(hh));
  if (text[pos] != ':') fail(Errc::BadInstant, "malformed instant '" + text + "'");
  pos++;
  std::int64_t mi = parse_int(text, pos);
  if (pos == text.size())
    return from_fields(Granularity::Minute, year, month, day, static_cast<int>(hh), static_cast<int>(mi));
  if (text[pos] != ':') fail(Errc::BadInstant, "malformed instant '" + text + "'");
  pos++;
  std::int64_t ss = parse_int(text, pos);
  if (pos != text.size()) fail(Errc::BadInstant, "trailing characters in instant '" + text + "'");
  return from_fields(Granularity::Second, year, month, day, static_cast<int>(hh),
                     static_cast<int>(mi), static_cast<int>(ss));
}

std::string Instant::to_string() const {
  Fields f = fields();
  std::string out;
  switch (gran_) {
  case Granularity::Decade: return std::to_string(f.year) + "s";
  case Granularity::Year: {
    out = std::to_string(f.year);
    while (out.size() < 4) out.insert(out.begin(), '0');
    return out;
  }
  case Granularity::Semester:
    return std::to_string(f.year) + "-S" + (f.month > 6 ? "2" : "1");
  case Granularity::Month:
    return std::to_string(f.month) + "/" + std::to_string(f.year);
  case Granularity::Day:
    return std::to_string(f.day) + "/" + std::to_string(f.month) + "/" + std::to_string(f.year);
  case Granularity::Hour:
    out = std::to_string(f.day) + "/" + std::to_string(f.month) + "/" + std::to_string(f.year) + " ";
    pad2(out, f.hour);
    return out;
  case Granularity::Minute:
    out = std::to_string(f.day) + "/" + std::to_string(f.month) + "/" + std::to_string(f.year) + " ";
    pad2(out, f.hour);
    out.push_back(':');
    pad2(out, f.minute);
    return out;
  case Granularity::Second:
    out = std::to_string(f.day) + "/" + std::to_string(f.month) + "/" + std::to_string(f.year) + " ";
    pad2(out, f.hour);
    out.push_back(':');
    pad2(out, f.minute);
    out.push_back(':');
    pad2(out, f.second);
    return out;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Period

Period Period::closed(const Instant &begin, const Instant &end, Granularity g) {
  return make(begin, end, g, Dimension::Valid);
}

Period Period::open(const Instant &begin, Granularity g, OpenEnd marker) {
  Period p;
  p.gran_ = g;
  p.begin_ = begin.convert(g).index();
  p.end_ = kOpen;
  p.marker_ = marker;
  return p;
}

Period Period::make(const Instant &begin, const std::optional<Instant> &end, Granularity g,
                    Dimension dim) {
  if (!end.has_value())
    return open(begin, g, dim == Dimension::Valid ? OpenEnd::Uc : OpenEnd::Now);
  Period p;
  p.gran_ = g;
  if (rank(begin.granularity()) > rank(g) || rank(end->granularity()) > rank(g))
    fail(Errc::MixedGranularity, "period bound finer than period granularity");
  p.begin_ = begin.convert(g).index();
  p.end_ = end->convert(g).index();
  if (p.begin_ >= p.end_)
    fail(Errc::EmptyPeriod, "period " + begin.to_string() + "-" + end->to_string() + " is empty");
  return p;
}

std::int64_t Period::granule_count() const {
  if (open_ended()) fail(Errc::BadMarker, "open-ended period has no finite granule count");
  return end_ - begin_;
}

bool Period::contains(const Instant &i) const {
  Granularity g = finer_of(gran_, i.granularity());
  std::int64_t ii = i.convert(g).index();
  std::int64_t b = convert_index(begin_, gran_, g);
  std::int64_t e = open_ended() ? kOpen : convert_index(end_, gran_, g);
  return ii >= b && ii < e;
}

Period Period::convert(Granularity g) const {
  if (g == gran_) return *this;
  Period p;
  p.gran_ = g;
  p.begin_ = convert_index(begin_, gran_, g);
  p.end_ = open_ended() ? kOpen : convert_index(end_, gran_, g);
  p.marker_ = marker_;
  return p;
}

std::string Period::to_string() const {
  std::string out = "['" + begin_instant().to_string() + "'-'";
  if (marker_ == OpenEnd::Uc)
    out += "uc";
  else if (marker_ == OpenEnd::Now)
    out += "now";
  else
    out += end_instant().to_string();
  out += "']";
  return out;
}

namespace {

std::string lower(std::string s) {
  for (char &c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Splits "['a'-'b']" into the two quoted payloads.
void split_period_literal(const std::string &text, std::string &a, std::string &b) {
  size_t i = 0;
  auto expect = [&](char c) {
    if (i >= text.size() || text[i] != c)
      fail(Errc::BadInstant, "malformed period literal '" + text + "'");
    i++;
  };
  auto quoted = [&]() {
    expect('\'');
    size_t start = i;
    while (i < text.size() && text[i] != '\'') i++;
    if (i >= text.size()) fail(Errc::BadInstant, "malformed period literal '" + text + "'");
    std::string s = text.substr(start, i - start);
    i++;
    return s;
  };
  while (i < text.size() && text[i] == ' ') i++;
  expect('[');
  a = quoted();
  while (i < text.size() && text[i] == ' ') i++;
  expect('-');
  while (i < text.size() && text[i] == ' ') i++;
  b = quoted();
  expect(']');
}

} // namespace

Period Period::parse(const std::string &text, Dimension dim) {
  std::string a, b;
  split_period_literal(text, a, b);
  Instant begin = Instant::parse(a);
  std::string bl = lower(b);
  if (bl == "uc") {
    if (dim != Dimension::Valid) fail(Errc::BadMarker, "'uc' is a valid-time marker");
    return open(begin, begin.granularity(), OpenEnd::Uc);
  }
  if (bl == "now") {
    if (dim != Dimension::Transaction) fail(Errc::BadMarker, "'now' is a transaction-time marker");
    return open(begin, begin.granularity(), OpenEnd::Now);
  }
  Instant end = Instant::parse(b);
  Granularity g = finer_of(begin.granularity(), end.granularity());
  return make(begin, end, g, dim);
}

// ---------------------------------------------------------------------------
// TemporalElement

TemporalElement TemporalElement::of(const Period &p) {
  TemporalElement e(p.granularity());
  e.periods_.push_back(p);
  return e;
}

TemporalElement TemporalElement::normalize(std::vector<Period> periods) {
  TemporalElement e;
  if (periods.empty()) return e;
  Granularity g = periods.front().granularity();
  for (const Period &p : periods)
    if (p.granularity() != g)
      fail(Errc::MixedGranularity, "element periods at mixed granularities");
  e.gran_ = g;
  std::sort(periods.begin(), periods.end(), [](const Period &x, const Period &y) {
    return x.begin_ != y.begin_ ? x.begin_ < y.begin_ : x.end_ < y.end_;
  });
  for (const Period &p : periods) {
    if (p.begin_ >= p.end_) continue; // empty
    if (!e.periods_.empty() && p.begin_ <= e.periods_.back().end_) {
      Period &last = e.periods_.back();
      if (p.end_ > last.end_) {
        last.end_ = p.end_;
        last.marker_ = p.marker_;
      }
    } else {
      e.periods_.push_back(p);
    }
  }
  return e;
}

bool TemporalElement::contains(const Instant &i) const {
  for (const Period &p : periods_)
    if (p.contains(i)) return true;
  return false;
}

Instant TemporalElement::first_begin() const {
  if (empty()) fail(Errc::EmptyPeriod, "empty element has no begin");
  return periods_.front().begin_instant();
}

TemporalElement TemporalElement::convert(Granularity g) const {
  if (empty() || g == gran_) {
    TemporalElement e = *this;
    e.gran_ = empty() ? g : gran_;
    return e;
  }
  TemporalElement e(g);
  for (const Period &p : periods_) e.periods_.push_back(p.convert(g));
  return e;
}

TemporalElement TemporalElement::resolve_open(const Instant &ref) const {
  if (!has_open_end()) return *this;
  TemporalElement e = *this;
  std::int64_t cut = ref.truncate(gran_).index();
  Period &last = e.periods_.back();
  last.marker_ = OpenEnd::None;
  last.end_ = cut;
  if (last.begin_ >= last.end_) e.periods_.pop_back();
  return e;
}

std::string TemporalElement::to_string() const {
  if (empty()) return "[]";
  std::string out;
  for (size_t i = 0; i < periods_.size(); i++) {
    if (i) out += " U ";
    out += periods_[i].to_string();
  }
  return out;
}

TemporalElement TemporalElement::parse(const std::string &text, Dimension dim) {
  std::vector<Period> ps;
  size_t pos = 0;
  std::string t = text;
  while (pos < t.size()) {
    size_t end = t.find(" U ", pos);
    std::string part = end == std::string::npos ? t.substr(pos) : t.substr(pos, end - pos);
    if (part == "[]" && ps.empty() && end == std::string::npos) break;
    ps.push_back(Period::parse(part, dim));
    if (end == std::string::npos) break;
    pos = end + 3;
  }
  return normalize(std::move(ps));
}

bool TemporalElement::operator==(const TemporalElement &o) const {
  if (empty() && o.empty()) return true;
  if (gran_ != o.gran_) {
    Granularity g = finer_of(gran_, o.gran_);
    return convert(g) == o.convert(g);
  }
  return periods_ == o.periods_;
}

// ---------------------------------------------------------------------------
// Set algebra

namespace {

void common_scale(const TemporalElement &a, const TemporalElement &b, TemporalElement &ca,
                  TemporalElement &cb) {
  Granularity g = a.empty() ? b.granularity()
                : b.empty() ? a.granularity()
                            : finer_of(a.granularity(), b.granularity());
  ca = a.convert(g);
  cb = b.convert(g);
}

struct Span {
  std::int64_t begin, end;
  OpenEnd marker;
};

std::vector<Span> spans(const TemporalElement &e) {
  std::vector<Span> out;
  for (const Period &p : e.periods())
    out.push_back({p.begin_index(), p.end_index(), p.marker()});
  return out;
}

TemporalElement from_spans(Granularity g, const std::vector<Span> &ss, OpenEnd fallback) {
  std::vector<Period> ps;
  for (const Span &s : ss) {
    if (s.begin >= s.end) continue;
    if (s.end == kOpen)
      ps.push_back(Period::open(Instant(g, s.begin), g, s.marker == OpenEnd::None ? fallback : s.marker));
    else
      ps.push_back(Period::closed(Instant(g, s.begin), Instant(g, s.end), g));
  }
  return TemporalElement::normalize(std::move(ps));
}

OpenEnd marker_of(const TemporalElement &a, const TemporalElement &b) {
  if (a.has_open_end()) return a.periods().back().marker();
  if (b.has_open_end()) return b.periods().back().marker();
  return OpenEnd::Uc;
}

} // namespace

TemporalElement element_intersect(const TemporalElement &a, const TemporalElement &b) {
  TemporalElement ca, cb;
  common_scale(a, b, ca, cb);
  std::vector<Span> sa = spans(ca), sb = spans(cb), out;
  size_t i = 0, j = 0;
  while (i < sa.size() && j < sb.size()) {
    std::int64_t lo = std::max(sa[i].begin, sb[j].begin);
    std::int64_t hi = std::min(sa[i].end, sb[j].end);
    if (lo < hi) {
      OpenEnd m = OpenEnd::None;
      if (hi == kOpen) m = sa[i].marker != OpenEnd::None ? sa[i].marker : sb[j].marker;
      out.push_back({lo, hi, m});
    }
    if (sa[i].end <= sb[j].end) i++; else j++;
  }
  return from_spans(ca.granularity(), out, marker_of(a, b));
}

TemporalElement element_union(const TemporalElement &a, const TemporalElement &b) {
  TemporalElement ca, cb;
  common_scale(a, b, ca, cb);
  std::vector<Period> ps = ca.periods();
  for (const Period &p : cb.periods()) ps.push_back(p);
  return TemporalElement::normalize(std::move(ps));
}

TemporalElement element_difference(const TemporalElement &a, const TemporalElement &b) {
  TemporalElement ca, cb;
  common_scale(a, b, ca, cb);
  std::vector<Span> out;
  std::vector<Span> sb = spans(cb);
  for (const Span &s : spans(ca)) {
    std::int64_t cur = s.begin;
    for (const Span &t : sb) {
      if (t.end <= cur || t.begin >= s.end) continue;
      if (t.begin > cur) out.push_back({cur, t.begin, OpenEnd::None});
      cur = std::max(cur, t.end);
      if (cur >= s.end) break;
    }
    if (cur < s.end) out.push_back({cur, s.end, s.end == kOpen ? s.marker : OpenEnd::None});
  }
  return from_spans(ca.granularity(), out, marker_of(a, b));
}

// ---------------------------------------------------------------------------
// Windows, durations, grouping

const char *window_kind_name(WindowKind k) {
  switch (k) {
  case WindowKind::History: return "HISTORY";
  case WindowKind::Past: return "PAST";
  case WindowKind::Future: return "FUTURE";
  case WindowKind::At: return "@";
  case WindowKind::Between: return "BETWEEN";
  case WindowKind::Since: return "SINCE";
  case WindowKind::Before: return "BEFORE";
  case WindowKind::After: return "AFTER";
  case WindowKind::When: return "WHEN";
  }
  return "?";
}

namespace {

TemporalElement clip(const TemporalElement &e, std::optional<Instant> lo_incl,
                     std::optional<Instant> hi_excl, OpenEnd marker) {
  if (e.empty()) return e;
  Granularity g = e.granularity();
  if (lo_incl) g = finer_of(g, lo_incl->granularity());
  if (hi_excl) g = finer_of(g, hi_excl->granularity());
  TemporalElement ce = e.convert(g);
  std::vector<Span> window;
  std::int64_t lo = lo_incl ? lo_incl->convert(g).index() : std::numeric_limits<std::int64_t>::min();
  std::int64_t hi = hi_excl ? hi_excl->convert(g).index() : kOpen;
  window.push_back({lo, hi, hi == kOpen ? marker : OpenEnd::None});
  return element_intersect(ce, from_spans(g, window, marker));
}

} // namespace

TemporalElement window_restrict(const TemporalElement &e, const WindowSpec &w, const Instant &ref) {
  if (w.kind == WindowKind::Future && w.dimension == Dimension::Transaction)
    fail(Errc::FutureOnTransaction, "FUTURE can not apply with the transaction-time dimension");
  OpenEnd m = w.dimension == Dimension::Valid ? OpenEnd::Uc : OpenEnd::Now;
  switch (w.kind) {
  case WindowKind::History:
    return e;
  case WindowKind::Past:
    return clip(e, std::nullopt, ref, m);
  case WindowKind::Future:
    return clip(e, ref.plus(1), std::nullopt, m);
  case WindowKind::At:
    return clip(e, *w.d1, w.d1->plus(1), m);
  case WindowKind::Between:
    return clip(e, *w.d1, w.d2->plus(1), m);
  case WindowKind::Since:
    return clip(e, *w.d1, std::nullopt, m);
  case WindowKind::After:
    return clip(e, w.d1->plus(1), std::nullopt, m);
  case WindowKind::Before:
    return clip(e, std::nullopt, *w.d1, m);
  case WindowKind::When:
    return element_intersect(e, w.element);
  }
  return e;
}

Duration duration_of(const TemporalElement &e, Granularity scale, const Instant &ref) {
  TemporalElement r = e.resolve_open(ref);
  std::int64_t count = 0;
  for (const Period &p : r.periods()) count += p.granule_count();
  Granularity g = r.granularity();
  if (rank(scale) == rank(g)) return {count, scale};
  if (rank(scale) > rank(g)) return {count * duration_factor(g, scale), scale};
  return {floordiv(count, duration_factor(scale, g)), scale};
}

Instant group_key(const Instant &i, Granularity scale) {
  if (rank(scale) > rank(i.granularity()))
    fail(Errc::ScaleTooFine, std::string("grouping scale ") + granularity_name(scale) +
                                 " is finer than the value's granularity");
  return i.truncate(scale);
}

std::string Duration::to_string() const {
  return std::to_string(count) + " " + granularity_name(scale) + (count == 1 ? "" : "S");
}

} // namespace chronoql
