#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "chronoql/error.hpp"

namespace chronoql {

// Calendar scales, coarse to fine. DECADE and SEMESTER are grouping scales
// only; data is never stored at them.
enum class Granularity { Decade, Year, Semester, Month, Day, Hour, Minute, Second };

const char *granularity_name(Granularity g);
std::optional<Granularity> granularity_from_name(const std::string &name);
bool is_grouping_only(Granularity g);
// True when `a` is strictly coarser than `b`.
bool coarser(Granularity a, Granularity b);
// The finer of the two scales; fails MixedGranularity when the pair has no
// common refinement path (SEMESTER vs DECADE resolves through MONTH/YEAR).
Granularity finer_of(Granularity a, Granularity b);

enum class Dimension { Valid, Transaction };

// One calendar coordinate at a granularity, held as the granule index at
// that scale (years for YEAR, months since year 0 for MONTH, civil days for
// DAY, and so on). Index arithmetic makes period math exact.
class Instant {
public:
  Instant() : gran_(Granularity::Year), index_(0) {}
  Instant(Granularity g, std::int64_t index) : gran_(g), index_(index) {}

  static Instant from_fields(Granularity g, int year, int month = 1, int day = 1,
                             int hour = 0, int minute = 0, int second = 0);
  // Parses 'YYYY', 'M/YYYY', 'D/M/YYYY', 'D/M/YYYY HH', 'D/M/YYYY HH:MM' or
  // 'D/M/YYYY HH:MM:SS' (quotes already stripped); granularity follows the
  // shape of the literal.
  static Instant parse(const std::string &text);

  Granularity granularity() const { return gran_; }
  std::int64_t index() const { return index_; }

  // Exact conversion to a finer or equal scale (start of this granule).
  Instant convert(Granularity g) const;
  // Truncation to a coarser or equal scale (the enclosing granule).
  Instant truncate(Granularity g) const;

  Instant plus(std::int64_t granules) const { return Instant(gran_, index_ + granules); }

  // Comparison converts both operands to the finer scale.
  static int compare(const Instant &a, const Instant &b);
  bool operator==(const Instant &o) const { return compare(*this, o) == 0; }
  bool operator!=(const Instant &o) const { return compare(*this, o) != 0; }
  bool operator<(const Instant &o) const { return compare(*this, o) < 0; }
  bool operator<=(const Instant &o) const { return compare(*this, o) <= 0; }
  bool operator>(const Instant &o) const { return compare(*this, o) > 0; }
  bool operator>=(const Instant &o) const { return compare(*this, o) >= 0; }

  std::string to_string() const;

  struct Fields {
    int year, month, day, hour, minute, second;
  };
  Fields fields() const;

private:
  Granularity gran_;
  std::int64_t index_;
};

// Open-end markers. UC closes nothing in the valid dimension; NOW is its
// transaction-dimension counterpart. Both behave as +infinity in set math.
enum class OpenEnd { None, Uc, Now };

// Half-open granule interval [begin, end) at one granularity.
class Period {
public:
  Period() = default;

  static Period closed(const Instant &begin, const Instant &end, Granularity g);
  // Open-ended period; `marker` selects 'uc' (valid) or 'now' (transaction).
  static Period open(const Instant &begin, Granularity g, OpenEnd marker);
  // Constructor used by the literal parser: end is an instant, 'uc' or 'now'.
  static Period make(const Instant &begin, const std::optional<Instant> &end,
                     Granularity g, Dimension dim);

  Granularity granularity() const { return gran_; }
  std::int64_t begin_index() const { return begin_; }
  // Exclusive end index; INT64_MAX stands for an open end.
  std::int64_t end_index() const { return end_; }
  bool open_ended() const { return marker_ != OpenEnd::None; }
  OpenEnd marker() const { return marker_; }

  Instant begin_instant() const { return Instant(gran_, begin_); }
  Instant end_instant() const { return Instant(gran_, end_); }

  std::int64_t granule_count() const; // fails on open end
  bool contains(const Instant &i) const;

  Period convert(Granularity g) const;

  std::string to_string() const;
  // Parses ['<instant>'-'<instant|uc|now>'].
  static Period parse(const std::string &text, Dimension dim);

  bool operator==(const Period &o) const {
    return gran_ == o.gran_ && begin_ == o.begin_ && end_ == o.end_ && marker_ == o.marker_;
  }

private:
  friend class TemporalElement;
  Granularity gran_ = Granularity::Year;
  std::int64_t begin_ = 0;
  std::int64_t end_ = 0;
  OpenEnd marker_ = OpenEnd::None;
};

// A normalized set of disjoint, non-adjacent periods over one granularity.
// This is the timestamp currency of the whole engine.
class TemporalElement {
public:
  TemporalElement() = default;
  explicit TemporalElement(Granularity g) : gran_(g) {}

  static TemporalElement of(const Period &p);
  // Sorts, drops empties, fuses overlapping or adjacent periods.
  static TemporalElement normalize(std::vector<Period> periods);

  bool empty() const { return periods_.empty(); }
  Granularity granularity() const { return gran_; }
  const std::vector<Period> &periods() const { return periods_; }

  bool contains(const Instant &i) const;
  bool has_open_end() const { return !periods_.empty() && periods_.back().open_ended(); }
  Instant first_begin() const; // fails on empty
  TemporalElement convert(Granularity g) const;
  // Replaces an open end with `ref` (exclusive); may empty the last period.
  TemporalElement resolve_open(const Instant &ref) const;

  std::string to_string() const; // periods joined by " U "
  static TemporalElement parse(const std::string &text, Dimension dim);

  bool operator==(const TemporalElement &o) const;

private:
  Granularity gran_ = Granularity::Year;
  std::vector<Period> periods_; // sorted, disjoint, non-adjacent
};

// Set algebra. Operands are converted to the finer granularity first.
TemporalElement element_intersect(const TemporalElement &a, const TemporalElement &b);
TemporalElement element_union(const TemporalElement &a, const TemporalElement &b);
TemporalElement element_difference(const TemporalElement &a, const TemporalElement &b);

struct Duration {
  std::int64_t count = 0;
  Granularity scale = Granularity::Year;

  std::string to_string() const;
  bool operator==(const Duration &o) const { return count == o.count && scale == o.scale; }
};

enum class WindowKind { History, Past, Future, At, Between, Since, Before, After, When };

const char *window_kind_name(WindowKind k);

// A fully resolved temporal window: bounds are concrete instants, WHEN
// carries a pre-resolved element.
struct WindowSpec {
  WindowKind kind = WindowKind::History;
  Dimension dimension = Dimension::Valid;
  std::optional<Instant> d1;
  std::optional<Instant> d2;
  TemporalElement element; // WHEN only

  static WindowSpec history(Dimension dim = Dimension::Valid) { return {WindowKind::History, dim, {}, {}, {}}; }
};

// Restriction of an element by a window. `ref` is the caller-supplied
// current date (valid dimension) or clock reading (transaction dimension).
TemporalElement window_restrict(const TemporalElement &e, const WindowSpec &w, const Instant &ref);

// Total granule count of `e` converted to `scale` (floor); open ends are
// resolved to `ref` first.
Duration duration_of(const TemporalElement &e, Granularity scale, const Instant &ref);

// Truncates `i` to the enclosing granule at `scale` (which must be coarser
// or equal); the grouping primitive.
Instant group_key(const Instant &i, Granularity scale);

} // namespace chronoql
