#pragma once

#include <cstdint>
#include <string>

namespace epp {

// Calendar date (proleptic Gregorian). Hand-rolled because the toolchain's
// C++20 <chrono> calendar support is incomplete; the conversion pair below is
// the standard civil-days algorithm.
struct Date {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;    // 1..31

  friend bool operator==(const Date& a, const Date& b) {
    return a.year == b.year && a.month == b.month && a.day == b.day;
  }
  friend bool operator!=(const Date& a, const Date& b) { return !(a == b); }
  friend bool operator<(const Date& a, const Date& b);
  friend bool operator<=(const Date& a, const Date& b) { return a < b || a == b; }
};

// Days since 1970-01-01 (negative before).
std::int64_t days_from_civil(const Date& d);
Date civil_from_days(std::int64_t z);

Date add_days(const Date& d, std::int64_t n);

// "YYYY-MM-DD". parse_date throws DataError on malformed input.
std::string format_date(const Date& d);
Date parse_date(const std::string& s);

// Inclusive interval.
struct DateRange {
  Date start;
  Date end;

  bool contains(const Date& d) const { return start <= d && d <= end; }
  bool overlaps(const DateRange& o) const { return start <= o.end && o.start <= end; }
};

}  // namespace epp
