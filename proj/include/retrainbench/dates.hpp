#pragma once

#include <cstdint>
#include <string>

namespace retrainbench {

/// Calendar dates are carried as days since 1970-01-01 (can be negative).
using DayNumber = std::int64_t;

struct CivilDate {
    int year;
    unsigned month;  // 1..12
    unsigned day;    // 1..31
};

DayNumber days_from_civil(int year, unsigned month, unsigned day);
CivilDate civil_from_days(DayNumber z);

/// Parses a strict `YYYY-MM-DD` date. Throws MalformedRow on anything else.
DayNumber parse_date(const std::string& text);
std::string format_date(DayNumber day);

/// 0 = Monday .. 6 = Sunday.
int weekday(DayNumber day);

/// 1-based ordinal day within the year.
int day_of_year(DayNumber day);

/// Simple week-of-year: ((day_of_year - 1) / 7) + 1, range 1..53.
int week_of_year(DayNumber day);

int quarter_of(unsigned month);

}  // namespace retrainbench
