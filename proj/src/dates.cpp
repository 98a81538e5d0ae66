#include "retrainbench/dates.hpp"

#include <array>
#include <cstdio>

#include "retrainbench/errors.hpp"

namespace retrainbench {

// Howard Hinnant's civil-from-days / days-from-civil algorithms.
DayNumber days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);            // [0, 399]
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;  // [0, 365]
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;           // [0, 146096]
    return static_cast<DayNumber>(era) * 146097 + static_cast<DayNumber>(doe) - 719468;
}

CivilDate civil_from_days(DayNumber z) {
    z += 719468;
    const DayNumber era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);                 // [0, 146096]
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;   // [0, 399]
    const int y = static_cast<int>(yoe) + static_cast<int>(era) * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);                 // [0, 365]
    const unsigned mp = (5 * doy + 2) / 153;                                      // [0, 11]
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;                              // [1, 31]
    const unsigned m = mp + (mp < 10 ? 3 : -9);                                   // [1, 12]
    return CivilDate{y + (m <= 2), m, d};
}

DayNumber parse_date(const std::string& text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        throw MalformedRow("invalid date '" + text + "', expected YYYY-MM-DD");
    }
    for (int i : {0, 1, 2, 3, 5, 6, 8, 9}) {
        if (text[i] < '0' || text[i] > '9') {
            throw MalformedRow("invalid date '" + text + "', expected YYYY-MM-DD");
        }
    }
    const int y = (text[0] - '0') * 1000 + (text[1] - '0') * 100 + (text[2] - '0') * 10 + (text[3] - '0');
    const unsigned m = static_cast<unsigned>((text[5] - '0') * 10 + (text[6] - '0'));
    const unsigned d = static_cast<unsigned>((text[8] - '0') * 10 + (text[9] - '0'));
    if (m < 1 || m > 12 || d < 1 || d > 31) {
        throw MalformedRow("invalid date '" + text + "': month/day out of range");
    }
    const DayNumber day = days_from_civil(y, m, d);
    const CivilDate roundtrip = civil_from_days(day);
    if (roundtrip.year != y || roundtrip.month != m || roundtrip.day != d) {
        throw MalformedRow("invalid date '" + text + "': no such calendar day");
    }
    return day;
}

std::string format_date(DayNumber day) {
    const CivilDate c = civil_from_days(day);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", c.year, c.month, c.day);
    return std::string(buf);
}

int weekday(DayNumber day) {
    // 1970-01-01 was a Thursday (index 3 with Monday = 0).
    DayNumber w = (day + 3) % 7;
    if (w < 0) w += 7;
    return static_cast<int>(w);
}

int day_of_year(DayNumber day) {
    const CivilDate c = civil_from_days(day);
    return static_cast<int>(day - days_from_civil(c.year, 1, 1)) + 1;
}

int week_of_year(DayNumber day) {
    return (day_of_year(day) - 1) / 7 + 1;
}

int quarter_of(unsigned month) {
    return static_cast<int>((month - 1) / 3 + 1);
}

}  // namespace retrainbench
