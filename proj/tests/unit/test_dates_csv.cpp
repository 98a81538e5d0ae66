#include <doctest.h>

#include "retrainbench/csv.hpp"
#include "retrainbench/dates.hpp"
#include "retrainbench/errors.hpp"

using namespace retrainbench;

TEST_CASE("civil date round trip") {
    CHECK(days_from_civil(1970, 1, 1) == 0);
    CHECK(days_from_civil(1970, 1, 2) == 1);
    for (DayNumber day : {-1000L, 0L, 17532L, 18628L, 20000L}) {
        const CivilDate c = civil_from_days(day);
        CHECK(days_from_civil(c.year, c.month, c.day) == day);
    }
}

TEST_CASE("date parsing and formatting") {
    CHECK(parse_date("2011-01-29") == days_from_civil(2011, 1, 29));
    CHECK(format_date(parse_date("2016-05-22")) == "2016-05-22");
    CHECK_THROWS_AS(parse_date("2016/05/22"), MalformedRow);
    CHECK_THROWS_AS(parse_date("2016-13-01"), MalformedRow);
    CHECK_THROWS_AS(parse_date("2019-02-29"), MalformedRow);  // not a leap year
    CHECK_THROWS_AS(parse_date("16-05-22"), MalformedRow);
}

TEST_CASE("weekday and calendar fields") {
    // 2019-01-07 was a Monday.
    CHECK(weekday(parse_date("2019-01-07")) == 0);
    CHECK(weekday(parse_date("2019-01-13")) == 6);
    CHECK(day_of_year(parse_date("2019-01-01")) == 1);
    CHECK(week_of_year(parse_date("2019-01-07")) == 1);
    CHECK(week_of_year(parse_date("2019-01-08")) == 2);
    CHECK(quarter_of(4) == 2);
}

TEST_CASE("double round trip through format_double") {
    for (double v : {0.0, 1.0, 0.1, 12345.678901234567, 1e-12, 3.0000000000000004}) {
        double parsed = 0.0;
        REQUIRE(parse_double(format_double(v), parsed));
        CHECK(parsed == v);
    }
    double out;
    CHECK_FALSE(parse_double("1.5x", out));
    CHECK_FALSE(parse_double("", out));
}
