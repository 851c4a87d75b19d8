#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mf/dates.hpp"

using namespace mf;

TEST_CASE("serial arithmetic round-trips") {
    CHECK(Date{1970, 1, 1}.serial() == 0);
    CHECK(Date{1970, 1, 2}.serial() == 1);
    CHECK(Date{1969, 12, 31}.serial() == -1);
    // leap day straddle
    CHECK(Date{2000, 3, 1}.serial() - Date{2000, 2, 28}.serial() == 2);
    CHECK(Date{2100, 3, 1}.serial() - Date{2100, 2, 28}.serial() == 1);  // 2100 not a leap year

    for (long s : {0L, 59L, 60L, 10957L, 11916L, 13000L, 20000L, -400L}) {
        CHECK(Date::from_serial(s).serial() == s);
    }
    CHECK(Date::from_serial(Date{2002, 7, 9}.serial()) == Date{2002, 7, 9});
}

TEST_CASE("parse and format") {
    Date d = parse_date("2002-07-09");
    CHECK(d == Date{2002, 7, 9});
    CHECK(to_string(d) == "2002-07-09");
    CHECK(to_string(Date{2006, 8, 11}) == "2006-08-11");
    CHECK(parse_date(to_string(Date{1999, 12, 31})) == Date{1999, 12, 31});
    CHECK_THROWS(parse_date("not-a-date"));
    CHECK_THROWS(parse_date("2002-13-01"));
}

TEST_CASE("weekday") {
    CHECK(weekday(Date{1970, 1, 1}) == 4);   // Thursday
    CHECK(weekday(Date{2002, 7, 12}) == 5);  // Friday
    CHECK(weekday(Date{2003, 1, 12}) == 0);  // Sunday
    CHECK(weekday(Date{2003, 7, 12}) == 6);  // Saturday
    CHECK(is_weekend(Date{2003, 1, 12}));
    CHECK_FALSE(is_weekend(Date{2002, 7, 12}));
}

TEST_CASE("add_months clamps to month end") {
    CHECK(add_months(Date{2003, 1, 31}, 1) == Date{2003, 2, 28});
    CHECK(add_months(Date{2004, 1, 31}, 1) == Date{2004, 2, 29});
    CHECK(add_months(Date{2002, 7, 12}, 6) == Date{2003, 1, 12});
    CHECK(add_months(Date{2002, 7, 12}, 60) == Date{2007, 7, 12});
    CHECK(add_months(Date{2003, 8, 31}, -6) == Date{2003, 2, 28});
    CHECK(add_months(Date{2002, 11, 30}, 3) == Date{2003, 2, 28});
}

TEST_CASE("modified following") {
    // weekday: untouched
    CHECK(modified_following(Date{2002, 7, 12}) == Date{2002, 7, 12});
    // Sunday mid-month: forward to Monday
    CHECK(modified_following(Date{2003, 1, 12}) == Date{2003, 1, 13});
    // Saturday mid-month: forward to Monday
    CHECK(modified_following(Date{2003, 7, 12}) == Date{2003, 7, 14});
    // Saturday at month end: forward would cross the month, so roll back
    CHECK(modified_following(Date{2006, 9, 30}) == Date{2006, 9, 29});
    CHECK(modified_following(Date{2005, 7, 31}) == Date{2005, 7, 29});  // Sunday 31st -> Friday
}
