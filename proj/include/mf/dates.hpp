#pragma once

#include <string>

namespace mf {

// Calendar date with serial-day arithmetic (proleptic Gregorian).
struct Date {
    int y = 1970;
    int m = 1;
    int d = 1;

    // Days since 1970-01-01.
    long serial() const;
    static Date from_serial(long s);

    auto operator<=>(const Date&) const = default;
};

// Parses "YYYY-MM-DD".
Date parse_date(const std::string& s);
std::string to_string(const Date& d);

// 0 = Sunday ... 6 = Saturday.
int weekday(const Date& d);
bool is_weekend(const Date& d);

// Calendar-month step with end-of-month clamping (2003-01-31 + 1m -> 2003-02-28).
Date add_months(const Date& d, int months);

// Rolls weekend dates forward, unless that crosses a month end, in which
// case backward ("Modified Following" on a weekend-only calendar).
Date modified_following(const Date& d);

}  // namespace mf
