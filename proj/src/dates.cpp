#include "mf/dates.hpp"

#include <cstdio>
#include <stdexcept>

namespace mf {

namespace {

bool is_leap(int y) {
    return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

int days_in_month(int y, int m) {
    static const int lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    return m == 2 && is_leap(y) ? 29 : lengths[m - 1];
}

}  // namespace

long Date::serial() const {
    // Howard Hinnant's days_from_civil.
    int yy = y - (m <= 2);
    long era = (yy >= 0 ? yy : yy - 399) / 400;
    unsigned yoe = static_cast<unsigned>(yy - era * 400);
    unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long>(doe) - 719468;
}

Date Date::from_serial(long s) {
    long z = s + 719468;
    long era = (z >= 0 ? z : z - 146096) / 146097;
    unsigned doe = static_cast<unsigned>(z - era * 146097);
    unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    long yy = static_cast<long>(yoe) + era * 400;
    unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    unsigned mp = (5 * doy + 2) / 153;
    unsigned dd = doy - (153 * mp + 2) / 5 + 1;
    unsigned mm = mp + (mp < 10 ? 3 : -9);
    return Date{static_cast<int>(yy + (mm <= 2)), static_cast<int>(mm), static_cast<int>(dd)};
}

Date parse_date(const std::string& s) {
    int y, m, d;
    if (std::sscanf(s.c_str(), "%d-%d-%d", &y, &m, &d) != 3 || m < 1 || m > 12 || d < 1 ||
        d > days_in_month(y, m)) {
        throw std::invalid_argument("bad date: " + s);
    }
    return Date{y, m, d};
}

std::string to_string(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", d.y, d.m, d.d);
    return buf;
}

int weekday(const Date& d) {
    long s = d.serial();
    return static_cast<int>(((s % 7) + 11) % 7);  // 1970-01-01 was a Thursday
}

bool is_weekend(const Date& d) {
    int w = weekday(d);
    return w == 0 || w == 6;
}

Date add_months(const Date& d, int months) {
    int total = d.y * 12 + (d.m - 1) + months;
    int y = total / 12, m = total % 12;
    if (m < 0) {
        m += 12;
        --y;
    }
    ++m;
    int day = d.d > days_in_month(y, m) ? days_in_month(y, m) : d.d;
    return Date{y, m, day};
}

Date modified_following(const Date& d) {
    Date r = d;
    while (is_weekend(r)) {
        r = Date::from_serial(r.serial() + 1);
    }
    if (r.m != d.m) {
        r = d;
        while (is_weekend(r)) {
            r = Date::from_serial(r.serial() - 1);
        }
    }
    return r;
}

}  // namespace mf
