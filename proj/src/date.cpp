#include "chaincast/date.hpp"

#include <charconv>
#include <cstdio>

#include "chaincast/errors.hpp"

namespace chaincast {

namespace {

// Howard Hinnant's civil calendar algorithms.
std::int32_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2) / 5 +
                         static_cast<unsigned>(d) - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int32_t>(doe) - 719468;
}

void civil_from_days(std::int32_t z, int& y, int& m, int& d) {
    z += 719468;
    const int era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int yr = static_cast<int>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = yr + (m <= 2);
}

bool parse_int(std::string_view s, int& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

Date::Date(int year, int month, int day) : serial_(days_from_civil(year, month, day)) {}

Date Date::parse(std::string_view text) {
    int y = 0, m = 0, d = 0;
    bool ok = text.size() == 10 && text[4] == '-' && text[7] == '-' &&
              parse_int(text.substr(0, 4), y) && parse_int(text.substr(5, 2), m) &&
              parse_int(text.substr(8, 2), d);
    ok = ok && m >= 1 && m <= 12 && d >= 1 && d <= 31;
    if (ok) {
        // Round-trip to reject impossible days like 2017-02-30.
        Date candidate(y, m, d);
        int yy, mm, dd;
        civil_from_days(candidate.serial_, yy, mm, dd);
        if (yy == y && mm == m && dd == d) return candidate;
    }
    throw IngestError("invalid date '" + std::string(text) + "' (expected YYYY-MM-DD)");
}

std::string Date::to_string() const {
    int y, m, d;
    civil_from_days(serial_, y, m, d);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
    return buf;
}

int Date::year() const {
    int y, m, d;
    civil_from_days(serial_, y, m, d);
    return y;
}

int Date::month() const {
    int y, m, d;
    civil_from_days(serial_, y, m, d);
    return m;
}

}  // namespace chaincast
