#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace polyscale::util {

using Date = std::chrono::year_month_day;

/// Parses "YYYY-MM-DD". Throws ValidationError on anything else.
Date parse_iso_date(std::string_view text);
std::string format_iso_date(const Date& date);

/// Signed number of days from `from` to `to`.
long days_between(const Date& from, const Date& to);

/// Fractional years from `from` to `to` (365.25-day years).
double years_between(const Date& from, const Date& to);

}  // namespace polyscale::util
