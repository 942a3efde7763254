#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace infoflow {

using Date = std::chrono::year_month_day;

// Locale-independent shortest-form decimal with `significant` digits
// (general notation, '.' separator). Non-finite values print as
// "nan", "inf" or "-inf".
std::string format_double(double v, int significant);

std::string format_date(Date d);

// Strict YYYY-MM-DD; returns nullopt on any deviation or invalid day.
std::optional<Date> parse_date(std::string_view s);

// Full-string decimal parse; nullopt on trailing garbage or empty input.
std::optional<double> parse_double(std::string_view s);

std::string_view trim(std::string_view s);

}  // namespace infoflow
