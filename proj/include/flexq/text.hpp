#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace flexq {

bool iequals(std::string_view lhs, std::string_view rhs);
std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

// Shortest decimal that parses back to the same double.
std::string format_double(double v);
// Whole-string parse; nullopt on any trailing garbage or empty input.
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

}  // namespace flexq
