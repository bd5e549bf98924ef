#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tdsym {

/// Shortest decimal form that reads back to the same double.
std::string format_number(double v);
std::string format_vector(std::span<const double> v, char sep = ',');

double parse_number(std::string_view s);
std::int64_t parse_integer(std::string_view s);
std::vector<double> parse_vector(std::string_view s, char sep = ',');

/// Whitespace-separated fields.
std::vector<std::string_view> split_fields(std::string_view line);

}  // namespace tdsym
