#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace powertherm::csv {

// Shortest representation that parses back to the identical double
// (std::to_chars round-trip guarantee). Non-finite values are rejected.
std::string format_double(double v);

std::string format_int(long long v);

// Strict full-string parsers. Throw std::invalid_argument with a short
// message; file loaders add path/line/field context.
double parse_double(std::string_view text);
long long parse_int(std::string_view text);

// Plain comma split, no quoting. Fields that may contain commas are not
// part of any schema in this toolkit.
std::vector<std::string> split(std::string_view line);

std::string join(const std::vector<std::string>& fields);

} // namespace powertherm::csv
