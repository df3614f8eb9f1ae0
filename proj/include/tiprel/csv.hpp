#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace tiprel::csv {

/// Shortest representation that parses back to the same double; "" for NaN.
std::string format(double v);

std::vector<std::string_view> split(std::string_view line, char sep = ',');
std::string_view trim(std::string_view s);

/// Strict parsers: the whole field must be consumed. Throw ParseError
/// mentioning `line`.
double parse_double(std::string_view field, std::size_t line);
std::int64_t parse_int(std::string_view field, std::size_t line);

/// Reads a line and strips a trailing '\r'. Returns false at end of input.
bool getline(std::istream& in, std::string& line);

}  // namespace tiprel::csv
