#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace specdec {

std::string trim(std::string_view s);

/// Splits on commas. Quoting is not supported; labels must not contain commas.
std::vector<std::string> split_csv_line(std::string_view line);

/// Whole-field parse; throws std::invalid_argument naming `what` on junk.
std::int64_t parse_int(std::string_view text, std::string_view what);
double parse_double(std::string_view text, std::string_view what);

/// Parses "32,64,128" into integers.
std::vector<std::int64_t> parse_int_list(std::string_view text, std::string_view what);

/// Fixed six-significant-digit rendering used for CSV output.
std::string format_double(double v);

}  // namespace specdec
