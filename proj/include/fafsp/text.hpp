#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace fafsp {

/// Shortest decimal text that parses back to exactly `v`.
std::string format_number(double v);
/// Fixed-point with `digits` decimals.
std::string format_fixed(double v, int digits);

double parse_number(std::string_view text);

std::vector<std::string_view> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

} // namespace fafsp
