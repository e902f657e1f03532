#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace alwb::text {

/// Split UTF-8 into code points; invalid bytes become single-byte units.
std::vector<std::string> code_points(std::string_view s);

/// ASCII lower-casing; non-ASCII bytes pass through unchanged.
std::string to_lower(std::string_view s);

bool is_ascii_punct(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);

/// Split on runs of ASCII whitespace, dropping empty pieces.
std::vector<std::string> split_ws(std::string_view s);

std::string_view trim(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

/// Fixed-point rendering with the given number of decimals.
std::string format_fixed(double v, int decimals);

/// Parse a double; throws std::invalid_argument on trailing garbage.
double parse_double(std::string_view s);

long long parse_int(std::string_view s);

}  // namespace alwb::text
