#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace blockctm::text {

/// Shortest-safe round-trip representation (17 significant digits).
[[nodiscard]] std::string format_exact(double v);
/// Fixed-point with `decimals` digits after the point.
[[nodiscard]] std::string format_fixed(double v, int decimals);

[[nodiscard]] std::vector<std::string> split(std::string_view s, char delim);
/// Splits on '\n', dropping a trailing '\r' from each line and a final
/// empty line.
[[nodiscard]] std::vector<std::string> split_lines(std::string_view s);
[[nodiscard]] std::string trim(std::string_view s);

/// Whole-string numeric parses; FormatError mentioning `where` otherwise.
[[nodiscard]] double parse_double(std::string_view s, std::string_view where);
[[nodiscard]] long long parse_int(std::string_view s, std::string_view where);

}  // namespace blockctm::text
