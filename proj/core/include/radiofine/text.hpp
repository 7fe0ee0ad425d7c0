#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace radiofine {

std::string_view trim(std::string_view s);
std::vector<std::string_view> split_csv_line(std::string_view line);
std::vector<std::string_view> split_whitespace(std::string_view line);

std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

// Shortest representation that reads back to the same double.
std::string format_double(double v);
// Fixed number of decimals, used for display columns.
std::string format_fixed(double v, int decimals);

// Half away from zero, the rounding used for every integer age and summary.
double round_half_away(double v);

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 14695981039346656037ull);

// A `#`-headed CSV document: `# key=value` comment lines, one column header
// row, then data rows.
struct CsvDocument {
    std::vector<std::pair<std::string, std::string>> meta;  // in file order
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> row_lines;  // 1-based source line of each row

    std::optional<std::string> meta_value(std::string_view key) const;
    // Throws DataError when the column is missing.
    std::size_t column(std::string_view name) const;
    std::optional<std::size_t> find_column(std::string_view name) const;
};

// Blank lines and `#` lines without `=` are skipped.
CsvDocument read_csv(std::istream& in);

}  // namespace radiofine
