#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace osub::io {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Index of a header column; throws ValidationError when absent.
    std::size_t column(std::string_view name) const;
};

// RFC-4180 style: comma separated, double-quoted fields may contain commas,
// newlines and doubled quotes. The first record is the header; every record
// must have the header's field count.
CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

std::string csv_field(std::string_view value);
std::string csv_line(const std::vector<std::string>& fields);

// Shortest representation that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view text, std::string_view where);
long long parse_integer(std::string_view text, std::string_view where);

std::string read_file(const std::filesystem::path& path);
// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace osub::io
