#include "osub/io/csv.hpp"

#include "osub/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <system_error>

#include <unistd.h>

namespace osub::io {

std::size_t CsvTable::column(std::string_view name) const {
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j] == name) return j;
    }
    throw ValidationError("CSV has no column named '" + std::string(name) + "'");
}

CsvTable parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    std::size_t line = 1;

    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
        record.clear();
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                if (field_started) {
                    throw ValidationError("stray quote inside unquoted CSV field on line " +
                                          std::to_string(line));
                }
                quoted = true;
                field_started = true;
                break;
            case ',': end_field(); break;
            case '\r':
                if (i + 1 < text.size() && text[i + 1] == '\n') break;
                end_record();
                ++line;
                break;
            case '\n':
                end_record();
                ++line;
                break;
            default:
                field.push_back(c);
                field_started = true;
        }
    }
    if (quoted) throw ValidationError("unterminated quoted CSV field");
    if (field_started || !field.empty() || !record.empty()) end_record();

    if (records.empty()) throw ValidationError("CSV input has no header");
    CsvTable table;
    table.header = std::move(records.front());
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != table.header.size()) {
            throw ValidationError("CSV record " + std::to_string(r + 1) + " has " +
                                  std::to_string(records[r].size()) + " fields, header has " +
                                  std::to_string(table.header.size()));
        }
        table.rows.push_back(std::move(records[r]));
    }
    return table;
}

CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_file(path)); }

std::string csv_field(std::string_view value) {
    if (value.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(value);
    std::string out = "\"";
    for (char c : value) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string csv_line(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t j = 0; j < fields.size(); ++j) {
        if (j) out.push_back(',');
        out += csv_field(fields[j]);
    }
    out.push_back('\n');
    return out;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, std::string_view where) {
    std::string_view t = text;
    while (!t.empty() && (t.front() == ' ' || t.front() == '\t')) t.remove_prefix(1);
    while (!t.empty() && (t.back() == ' ' || t.back() == '\t')) t.remove_suffix(1);
    if (t == "nan" || t == "NaN") return std::numeric_limits<double>::quiet_NaN();
    if (t == "inf") return std::numeric_limits<double>::infinity();
    if (t == "-inf") return -std::numeric_limits<double>::infinity();
    if (!t.empty() && t.front() == '+') t.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
        throw ValidationError("non-numeric value '" + std::string(text) + "' at " +
                              std::string(where));
    }
    return v;
}

long long parse_integer(std::string_view text, std::string_view where) {
    std::string_view t = text;
    while (!t.empty() && t.front() == ' ') t.remove_prefix(1);
    while (!t.empty() && t.back() == ' ') t.remove_suffix(1);
    long long v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
        throw ValidationError("expected an integer but found '" + std::string(text) + "' at " +
                              std::string(where));
    }
    return v;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write '" + tmp.string() + "'");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) {
            std::filesystem::remove(tmp);
            throw Error("failed writing '" + tmp.string() + "'");
        }
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace osub::io
