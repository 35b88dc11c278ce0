#pragma once

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "segan/errors.hpp"

namespace segan {

// Raw CSV contents: header plus rows of optional cells (nullopt = missing).
struct RawTable {
    std::vector<std::string> column_names;
    std::vector<std::vector<std::optional<std::string>>> rows;

    std::size_t row_count() const { return rows.size(); }
    std::size_t column_count() const { return column_names.size(); }
};

inline bool is_missing_token(const std::string& cell) {
    return cell.empty() || cell == "NA" || cell == "NaN";
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    out.push_back(field);
    return out;
}

inline RawTable load_raw_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    RawTable table;
    std::string line;
    if (!std::getline(in, line)) throw ParseError("'" + path + "' is empty (expected a header row)");
    table.column_names = split_csv_line(line);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() && in.eof()) break;
        auto cells = split_csv_line(line);
        if (cells.size() != table.column_names.size()) {
            throw ParseError("'" + path + "' line " + std::to_string(line_no) + ": expected " +
                             std::to_string(table.column_names.size()) + " fields, got " + std::to_string(cells.size()));
        }
        std::vector<std::optional<std::string>> row;
        row.reserve(cells.size());
        for (auto& cell : cells) {
            if (is_missing_token(cell)) {
                row.push_back(std::nullopt);
            } else {
                row.push_back(std::move(cell));
            }
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

inline std::optional<double> parse_number(const std::string& s) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    while (first != last && (*first == ' ' || *first == '\t')) ++first;
    while (last != first && (*(last - 1) == ' ' || *(last - 1) == '\t')) --last;
    double value = 0.0;
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc() || res.ptr != last || first == last) return std::nullopt;
    return value;
}

// Shortest representation that parses back to the identical double.
inline std::string format_number(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string escape_csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

inline void save_raw_csv(const RawTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    for (std::size_t c = 0; c < table.column_names.size(); ++c) {
        if (c) out << ',';
        out << escape_csv_field(table.column_names[c]);
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << ',';
            if (row[c]) out << escape_csv_field(*row[c]);
        }
        out << '\n';
    }
}

}  // namespace segan
