// Flow-record CSV ingestion. RFC-4180-style parsing (quoted fields, CRLF
// tolerated), header row required. Cells that are empty, non-numeric, or
// spell an infinity/NaN marker become non-finite entries for clean() to fix.
#pragma once

#include <charconv>
#include <fstream>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "netshap/linalg.hpp"

namespace netshap {

struct RawTable {
    std::vector<std::string> column_names;
    Matrix cells;  // n_rows x n_cols; non-finite entries mark missing cells
    std::optional<std::string> label_column;
    std::vector<std::string> label_text;  // raw text of the label column, when set

    std::size_t n_rows() const { return cells.rows; }
    std::size_t n_cols() const { return cells.cols; }
};

namespace detail {

inline std::string trim_copy(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return s.substr(b, e - b);
}

// One CSV record; quoted fields may contain commas and doubled quotes.
inline std::vector<std::string> split_csv_record(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

// Empty, unparseable, "inf"/"Infinity"/"-inf"/"NaN" (any case) all come back
// non-finite; from_chars handles the textual inf/nan vocabulary itself.
inline double parse_cell(const std::string& raw) {
    const std::string s = trim_copy(raw);
    if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (*first == '+') ++first;  // from_chars rejects a leading '+'
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) return std::numeric_limits<double>::quiet_NaN();
    return value;
}

}  // namespace detail

inline RawTable load_csv(const std::string& path, const std::optional<std::string>& label_column = {}) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_csv: cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("load_csv: '" + path + "' is empty");

    RawTable table;
    for (const auto& name : detail::split_csv_record(line)) table.column_names.push_back(detail::trim_copy(name));
    const std::size_t n_cols = table.column_names.size();

    std::size_t label_idx = n_cols;
    if (label_column) {
        for (std::size_t j = 0; j < n_cols; ++j)
            if (table.column_names[j] == *label_column) label_idx = j;
        if (label_idx == n_cols)
            throw std::runtime_error("load_csv: label column '" + *label_column + "' not found in '" + path + "'");
        table.label_column = *label_column;
    }

    std::vector<double> values;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = detail::split_csv_record(line);
        if (fields.size() != n_cols)
            throw std::runtime_error("load_csv: " + path + ":" + std::to_string(line_no) + ": expected " +
                                     std::to_string(n_cols) + " cells, got " + std::to_string(fields.size()));
        for (std::size_t j = 0; j < n_cols; ++j) values.push_back(detail::parse_cell(fields[j]));
        if (label_idx < n_cols) table.label_text.push_back(detail::trim_copy(fields[label_idx]));
    }

    table.cells.rows = values.size() / std::max<std::size_t>(n_cols, 1);
    table.cells.cols = n_cols;
    table.cells.data = std::move(values);
    return table;
}

}  // namespace netshap
