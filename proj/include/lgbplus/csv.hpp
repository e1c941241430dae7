#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "dataset.hpp"
#include "errors.hpp"
#include "matrix.hpp"

namespace lgbplus {

// ============================================================================
// CSV ingestion and emission
//
// Strict numeric CSV with a header row; no quoting. Numbers are written in
// shortest round-trip form so repeated runs emit identical bytes.
// ============================================================================

inline std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && (s[a] == ' ' || s[a] == '\t' || s[a] == '\r')) ++a;
    while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
    return s.substr(a, b - a);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    fields.push_back(trim(cur));
    return fields;
}

inline double parse_cell(const std::string& cell, int row, int col) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last)
        throw DataError("non-numeric cell '" + cell + "' at data row " +
                        std::to_string(row) + ", column " + std::to_string(col));
    return v;
}

} // namespace detail

struct CsvTable {
    std::vector<std::string> header;
    Matrix values;
};

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open CSV file '" + path + "'");

    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw DataError("CSV file '" + path + "' is empty");
    table.header = detail::split_csv_line(line);
    if (table.header.empty() || table.header.front().empty())
        throw DataError("CSV file '" + path + "' has a malformed header");

    std::vector<double> buf;
    int rows = 0;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != table.header.size())
            throw DataError("CSV row " + std::to_string(rows + 1) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(table.header.size()));
        for (std::size_t c = 0; c < fields.size(); ++c)
            buf.push_back(detail::parse_cell(fields[c], rows + 1, static_cast<int>(c)));
        ++rows;
    }
    table.values.rows = rows;
    table.values.cols = static_cast<int>(table.header.size());
    table.values.data = std::move(buf);
    return table;
}

inline int find_column(const std::vector<std::string>& header,
                       const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

// Builds a Dataset: `target` names the target column; any `drop` columns are
// excluded from the feature set (e.g. a benchmark forecast column).
inline Dataset dataset_from_table(const CsvTable& table, const std::string& target,
                                  const std::vector<std::string>& drop = {}) {
    const int target_col = find_column(table.header, target);
    if (target_col < 0)
        throw DataError("target column '" + target + "' not found in CSV header");

    std::vector<char> skip(table.header.size(), 0);
    skip[static_cast<std::size_t>(target_col)] = 1;
    for (const auto& name : drop) {
        const int c = find_column(table.header, name);
        if (c < 0) throw DataError("column '" + name + "' not found in CSV header");
        skip[static_cast<std::size_t>(c)] = 1;
    }

    Dataset d;
    std::vector<int> feature_cols;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        if (!skip[c]) {
            feature_cols.push_back(static_cast<int>(c));
            d.column_names.push_back(table.header[c]);
        }
    }
    if (feature_cols.empty()) throw DataError("no feature columns left in CSV");

    d.x = Matrix(table.values.rows, static_cast<int>(feature_cols.size()));
    d.y.resize(static_cast<std::size_t>(table.values.rows));
    for (int r = 0; r < table.values.rows; ++r) {
        for (std::size_t c = 0; c < feature_cols.size(); ++c)
            d.x(r, static_cast<int>(c)) =
                table.values(r, feature_cols[c]);
        d.y[static_cast<std::size_t>(r)] = table.values(r, target_col);
    }
    validate_dataset(d);
    return d;
}

inline Dataset load_dataset_csv(const std::string& path, const std::string& target,
                                const std::vector<std::string>& drop = {}) {
    return dataset_from_table(read_csv(path), target, drop);
}

// Group file: one group per line, "group_id,column_name[,column_name...]".
inline FeatureGroups read_group_file(const std::string& path,
                                     const std::vector<std::string>& column_names) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open group file '" + path + "'");
    FeatureGroups g;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() < 2)
            throw DataError("group file line " + std::to_string(line_no) +
                            " needs a group id and at least one column");
        std::vector<int> cols;
        for (std::size_t i = 1; i < fields.size(); ++i) {
            const int c = find_column(column_names, fields[i]);
            if (c < 0)
                throw DataError("group file references unknown column '" +
                                fields[i] + "'");
            cols.push_back(c);
        }
        g.groups.emplace_back(fields[0], std::move(cols));
    }
    if (g.groups.empty()) throw DataError("group file '" + path + "' is empty");
    return g;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    out << content;
}

} // namespace lgbplus
