#pragma once

#include "unipairs/core.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace unipairs {

struct CsvError : std::runtime_error {
    explicit CsvError(const std::string& what) : std::runtime_error(what) {}
};

struct CsvTable {
    std::vector<std::string> header;
    Matrix values;  // rows x columns

    Eigen::Index column_index(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<Eigen::Index>(i);
        throw CsvError("column not found: " + name);
    }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace detail

/// Strict numeric CSV: UTF-8, header row, '.' decimal. Ragged rows and
/// non-numeric cells raise CsvError naming the offending row/column.
inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CsvError("cannot open file: " + path);

    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw CsvError(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    table.header = detail::split_csv_line(line);
    const std::size_t ncol = table.header.size();
    if (ncol == 0) throw CsvError(path + ": empty header row");

    std::vector<std::vector<double>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = detail::split_csv_line(line);
        if (cells.size() != ncol)
            throw CsvError(path + ": row " + std::to_string(lineno) + " has " +
                           std::to_string(cells.size()) + " cells, expected " +
                           std::to_string(ncol));
        std::vector<double> vals(ncol);
        for (std::size_t c = 0; c < ncol; ++c) {
            const std::string& s = cells[c];
            double v = 0.0;
            const auto* first = s.data();
            const auto* last = s.data() + s.size();
            auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec != std::errc{} || ptr != last)
                throw CsvError(path + ": row " + std::to_string(lineno) + ", column '" +
                               table.header[c] + "': non-numeric cell '" + s + "'");
            if (!std::isfinite(v))
                throw CsvError(path + ": row " + std::to_string(lineno) + ", column '" +
                               table.header[c] + "': non-finite value");
            vals[c] = v;
        }
        rows.push_back(std::move(vals));
    }
    if (rows.empty()) throw CsvError(path + ": no data rows");

    table.values.resize(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(ncol));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < ncol; ++c)
            table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                rows[r][c];
    return table;
}

/// Split a table into (X, y) by target column name; extra excluded columns
/// (e.g. survival time/status) are removed from X as well.
inline Dataset dataset_from_table(const CsvTable& table, const std::string& target,
                                  const std::vector<std::string>& exclude = {}) {
    const Eigen::Index yc = table.column_index(target);
    std::vector<Eigen::Index> keep;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        const auto ci = static_cast<Eigen::Index>(c);
        if (ci == yc) continue;
        bool skip = false;
        for (const auto& e : exclude)
            if (table.header[c] == e) skip = true;
        if (!skip) keep.push_back(ci);
    }
    Dataset d;
    d.y = table.values.col(yc);
    d.X.resize(table.values.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c) {
        d.X.col(static_cast<Eigen::Index>(c)) = table.values.col(keep[c]);
        d.feature_names.push_back(table.header[static_cast<std::size_t>(keep[c])]);
    }
    return d;
}

}  // namespace unipairs
