#include "riskshape/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace riskshape {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    cells.push_back(cur);
    return cells;
}

std::string trimmed(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

double parse_cell(const std::string& raw, std::size_t row, const std::string& column) {
    const std::string cell = trimmed(raw);
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (first != last && *first == '+') ++first;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || cell.empty() || !std::isfinite(value))
        throw CsvError("row " + std::to_string(row) + ", column '" + column +
                       "': cannot parse '" + cell + "' as a finite number");
    return value;
}

}  // namespace

Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CsvError("cannot open dataset file: " + path);
    std::string line;
    if (!std::getline(in, line) || trimmed(line).empty())
        throw CsvError("empty dataset file: " + path);

    const std::vector<std::string> header = split_line(line);
    if (header.size() < 2)
        throw CsvError("header must name a label column and at least one asset: " + path);
    std::vector<std::string> labels(header.begin() + 1, header.end());

    Vec data;
    std::vector<std::string> row_labels;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trimmed(line).empty()) continue;
        const std::vector<std::string> cells = split_line(line);
        if (cells.size() != header.size())
            throw CsvError("row " + std::to_string(lineno) + ": expected " +
                           std::to_string(header.size()) + " cells, found " +
                           std::to_string(cells.size()));
        row_labels.push_back(trimmed(cells[0]));
        for (std::size_t j = 1; j < cells.size(); ++j)
            data.push_back(parse_cell(cells[j], lineno, labels[j - 1]));
    }
    if (row_labels.empty()) throw CsvError("dataset has no data rows: " + path);

    Dataset ds;
    ds.scenarios = ScenarioMatrix(row_labels.size(), labels.size(), std::move(data), labels);
    ds.row_labels = std::move(row_labels);
    ds.path = path;
    return ds;
}

void save_csv(const Dataset& ds, const std::string& path) {
    std::ostringstream out;
    out << "label";
    for (const auto& name : ds.scenarios.asset_labels) out << ',' << name;
    out << '\n';
    char buf[40];
    for (std::size_t i = 0; i < ds.scenarios.m; ++i) {
        out << (i < ds.row_labels.size() ? ds.row_labels[i] : std::to_string(i + 1));
        for (std::size_t j = 0; j < ds.scenarios.n; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", ds.scenarios.at(i, j));
            out << ',' << buf;
        }
        out << '\n';
    }
    std::ofstream file(path);
    if (!file) throw CsvError("cannot write dataset file: " + path);
    file << out.str();
}

}  // namespace riskshape
