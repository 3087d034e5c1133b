#include "fnpde/csv.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace fnpde {

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("csv: cannot open " + path);
    row(header);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out_ << ',';
        out_ << fields[i];
    }
    out_ << '\n';
}

std::string CsvWriter::num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string CsvWriter::num(long v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%ld", v);
    return buf;
}

std::vector<std::vector<double>> read_grid_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("csv: cannot open " + path);
    std::vector<std::vector<double>> grid;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        grid.push_back(std::move(row));
    }
    return grid;
}

void write_grid_csv(const std::string& path, const std::vector<std::vector<double>>& grid) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("csv: cannot open " + path);
    for (const auto& row : grid) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << CsvWriter::num(row[i]);
        }
        out << '\n';
    }
}

}  // namespace fnpde
