#ifndef FNPDE_CSV_HPP
#define FNPDE_CSV_HPP

#include <fstream>
#include <string>
#include <vector>

namespace fnpde {

// RFC-4180 style CSV with '.' decimal separator and LF line endings. Files
// are opened in binary mode so the byte stream is identical across runs.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);

    void row(const std::vector<std::string>& fields);

    static std::string num(double v);
    static std::string num(long v);

private:
    std::ofstream out_;
};

// Reads a rectangular numeric grid (rows of comma-separated values).
std::vector<std::vector<double>> read_grid_csv(const std::string& path);

// Writes a rectangular numeric grid with one CSV row per grid row.
void write_grid_csv(const std::string& path, const std::vector<std::vector<double>>& grid);

}  // namespace fnpde

#endif
