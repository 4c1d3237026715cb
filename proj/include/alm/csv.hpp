#pragma once

#include <cstddef>
#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace alm {

/// Text table with a header row. Cells are kept as strings.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column position by name; throws IoError when missing.
    std::size_t column(const std::string& name) const;
    double number(std::size_t row, std::size_t col) const;
    std::vector<double> numbers(const std::string& name) const;
};

/// Reads a comma-separated file; every row must match the header width.
CsvTable read_csv(const std::string& path);

/// Formats a double with 17 significant digits (round-trips exactly).
std::string format_number(double value);

/// Streams rows to a file, numbers printed with 17 significant digits.
class CsvWriter {
public:
    CsvWriter(const std::string& path, std::vector<std::string> header);

    void row(std::span<const double> values);
    void row(const std::vector<std::string>& cells);
    /// Flushes and checks the stream; throws IoError on failure.
    void close();

private:
    std::string path_;
    std::size_t width_;
    std::ofstream out_;
};

}  // namespace alm
