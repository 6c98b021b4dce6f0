#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace therminv {

/// Locale-independent double formatting (shortest round-trip form).
std::string format_double(double x);

/// Locale-independent double parsing; throws IngestError on garbage.
double parse_double(const std::string& s, const std::string& context);

/// Streams tidy CSV rows with an LF line ending and '.' decimal separator.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
    void row(const std::vector<std::string>& cells);
    void close();

private:
    std::ofstream out_;
    std::size_t n_cols_;
    std::string path_;
};

/// Fully parsed CSV file: header plus string cells per row.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a required column; throws IngestError when absent.
    std::size_t column(const std::string& name, const std::string& file) const;
};

CsvTable read_csv(const std::filesystem::path& path);

}  // namespace therminv
