#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace agn {

/// Shortest decimal text that parses back to the same double; NaN is
/// written as an empty field.
std::string format_number(double v);

/// RFC-4180 CSV writer. An optional comment line ("# ...") precedes the
/// header row.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header,
              std::string_view comment = {});

    CsvWriter& field(std::string_view text);
    CsvWriter& field(double value);
    CsvWriter& field(long long value);
    CsvWriter& field(std::size_t value) { return field(static_cast<long long>(value)); }
    CsvWriter& field(int value) { return field(static_cast<long long>(value)); }
    void end_row();
    void close();

private:
    std::filesystem::path path_;
    std::ofstream out_;
    std::size_t columns_;
    std::size_t in_row_ = 0;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;  // source line of each row

    std::size_t column(std::string_view name) const;  // throws ParseError if absent
};

/// Reads an RFC-4180 file, skipping leading "#" comment lines. Errors name
/// the file and line.
CsvTable read_csv(const std::filesystem::path& path);

/// Parses a numeric cell, throwing ParseError that names the file and row.
double parse_number(const CsvTable& table, std::size_t row, std::size_t column, const std::string& source);

}  // namespace agn
