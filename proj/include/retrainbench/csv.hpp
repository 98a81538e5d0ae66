#pragma once

#include <string>
#include <vector>

namespace retrainbench {

/// Minimal comma-separated reader for the panel file formats. Fields may not
/// contain commas or quotes; lines are split verbatim. CRLF endings are
/// tolerated, quoting is not.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    // 1-based line number of each data row in the source file, for error reporting.
    std::vector<std::size_t> line_numbers;
};

CsvTable read_csv(const std::string& path);

std::vector<std::string> split_csv_line(const std::string& line);

/// Shortest round-trip representation of a double ("nan"/"inf" spelled out).
std::string format_double(double value);

/// Strict double parse of a whole field; returns false on trailing garbage.
bool parse_double(const std::string& text, double& out);

}  // namespace retrainbench
