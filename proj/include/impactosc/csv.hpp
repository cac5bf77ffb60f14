#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace impactosc::io {

/// Shortest decimal string that reads back to the same double.
std::string format_double(double v);

using Cell = std::variant<double, std::int64_t, std::string>;

/// Comma-separated file with a header row. Strings containing a comma,
/// quote or newline are quoted.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, std::vector<std::string> header);

    void row(const std::vector<Cell>& cells);
    void close();
    std::size_t rows() const { return rows_; }

private:
    std::ofstream out_;
    std::size_t columns_;
    std::size_t rows_ = 0;
};

}  // namespace impactosc::io
