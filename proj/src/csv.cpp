#include "impactosc/csv.hpp"

#include <charconv>
#include <cmath>

#include "impactosc/error.hpp"

namespace impactosc::io {

std::string format_double(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

std::string quote(const std::string& s)
{
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<std::string> header)
    : out_(path, std::ios::binary), columns_(header.size())
{
    if (!out_) throw Error("cannot open " + path.string() + " for writing");
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << quote(header[i]);
    out_ << '\n';
}

void CsvWriter::row(const std::vector<Cell>& cells)
{
    if (cells.size() != columns_) throw Error("csv row has the wrong number of cells");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ',';
        if (const auto* d = std::get_if<double>(&cells[i])) out_ << format_double(*d);
        else if (const auto* n = std::get_if<std::int64_t>(&cells[i])) out_ << *n;
        else out_ << quote(std::get<std::string>(cells[i]));
    }
    out_ << '\n';
    ++rows_;
}

void CsvWriter::close()
{
    out_.close();
    if (out_.fail()) throw Error("write error while closing csv file");
}

}  // namespace impactosc::io
