#ifndef FDB_IO_HPP
#define FDB_IO_HPP

#include "fdb/matrix.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <unistd.h>

namespace fdb::io {

/// Malformed or unreadable input file.
class input_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view line)
{
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return cells;
}

// Full-cell parse; returns false on anything but a complete number.
inline bool parse_number(std::string_view cell, double& out)
{
    if (cell.empty())
        return false;
    if (cell.front() == '+')
        cell.remove_prefix(1);
    const auto* end = cell.data() + cell.size();
    const auto res = std::from_chars(cell.data(), end, out);
    return res.ec == std::errc() && res.ptr == end;
}

inline bool looks_numeric(std::string_view cell)
{
    double v = 0.0;
    if (parse_number(cell, v))
        return true;
    // nan/inf parse as numbers but are rejected later with a location.
    return false;
}

inline std::vector<std::string> read_lines(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw input_error("cannot open '" + path + "'");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line))
        lines.push_back(line);
    return lines;
}

} // namespace detail

/// Comma-separated numeric table, rows = samples. A first row with any
/// non-numeric cell is taken as a header and skipped. Empty lines are ignored.
inline DataMatrix read_csv(const std::string& path)
{
    const auto lines = detail::read_lines(path);
    std::vector<double> values;
    std::size_t cols = 0;
    std::size_t rows = 0;
    bool first = true;
    for (std::size_t li = 0; li < lines.size(); ++li) {
        if (detail::trim(lines[li]).empty())
            continue;
        const auto cells = detail::split(lines[li]);
        if (first) {
            first = false;
            bool header = false;
            for (auto c : cells)
                if (!detail::looks_numeric(c))
                    header = true;
            if (header)
                continue;
        }
        if (cols == 0)
            cols = cells.size();
        if (cells.size() != cols)
            throw input_error(path + ": row " + std::to_string(li + 1) + ": expected " + std::to_string(cols) +
                              " columns, found " + std::to_string(cells.size()));
        for (std::size_t c = 0; c < cells.size(); ++c) {
            double v = 0.0;
            if (!detail::parse_number(cells[c], v))
                throw input_error(path + ": row " + std::to_string(li + 1) + ", column " + std::to_string(c + 1) +
                                  ": not a number: '" + std::string(cells[c]) + "'");
            if (!std::isfinite(v))
                throw input_error(path + ": row " + std::to_string(li + 1) + ", column " + std::to_string(c + 1) +
                                  ": non-finite value");
            values.push_back(v);
        }
        ++rows;
    }
    if (rows == 0)
        throw input_error(path + ": no data rows");
    Matrix m(rows, cols);
    std::copy(values.begin(), values.end(), m.data().begin());
    return DataMatrix(std::move(m));
}

/// One label per line (first column): 1/0 or true/false. Header auto-detected.
inline std::vector<bool> read_labels(const std::string& path)
{
    const auto lines = detail::read_lines(path);
    std::vector<bool> labels;
    bool first = true;
    for (std::size_t li = 0; li < lines.size(); ++li) {
        if (detail::trim(lines[li]).empty())
            continue;
        const auto cell = detail::split(lines[li]).front();
        const bool known = cell == "1" || cell == "0" || cell == "true" || cell == "false";
        if (first) {
            first = false;
            if (!known)
                continue;
        }
        if (!known)
            throw input_error(path + ": row " + std::to_string(li + 1) + ", column 1: label must be 0/1 or true/false");
        labels.push_back(cell == "1" || cell == "true");
    }
    return labels;
}

/// Shortest text that round-trips through strtod (17 significant digits at most).
inline std::string format_double(double v)
{
    char buf[64];
    for (int precision = 15; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v)
            break;
    }
    return buf;
}

/// Writes `contents` to a temporary sibling file, then renames it over `path`.
inline void atomic_write(const std::string& path, const std::string& contents)
{
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw input_error("cannot write '" + tmp.string() + "'");
        out << contents;
        out.flush();
        if (!out)
            throw input_error("failed writing '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw input_error("cannot rename onto '" + path + "': " + ec.message());
    }
}

} // namespace fdb::io

#endif
