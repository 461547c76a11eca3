#include "cellflow/io/csv.hpp"

#include "cellflow/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cellflow::io {

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

Index Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<Index>(i);
    fail(ErrorCode::Format, "table has no column '" + name + "'");
}

std::string format_number(double v) {
    if (!std::isfinite(v)) fail(ErrorCode::Numeric, "refusing to write a non-finite value");
    if (v == 0.0) return "0";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) fail(ErrorCode::Config, "cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Config, "cannot write " + path.string());
    out << text;
    if (!out) fail(ErrorCode::Config, "write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::MissingInput, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_table(const std::filesystem::path& path, const Table& table) {
    if (static_cast<Index>(table.header.size()) != table.values.cols())
        fail(ErrorCode::ShapeMismatch, "write_table: header has " + std::to_string(table.header.size()) +
                                           " names for " + std::to_string(table.values.cols()) + " columns");
    std::string s;
    for (std::size_t j = 0; j < table.header.size(); ++j) {
        if (table.header[j].find_first_of(",\n\"") != std::string::npos)
            fail(ErrorCode::Format, "write_table: column name '" + table.header[j] + "' needs quoting");
        s += (j ? "," : "") + table.header[j];
    }
    s += '\n';
    for (Index i = 0; i < table.values.rows(); ++i) {
        for (Index j = 0; j < table.values.cols(); ++j) {
            if (j) s += ',';
            s += format_number(table.values(i, j));
        }
        s += '\n';
    }
    write_text(path, s);
}

Table read_table(const std::filesystem::path& path) {
    const std::string text = read_text(path);
    std::istringstream in(text);
    std::string line;
    Table t;
    if (!std::getline(in, line)) fail(ErrorCode::Format, path.string() + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    t.header = split(line);
    const std::size_t cols = t.header.size();
    std::vector<double> vals;
    Index rows = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != cols)
            fail(ErrorCode::Format, path.string() + ": row " + std::to_string(rows + 1) + " has " +
                                        std::to_string(cells.size()) + " fields, expected " + std::to_string(cols));
        for (const auto& c : cells) {
            double v = 0.0;
            const auto res = std::from_chars(c.data(), c.data() + c.size(), v);
            if (res.ec != std::errc() || res.ptr != c.data() + c.size())
                fail(ErrorCode::Format, path.string() + ": cannot parse '" + c + "' as a number");
            vals.push_back(v);
        }
        ++rows;
    }
    t.values.resize(rows, static_cast<Index>(cols));
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < static_cast<Index>(cols); ++j)
            t.values(i, j) = vals[static_cast<std::size_t>(i * static_cast<Index>(cols) + j)];
    return t;
}

std::vector<std::string> numbered_header(const std::string& prefix, Index count) {
    std::vector<std::string> h;
    for (Index i = 0; i < count; ++i) h.push_back(prefix + std::to_string(i));
    return h;
}

}  // namespace cellflow::io
