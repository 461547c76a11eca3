#pragma once

#include "cellflow/numerics/types.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace cellflow::io {

/// Numeric table: header row plus rows of doubles. No index column.
struct Table {
    std::vector<std::string> header;
    Matrix values;

    /// Column position by name; throws Format when missing.
    Index column(const std::string& name) const;
};

/// Shortest decimal that round-trips (std::to_chars), so rewriting a parsed
/// file reproduces it byte for byte.
std::string format_number(double v);

void write_table(const std::filesystem::path& path, const Table& table);
/// MissingInput if the file is absent, Format on malformed content.
Table read_table(const std::filesystem::path& path);

/// Header names prefix0, prefix1, ...
std::vector<std::string> numbered_header(const std::string& prefix, Index count);

/// Writes text exactly as given, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace cellflow::io
