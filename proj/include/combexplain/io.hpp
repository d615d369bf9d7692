#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace combexplain {

// Reads a whole file into lines, stripping a trailing '\r'. Throws IoError.
std::vector<std::string> read_lines(const std::filesystem::path& path);

// Writes via a sibling temp file and renames over the target, so readers
// either see the old file or the complete new one.
void write_file_atomic(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer);

// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

// Strict parse of a full token as a double; false on trailing garbage.
bool parse_double(std::string_view token, double& out);

}  // namespace combexplain
