#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "mvldp/path.hpp"

namespace mvldp {

/// Shortest representation that round-trips exactly.
std::string format_double(double v);
/// Strict full-string parse; `where` prefixes the error message.
double parse_double(std::string_view text, const std::string& where);
std::vector<std::string> split_csv_line(std::string_view line);

/// Header `t,coord_0,...`.
void write_path_csv(std::ostream& os, const Path& path);
/// Header `replica,t,coord_0,...`.
void write_paths_csv(std::ostream& os, const std::vector<Path>& paths);

/// Writes `text` to `file`, creating parent directories.
void write_text_file(const std::filesystem::path& file, const std::string& text);

/// Library version, including git-describe output when built from a checkout.
std::string_view version_string();

}  // namespace mvldp
