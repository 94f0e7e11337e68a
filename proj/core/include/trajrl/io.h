#ifndef TRAJRL_IO_H_
#define TRAJRL_IO_H_

#include <filesystem>
#include <string>
#include <string_view>

namespace trajrl {

// Writes to a temporary file in the same directory, then renames it over
// the target so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

// Shortest text that parses back to the same double.
std::string format_double(double value);
// Throws FormatError on trailing garbage or an empty field.
double parse_double(std::string_view text);

}  // namespace trajrl

#endif  // TRAJRL_IO_H_
