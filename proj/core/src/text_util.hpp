#pragma once

// Small string helpers shared by the file parsers. Internal to the library.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace perspectra::detail {

std::string_view trim(std::string_view s);
std::vector<std::string> split_ws(std::string_view s);
/// Splits on `sep`, trimming each field; empty fields are dropped.
std::vector<std::string> split_trimmed(std::string_view s, char sep);
std::string to_lower_ascii(std::string_view s);
bool contains_ci(std::string_view haystack, std::string_view lower_needle);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace perspectra::detail
