#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace mvc {

// Flat "key = value" text with '#' comments and blank lines; the format used
// by dataset manifests, experiment configs and checkpoint manifests.

std::string trim(const std::string& s);

/// Parse, preserving order. Throws ConfigError on lines without '='.
std::vector<std::pair<std::string, std::string>> parse_keyval_text(const std::string& text,
                                                                   const std::string& context);

std::vector<std::pair<std::string, std::string>> read_keyval_file(
    const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Split on whitespace.
std::vector<std::string> split_ws(const std::string& s);
/// Split on a delimiter, trimming each piece.
std::vector<std::string> split_on(const std::string& s, char delim);

long long parse_int(const std::string& v, const std::string& what);
double parse_double(const std::string& v, const std::string& what);
bool parse_bool(const std::string& v, const std::string& what);

}  // namespace mvc
