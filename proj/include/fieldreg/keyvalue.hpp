#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace fieldreg {

/// Flat `key=value` text. Blank lines and lines starting with '#' are
/// skipped; whitespace around keys and values is trimmed.
struct KeyValueFile {
  std::map<std::string, std::string> values;
  std::vector<std::pair<std::string, std::string>> ordered;
};

KeyValueFile parse_key_value_text(const std::string& text, const std::string& source_name);
KeyValueFile read_key_value_file(const std::filesystem::path& path);

std::string trim(const std::string& s);
std::vector<std::string> split(const std::string& s, char sep);

double parse_double(const std::string& text, const std::string& context);
long long parse_int(const std::string& text, const std::string& context);
bool parse_bool(const std::string& text, const std::string& context);

/// Shortest round-trip representation ("%.17g").
std::string format_double(double v);

}  // namespace fieldreg
