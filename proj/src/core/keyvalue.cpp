#include "fieldreg/keyvalue.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fieldreg/error.hpp"

namespace fieldreg {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

KeyValueFile parse_key_value_text(const std::string& text, const std::string& source_name) {
  KeyValueFile kv;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kParse, source_name + ":" + std::to_string(line_no) + ": expected key=value");
    }
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty()) {
      throw Error(ErrorCode::kParse, source_name + ":" + std::to_string(line_no) + ": empty key");
    }
    kv.ordered.emplace_back(key, value);
    kv.values[key] = value;
  }
  return kv;
}

KeyValueFile read_key_value_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_key_value_text(buffer.str(), path.string());
}

double parse_double(const std::string& text, const std::string& context) {
  const std::string t = trim(text);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE) {
    throw Error(ErrorCode::kParse, context + ": '" + text + "' is not a number");
  }
  return v;
}

long long parse_int(const std::string& text, const std::string& context) {
  const std::string t = trim(text);
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE) {
    throw Error(ErrorCode::kParse, context + ": '" + text + "' is not an integer");
  }
  return v;
}

bool parse_bool(const std::string& text, const std::string& context) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw Error(ErrorCode::kParse, context + ": '" + text + "' is not a boolean");
}

std::string format_double(double v) {
  // Shortest text that parses back to the same double.
  char buf[40];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

}  // namespace fieldreg
