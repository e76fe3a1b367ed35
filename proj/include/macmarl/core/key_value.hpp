#pragma once

#include <istream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace macmarl {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Plain-text `key = value` file: one pair per line, `#` starts a comment,
/// blank lines ignored, duplicate keys rejected. Order is preserved.
using KeyValues = std::vector<std::pair<std::string, std::string>>;

KeyValues parse_key_values(std::istream& in);
KeyValues read_key_value_file(const std::string& path);

// Typed value parsing; all throw ConfigError naming the key on failure.
int parse_int(const std::string& key, const std::string& value);
std::uint64_t parse_u64(const std::string& key, const std::string& value);
double parse_double(const std::string& key, const std::string& value);
bool parse_bool(const std::string& key, const std::string& value);
std::vector<int> parse_int_list(const std::string& key, const std::string& value);
std::vector<std::uint64_t> parse_u64_list(const std::string& key, const std::string& value);

}  // namespace macmarl
