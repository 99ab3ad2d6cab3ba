#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace planemvs {

struct KeyValue {
  std::string key;
  std::string value;
  int line = 0;
};

// "key = value" lines; '#' starts a comment. Keys may repeat.
std::vector<KeyValue> read_key_values(const std::filesystem::path& path);
std::vector<KeyValue> parse_key_values(const std::string& text, const std::string& origin);

double to_double(const KeyValue& kv, const std::string& origin);
long long to_int(const KeyValue& kv, const std::string& origin);
bool to_bool(const KeyValue& kv, const std::string& origin);
// Whitespace-separated numbers; throws ParseError if the count differs from `expected`
// (expected < 0 accepts any count).
std::vector<double> to_doubles(const KeyValue& kv, const std::string& origin, int expected = -1);

}  // namespace planemvs
