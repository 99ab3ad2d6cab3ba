#include "planemvs/config.h"

#include <fstream>
#include <sstream>

#include "planemvs/errors.h"

namespace planemvs {

namespace {
std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}
}  // namespace

std::vector<KeyValue> parse_key_values(const std::string& text, const std::string& origin) {
  std::vector<KeyValue> out;
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(origin, n, "expected 'key = value'");
    KeyValue kv{trim(line.substr(0, eq)), trim(line.substr(eq + 1)), n};
    if (kv.key.empty()) throw ParseError(origin, n, "empty key");
    out.push_back(std::move(kv));
  }
  return out;
}

std::vector<KeyValue> read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_key_values(ss.str(), path.string());
}

std::vector<double> to_doubles(const KeyValue& kv, const std::string& origin, int expected) {
  std::istringstream ss(kv.value);
  std::vector<double> v;
  std::string tok;
  while (ss >> tok) {
    try {
      size_t used = 0;
      v.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ParseError(origin, kv.line, kv.key + ": bad number '" + tok + "'");
    }
  }
  if (expected >= 0 && static_cast<int>(v.size()) != expected) {
    throw ParseError(origin, kv.line, kv.key + ": expected " + std::to_string(expected) + " numbers");
  }
  return v;
}

double to_double(const KeyValue& kv, const std::string& origin) { return to_doubles(kv, origin, 1)[0]; }

long long to_int(const KeyValue& kv, const std::string& origin) {
  try {
    size_t used = 0;
    const long long v = std::stoll(kv.value, &used);
    if (used != kv.value.size()) throw std::invalid_argument(kv.value);
    return v;
  } catch (const std::exception&) {
    throw ParseError(origin, kv.line, kv.key + ": expected an integer");
  }
}

bool to_bool(const KeyValue& kv, const std::string& origin) {
  if (kv.value == "1" || kv.value == "true" || kv.value == "on") return true;
  if (kv.value == "0" || kv.value == "false" || kv.value == "off") return false;
  throw ParseError(origin, kv.line, kv.key + ": expected a boolean");
}

}  // namespace planemvs
