#include "transfusion/keyvalue.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tfusion {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

const std::string* lookup(const KeyValues& kv, const std::string& key) {
  const auto it = kv.find(key);
  return it == kv.end() ? nullptr : &it->second;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw std::invalid_argument("config: bad value for '" + key + "': " + text);
  return value;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

}  // namespace

KeyValues parse_key_values(std::istream& in) {
  KeyValues kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
    if (!kv.emplace(key, trim(line.substr(eq + 1))).second) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
  }
  return kv;
}

KeyValues load_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path);
  return parse_key_values(in);
}

void write_key_values(std::ostream& out, const KeyValues& kv) {
  for (const auto& [k, v] : kv) out << k << " = " << v << '\n';
}

void read_value(const KeyValues& kv, const std::string& key, int& out) {
  if (const auto* v = lookup(kv, key)) out = parse_number<int>(key, *v);
}
void read_value(const KeyValues& kv, const std::string& key, long long& out) {
  if (const auto* v = lookup(kv, key)) out = parse_number<long long>(key, *v);
}
void read_value(const KeyValues& kv, const std::string& key, std::uint64_t& out) {
  if (const auto* v = lookup(kv, key)) out = parse_number<std::uint64_t>(key, *v);
}
void read_value(const KeyValues& kv, const std::string& key, double& out) {
  if (const auto* v = lookup(kv, key)) out = parse_number<double>(key, *v);
}
void read_value(const KeyValues& kv, const std::string& key, std::string& out) {
  if (const auto* v = lookup(kv, key)) out = *v;
}
void read_value(const KeyValues& kv, const std::string& key, std::vector<int>& out) {
  if (const auto* v = lookup(kv, key)) {
    out.clear();
    for (const auto& item : split_list(*v)) out.push_back(parse_number<int>(key, item));
  }
}
void read_value(const KeyValues& kv, const std::string& key, std::vector<double>& out) {
  if (const auto* v = lookup(kv, key)) {
    out.clear();
    for (const auto& item : split_list(*v)) out.push_back(parse_number<double>(key, item));
  }
}
void read_value(const KeyValues& kv, const std::string& key, std::vector<std::string>& out) {
  if (const auto* v = lookup(kv, key)) out = split_list(*v);
}

void reject_unknown_keys(const KeyValues& kv, const std::vector<std::string>& known, const std::string& where) {
  for (const auto& [k, v] : kv) {
    if (std::find(known.begin(), known.end(), k) == known.end()) {
      throw std::invalid_argument(where + ": unknown key '" + k + "'");
    }
  }
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

}  // namespace tfusion
