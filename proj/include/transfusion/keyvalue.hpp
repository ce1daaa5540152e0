#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace tfusion {

/// Plain-text `key = value` configuration. Blank lines and `#` comments are
/// ignored; a repeated key is an error.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(std::istream& in);
KeyValues load_key_values(const std::string& path);
void write_key_values(std::ostream& out, const KeyValues& kv);

/// Typed lookups. Missing keys leave `out` untouched; malformed values throw
/// std::invalid_argument naming the key.
void read_value(const KeyValues& kv, const std::string& key, int& out);
void read_value(const KeyValues& kv, const std::string& key, long long& out);
void read_value(const KeyValues& kv, const std::string& key, std::uint64_t& out);
void read_value(const KeyValues& kv, const std::string& key, double& out);
void read_value(const KeyValues& kv, const std::string& key, std::string& out);
/// Comma-separated list.
void read_value(const KeyValues& kv, const std::string& key, std::vector<int>& out);
void read_value(const KeyValues& kv, const std::string& key, std::vector<double>& out);
void read_value(const KeyValues& kv, const std::string& key, std::vector<std::string>& out);

/// Throws if `kv` has a key outside `known`.
void reject_unknown_keys(const KeyValues& kv, const std::vector<std::string>& known, const std::string& where);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace tfusion
