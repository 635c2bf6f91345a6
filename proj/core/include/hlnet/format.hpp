#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

namespace hlnet {

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);
// Fixed notation with the given number of decimals, "-0.000000" folded to "0.000000".
std::string format_fixed(double v, int decimals);

// Whole-string parses; throw ConfigError naming the offending text.
int parse_int(std::string_view s);
std::uint64_t parse_uint64(std::string_view s);
double parse_double(std::string_view s);
bool parse_bool(std::string_view s);

std::string_view trim(std::string_view s);

// `key=value` lines; blank lines and lines starting with '#' are skipped.
// Malformed lines and repeated keys throw ParseError.
std::map<std::string, std::string> parse_key_values(std::string_view text);
std::string format_key_values(const std::map<std::string, std::string>& kv);

}  // namespace hlnet
