#include "hlnet/format.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <system_error>

#include "hlnet/errors.hpp"

namespace hlnet {

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) throw NumericError("cannot format value");
  return std::string(buf.data(), end);
}

std::string format_fixed(double v, int decimals) {
  std::array<char, 512> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed, decimals);
  if (ec != std::errc{}) throw NumericError("cannot format value");
  std::string out(buf.data(), end);
  if (out.front() == '-' && out.find_first_not_of("-0.") == std::string::npos) out.erase(0, 1);
  return out;
}

namespace {

template <typename T>
T parse_number(std::string_view s, const char* what) {
  s = trim(s);
  T value{};
  const char* first = s.data();
  if (!s.empty() && s.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), value);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ConfigError(std::string("expected ") + what + ", got '" + std::string(s) + "'");
  }
  return value;
}

}  // namespace

int parse_int(std::string_view s) { return parse_number<int>(s, "an integer"); }

std::uint64_t parse_uint64(std::string_view s) { return parse_number<std::uint64_t>(s, "a non-negative integer"); }

double parse_double(std::string_view s) {
  const double v = parse_number<double>(s, "a number");
  if (!std::isfinite(v)) throw ConfigError("expected a finite number, got '" + std::string(trim(s)) + "'");
  return v;
}

bool parse_bool(std::string_view s) {
  s = trim(s);
  if (s == "1" || s == "true" || s == "on" || s == "yes") return true;
  if (s == "0" || s == "false" || s == "off" || s == "no") return false;
  throw ConfigError("expected a boolean, got '" + std::string(s) + "'");
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::map<std::string, std::string> parse_key_values(std::string_view text) {
  std::map<std::string, std::string> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key=value, got '" + std::string(line) + "'", line_no);
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw ParseError("empty key", line_no);
    if (!out.emplace(key, std::string(trim(line.substr(eq + 1)))).second) {
      throw ParseError("repeated key '" + key + "'", line_no);
    }
  }
  return out;
}

std::string format_key_values(const std::map<std::string, std::string>& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

}  // namespace hlnet
