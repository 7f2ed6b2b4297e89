#include <clay/config.hpp>
#include <clay/io.hpp>

#include <fstream>
#include <sstream>

namespace clay {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    throw InvalidInputError("config key '" + key + "': not a number: " + value);
  }
  if (used != value.size())
    throw InvalidInputError("config key '" + key + "': trailing characters: " + value);
  return out;
}

}  // namespace

KeyValueConfig KeyValueConfig::from_stream(std::istream& in, const std::string& origin) {
  KeyValueConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw InvalidInputError(origin + ":" + std::to_string(line_no) +
                              ": expected 'key = value', got: " + text);
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty())
      throw InvalidInputError(origin + ":" + std::to_string(line_no) + ": empty key");
    cfg.set(key, value);
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open config " + path.string());
  return from_stream(in, path.string());
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  entries_[key] = value;
}

bool KeyValueConfig::has(const std::string& key) const { return entries_.count(key) > 0; }

void KeyValueConfig::require_known(const std::set<std::string>& known) const {
  for (const auto& [key, value] : entries_) {
    if (!known.count(key))
      throw InvalidInputError("unknown config key '" + key + "'");
  }
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : parse_double(key, it->second);
}

Index KeyValueConfig::get_index(const std::string& key, Index fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  try {
    std::size_t used = 0;
    const long long value = std::stoll(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing");
    return static_cast<Index>(value);
  } catch (const std::exception&) {
    throw InvalidInputError("config key '" + key + "': not an integer: " + it->second);
  }
}

std::uint64_t KeyValueConfig::get_uint64(const std::string& key, std::uint64_t fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  try {
    // stoull wraps negative inputs instead of rejecting them.
    if (!it->second.empty() && it->second.front() == '-')
      throw std::invalid_argument("negative");
    std::size_t used = 0;
    const unsigned long long value = std::stoull(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing");
    return value;
  } catch (const std::exception&) {
    throw InvalidInputError("config key '" + key +
                            "': not an unsigned integer: " + it->second);
  }
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw InvalidInputError("config key '" + key + "': not a boolean: " + it->second);
}

Aabb KeyValueConfig::get_bounds(const std::string& key, const Aabb& fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::istringstream ls(it->second);
  Aabb box;
  if (!(ls >> box.min.x() >> box.min.y() >> box.min.z() >> box.max.x() >> box.max.y() >>
        box.max.z()))
    throw InvalidInputError("config key '" + key + "': expected six numbers: " + it->second);
  std::string rest;
  if (ls >> rest)
    throw InvalidInputError("config key '" + key + "': trailing characters: " + it->second);
  if (!box.valid())
    throw InvalidInputError("config key '" + key + "': min must be below max per axis");
  return box;
}

std::string format_bounds(const Aabb& bounds) {
  std::string out;
  for (int k = 0; k < 3; ++k) out += format_coord(bounds.min(k)) + " ";
  for (int k = 0; k < 3; ++k) out += format_coord(bounds.max(k)) + (k < 2 ? " " : "");
  return out;
}

void write_resolved_config(const std::filesystem::path& path,
                           const std::map<std::string, std::string>& resolved) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& [key, value] : resolved) {
    out << key << " = " << value << '\n';
  }
  if (!out) throw std::runtime_error("short write to " + path.string());
}

}  // namespace clay
