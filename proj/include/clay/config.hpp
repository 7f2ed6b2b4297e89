#pragma once

#include <clay/types.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>

namespace clay {

/// Flat `key = value` run configuration. Lines starting with '#' and blank
/// lines are skipped. Values keep internal spaces (trimmed at the ends), so
/// composite values like box bounds are single keys. Unknown keys are
/// rejected at validation time, not parse time, so one parser serves every
/// subcommand's key set.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig from_stream(std::istream& in, const std::string& origin = "<stream>");
  static KeyValueConfig from_file(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  /// Throws InvalidInputError when a stored key is not in `known`.
  void require_known(const std::set<std::string>& known) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  Index get_index(const std::string& key, Index fallback) const;
  std::uint64_t get_uint64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  /// Six numbers "min_x min_y min_z max_x max_y max_z".
  Aabb get_bounds(const std::string& key, const Aabb& fallback) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

std::string format_bounds(const Aabb& bounds);

/// The `resolved_config` echo: sorted `key = value` lines capturing every
/// effective setting of a run, defaults included.
void write_resolved_config(const std::filesystem::path& path,
                           const std::map<std::string, std::string>& resolved);

}  // namespace clay
