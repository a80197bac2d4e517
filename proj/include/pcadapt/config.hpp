#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace pcadapt {

// Flat key=value configuration. Unknown keys are rejected so typos fail
// fast; the full key reference ships in configs/reference.conf.
class Config {
 public:
  // All known keys with their default values.
  static Config defaults();

  // Parses `key = value` lines; '#' starts a comment.
  void load_file(const std::filesystem::path& path);
  // Applies PCADAPT_DATASET_ROOT when set.
  void apply_env();
  // Parses one "key=value" override.
  void set_pair(const std::string& pair);
  void set(const std::string& key, const std::string& value);

  const std::string& get(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<std::string> get_list(const std::string& key) const;   // comma separated
  std::vector<std::size_t> get_sizes(const std::string& key) const;  // comma separated counts

  // Stable hash over the sorted key=value pairs, as a hex string.
  std::string fingerprint() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace pcadapt
