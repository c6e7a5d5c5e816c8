#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace wavedm::cli {

// Bad flags, unknown keys, unparsable values. Maps to exit code 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat key=value run description. Every key has a default; files and
// overrides may only set known keys.
class RunConfig {
 public:
  static RunConfig defaults();

  // Lines are `key = value`; '#' starts a comment.
  void load_file(const std::string& path);
  // Accepts "key=value".
  void set(const std::string& assignment);
  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::string& str(const std::string& key) const;
  int integer(const std::string& key) const;
  double real(const std::string& key) const;
  std::uint64_t u64(const std::string& key) const;
  std::vector<int> int_list(const std::string& key) const;

  std::string render() const;
  // Writes render() to <dir>/run_config.txt, creating the directory.
  void write_to(const std::string& dir) const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace wavedm::cli
