#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nn/tensor.hpp"

namespace wavedm {

inline constexpr const char* kCheckpointMagic = "WAVEDM-CHECKPOINT";
inline constexpr int kCheckpointVersion = 1;

// Text header (magic + version, kind, ordered key/value metadata, parameter
// manifest) followed by a little-endian float32 blob. See docs/checkpoint.md.
struct Checkpoint {
  std::string kind;
  std::vector<std::pair<std::string, std::string>> meta;
  nn::ParamLayout layout;
  std::vector<float> params;

  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, long long value);
  void set(const std::string& key, double value);
  bool has(const std::string& key) const;
  const std::string& get(const std::string& key) const;
  long long get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(const std::string& bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// FNV-1a over the parameter blob.
std::uint64_t fingerprint(std::span<const float> params);
std::string fingerprint_hex(std::span<const float> params);

std::string format_double(double v);

}  // namespace wavedm
