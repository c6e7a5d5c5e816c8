#include "checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "errors.hpp"

namespace wavedm {

namespace {

static_assert(sizeof(float) == 4);

void check_token(const std::string& s, const char* what) {
  require(!s.empty() && s.find_first_of(" \t\r\n") == std::string::npos, Errc::invalid_argument,
          std::string("checkpoint ") + what + " '" + s + "' must be a non-empty token without whitespace");
}

std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    v = ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
  }
  return v;
}

std::string shape_string(const std::vector<int>& shape) {
  std::string s;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(shape[i]);
  }
  return s;
}

[[noreturn]] void corrupt(const std::string& why) { fail(Errc::format, "corrupt checkpoint: " + why); }

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void Checkpoint::set(const std::string& key, const std::string& value) {
  check_token(key, "key");
  check_token(value, "value");
  for (auto& [k, v] : meta) {
    if (k == key) {
      v = value;
      return;
    }
  }
  meta.emplace_back(key, value);
}

void Checkpoint::set(const std::string& key, long long value) { set(key, std::to_string(value)); }
void Checkpoint::set(const std::string& key, double value) { set(key, format_double(value)); }

bool Checkpoint::has(const std::string& key) const {
  for (const auto& kv : meta) {
    if (kv.first == key) return true;
  }
  return false;
}

const std::string& Checkpoint::get(const std::string& key) const {
  for (const auto& kv : meta) {
    if (kv.first == key) return kv.second;
  }
  fail(Errc::format, "checkpoint has no '" + key + "' entry");
}

long long Checkpoint::get_int(const std::string& key) const {
  const std::string& s = get(key);
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size()) fail(Errc::format, "checkpoint entry '" + key + "' is not an integer: " + s);
  return v;
}

double Checkpoint::get_double(const std::string& key) const {
  const std::string& s = get(key);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) fail(Errc::format, "checkpoint entry '" + key + "' is not a number: " + s);
  return v;
}

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  check_token(ckpt.kind, "kind");
  require(ckpt.params.size() == ckpt.layout.total, Errc::shape_mismatch, "checkpoint parameter count mismatch");
  std::ostringstream head;
  head << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  head << "kind " << ckpt.kind << '\n';
  for (const auto& [k, v] : ckpt.meta) head << "meta " << k << ' ' << v << '\n';
  for (const auto& e : ckpt.layout.entries) {
    head << "param " << e.name << ' ' << shape_string(e.shape) << ' ' << e.offset << ' ' << e.count << '\n';
  }
  head << "blob " << ckpt.params.size() * 4 << '\n';
  std::string out = head.str();
  const std::size_t start = out.size();
  out.resize(start + ckpt.params.size() * 4);
  for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
    const std::uint32_t bits = to_le(std::bit_cast<std::uint32_t>(ckpt.params[i]));
    std::memcpy(out.data() + start + i * 4, &bits, 4);
  }
  return out;
}

Checkpoint parse_checkpoint(const std::string& bytes) {
  std::size_t pos = 0;
  auto next_line = [&]() -> std::string {
    const std::size_t nl = bytes.find('\n', pos);
    if (nl == std::string::npos) corrupt("truncated header");
    std::string line = bytes.substr(pos, nl - pos);
    pos = nl + 1;
    return line;
  };

  {
    std::istringstream first(next_line());
    std::string magic;
    std::string version;
    first >> magic >> version;
    if (magic != kCheckpointMagic) fail(Errc::format, "not a wavedm checkpoint (bad magic)");
    if (version != std::to_string(kCheckpointVersion)) {
      fail(Errc::format, "checkpoint version '" + version + "' is not supported (expected " +
                             std::to_string(kCheckpointVersion) + ")");
    }
  }

  Checkpoint ckpt;
  std::size_t blob_bytes = 0;
  bool have_blob = false;
  while (!have_blob) {
    std::istringstream line(next_line());
    std::string tag;
    line >> tag;
    if (tag == "kind") {
      line >> ckpt.kind;
    } else if (tag == "meta") {
      std::string k;
      std::string v;
      if (!(line >> k >> v)) corrupt("bad meta line");
      ckpt.meta.emplace_back(k, v);
    } else if (tag == "param") {
      nn::ParamEntry e;
      std::string shape;
      if (!(line >> e.name >> shape >> e.offset >> e.count)) corrupt("bad param line");
      std::size_t prod = 1;
      std::istringstream dims(shape);
      std::string d;
      while (std::getline(dims, d, ',')) {
        int dim = 0;
        try {
          dim = std::stoi(d);
        } catch (const std::exception&) {
          corrupt("bad shape for " + e.name);
        }
        if (dim <= 0) corrupt("bad shape for " + e.name);
        e.shape.push_back(dim);
        prod *= static_cast<std::size_t>(dim);
      }
      if (prod != e.count || e.offset != ckpt.layout.total) corrupt("manifest entry " + e.name + " is inconsistent");
      ckpt.layout.entries.push_back(e);
      ckpt.layout.total += e.count;
    } else if (tag == "blob") {
      if (!(line >> blob_bytes)) corrupt("bad blob line");
      have_blob = true;
    } else {
      corrupt("unknown header tag '" + tag + "'");
    }
  }
  if (ckpt.kind.empty()) corrupt("missing kind");
  if (blob_bytes != ckpt.layout.total * 4) corrupt("blob size does not match manifest");
  if (bytes.size() - pos != blob_bytes) corrupt("blob length " + std::to_string(bytes.size() - pos) +
                                                " does not match declared " + std::to_string(blob_bytes));
  ckpt.params.resize(ckpt.layout.total);
  for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
    std::uint32_t bits = 0;
    std::memcpy(&bits, bytes.data() + pos + i * 4, 4);
    ckpt.params[i] = std::bit_cast<float>(to_le(bits));
  }
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  const std::string bytes = serialize_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::io, "cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(Errc::io, "failed writing checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  if (!std::filesystem::exists(path)) fail(Errc::not_found, "checkpoint '" + path + "' does not exist");
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io, "cannot open checkpoint '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_checkpoint(ss.str());
}

std::uint64_t fingerprint(std::span<const float> params) {
  std::uint64_t h = 1469598103934665603ull;
  for (float f : params) {
    const std::uint32_t bits = std::bit_cast<std::uint32_t>(f);
    for (int b = 0; b < 4; ++b) {
      h ^= (bits >> (8 * b)) & 0xffu;
      h *= 1099511628211ull;
    }
  }
  return h;
}

std::string fingerprint_hex(std::span<const float> params) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fingerprint(params)));
  return buf;
}

}  // namespace wavedm
