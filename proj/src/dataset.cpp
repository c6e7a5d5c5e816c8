#include "dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "checkpoint.hpp"
#include "errors.hpp"
#include "image.hpp"

namespace wavedm {

namespace fs = std::filesystem;

namespace {

constexpr const char* kManifestHeader = "# wavedm manifest v1";

int reflect(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

double smoothstep(double e0, double e1, double x) {
  const double t = std::clamp((x - e0) / (e1 - e0), 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::string kind_name(DegradationKind k) {
  switch (k) {
    case DegradationKind::gaussian_noise: return "gaussian_noise";
    case DegradationKind::box_blur: return "box_blur";
    case DegradationKind::occlusion_drops: return "occlusion_drops";
  }
  return "?";
}

}  // namespace

void DegradationSpec::validate() const {
  switch (kind) {
    case DegradationKind::gaussian_noise:
      require(sigma >= 0.0 && sigma <= 1.0, Errc::invalid_argument, "noise sigma must be in [0, 1]");
      break;
    case DegradationKind::box_blur:
      require(radius >= 0 && radius <= 16, Errc::invalid_argument, "blur radius must be in [0, 16]");
      break;
    case DegradationKind::occlusion_drops:
      require(drops >= 0 && drops <= 256, Errc::invalid_argument, "drop count must be in [0, 256]");
      require(drop_radius > 0.0 && drop_radius <= 64.0, Errc::invalid_argument, "drop radius must be in (0, 64]");
      require(opacity >= 0.0 && opacity <= 1.0, Errc::invalid_argument, "drop opacity must be in [0, 1]");
      break;
  }
}

std::string DegradationSpec::describe() const {
  std::string s = kind_name(kind) + ":";
  switch (kind) {
    case DegradationKind::gaussian_noise: s += "sigma=" + format_double(sigma); break;
    case DegradationKind::box_blur: s += "radius=" + std::to_string(radius); break;
    case DegradationKind::occlusion_drops:
      s += "drops=" + std::to_string(drops) + ",drop_radius=" + format_double(drop_radius) +
           ",opacity=" + format_double(opacity);
      break;
  }
  return s + ",seed=" + std::to_string(seed);
}

DegradationSpec parse_degradation(const std::string& text) {
  DegradationSpec spec;
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  if (kind == "gaussian_noise") {
    spec.kind = DegradationKind::gaussian_noise;
  } else if (kind == "box_blur") {
    spec.kind = DegradationKind::box_blur;
  } else if (kind == "occlusion_drops") {
    spec.kind = DegradationKind::occlusion_drops;
  } else {
    fail(Errc::invalid_argument, "unknown degradation '" + kind + "'");
  }
  if (colon != std::string::npos) {
    std::istringstream rest(text.substr(colon + 1));
    std::string item;
    while (std::getline(rest, item, ',')) {
      const auto eq = item.find('=');
      require(eq != std::string::npos, Errc::invalid_argument, "degradation parameter '" + item + "' lacks '='");
      const std::string key = item.substr(0, eq);
      const std::string value = item.substr(eq + 1);
      try {
        if (key == "sigma") {
          spec.sigma = std::stod(value);
        } else if (key == "sigma255") {
          spec.sigma = std::stod(value) / 255.0;
        } else if (key == "radius") {
          spec.radius = std::stoi(value);
        } else if (key == "drops") {
          spec.drops = std::stoi(value);
        } else if (key == "drop_radius") {
          spec.drop_radius = std::stod(value);
        } else if (key == "opacity") {
          spec.opacity = std::stod(value);
        } else if (key == "seed") {
          spec.seed = std::stoull(value);
        } else {
          fail(Errc::invalid_argument, "unknown degradation parameter '" + key + "'");
        }
      } catch (const std::logic_error&) {
        fail(Errc::invalid_argument, "bad value for degradation parameter '" + key + "': " + value);
      }
    }
  }
  spec.validate();
  return spec;
}

ImageGrid degrade(const ImageGrid& clean, const DegradationSpec& spec, Rng& rng) {
  spec.validate();
  ImageGrid out = clean;
  switch (spec.kind) {
    case DegradationKind::gaussian_noise: {
      if (spec.sigma == 0.0) break;
      std::normal_distribution<double> normal(0.0, 1.0);
      const double sigma = spec.sigma * (clean.hi - clean.lo);
      for (double& v : out.data) v += sigma * normal(rng);
      break;
    }
    case DegradationKind::box_blur: {
      const int r = spec.radius;
      const double norm = 1.0 / ((2 * r + 1) * (2 * r + 1));
      for (int c = 0; c < clean.channels; ++c) {
        for (int y = 0; y < clean.height; ++y) {
          for (int x = 0; x < clean.width; ++x) {
            double acc = 0.0;
            for (int dy = -r; dy <= r; ++dy) {
              for (int dx = -r; dx <= r; ++dx) {
                acc += clean.at(c, reflect(y + dy, clean.height), reflect(x + dx, clean.width));
              }
            }
            out.at(c, y, x) = acc * norm;
          }
        }
      }
      break;
    }
    case DegradationKind::occlusion_drops: {
      std::uniform_real_distribution<double> uy(0.0, clean.height);
      std::uniform_real_distribution<double> ux(0.0, clean.width);
      std::uniform_real_distribution<double> ur(0.5 * spec.drop_radius, spec.drop_radius);
      std::uniform_real_distribution<double> tint(0.75, 1.0);
      for (int d = 0; d < spec.drops; ++d) {
        const double cy = uy(rng);
        const double cx = ux(rng);
        const double r = ur(rng);
        const double level = clean.lo + tint(rng) * (clean.hi - clean.lo);
        for (int y = 0; y < clean.height; ++y) {
          for (int x = 0; x < clean.width; ++x) {
            const double dist2 = ((y + 0.5 - cy) * (y + 0.5 - cy) + (x + 0.5 - cx) * (x + 0.5 - cx)) / (r * r);
            if (dist2 >= 1.0) continue;
            const double a = spec.opacity * (1.0 - dist2);
            for (int c = 0; c < clean.channels; ++c) out.at(c, y, x) = (1.0 - a) * out.at(c, y, x) + a * level;
          }
        }
      }
      break;
    }
  }
  return clamp(out);
}

ImageGrid procedural_texture(int size, Rng& rng) {
  require(size >= 4, Errc::invalid_argument, "texture size must be >= 4");
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_real_distribution<double> colour(0.2, 0.8);
  auto rand_colour = [&] { return std::array<double, 3>{colour(rng), colour(rng), colour(rng)}; };

  ImageGrid img(size, size, 3, 0.0, 1.0);
  const auto c0 = rand_colour();
  const auto c1 = rand_colour();
  const double angle = u01(rng) * 2.0 * std::numbers::pi;
  const double dx = std::cos(angle);
  const double dy = std::sin(angle);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double s = std::clamp(0.5 + ((x + 0.5) / size - 0.5) * dx + ((y + 0.5) / size - 0.5) * dy, 0.0, 1.0);
      for (int c = 0; c < 3; ++c) img.at(c, y, x) = (1.0 - s) * c0[c] + s * c1[c];
    }
  }

  std::uniform_int_distribution<int> shape_count(2, 4);
  const int shapes = shape_count(rng);
  for (int k = 0; k < shapes; ++k) {
    const auto col = rand_colour();
    const double cy = u01(rng) * size;
    const double cx = u01(rng) * size;
    const double r = (0.12 + 0.25 * u01(rng)) * size;
    const bool disc = u01(rng) < 0.5;
    const double soft = 0.6 + 1.2 * u01(rng);
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        const double py = y + 0.5 - cy;
        const double px = x + 0.5 - cx;
        const double dist = disc ? std::sqrt(py * py + px * px) : std::max(std::abs(py), std::abs(px));
        const double a = 1.0 - smoothstep(r - soft, r + soft, dist);
        for (int c = 0; c < 3; ++c) img.at(c, y, x) = (1.0 - a) * img.at(c, y, x) + a * col[c];
      }
    }
  }

  const double amp = 0.03 + 0.04 * u01(rng);
  const double fy = (1.0 + 3.0 * u01(rng)) * 2.0 * std::numbers::pi / size;
  const double fx = (1.0 + 3.0 * u01(rng)) * 2.0 * std::numbers::pi / size;
  const double phase = u01(rng) * 2.0 * std::numbers::pi;
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double v = amp * std::sin(fy * y + fx * x + phase);
      for (int c = 0; c < 3; ++c) img.at(c, y, x) = std::clamp(img.at(c, y, x) + v, 0.0, 1.0);
    }
  }
  return img;
}

void generate_procedural_corpus(const std::string& dir, int count, int size, std::uint64_t seed) {
  require(count >= 1, Errc::invalid_argument, "corpus size must be >= 1");
  fs::create_directories(dir);
  for (int i = 0; i < count; ++i) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
    char name[32];
    std::snprintf(name, sizeof name, "tex%04d.png", i);
    save_png(procedural_texture(size, rng), (fs::path(dir) / name).string());
  }
}

std::string synthesize_pairs(const std::string& clean_dir, const DegradationSpec& spec, const std::string& out_dir,
                             int holdout) {
  spec.validate();
  if (!fs::is_directory(clean_dir)) fail(Errc::not_found, "clean image directory '" + clean_dir + "' does not exist");
  std::vector<fs::path> inputs;
  for (const auto& e : fs::directory_iterator(clean_dir)) {
    if (e.is_regular_file() && e.path().extension() == ".png") inputs.push_back(e.path());
  }
  std::sort(inputs.begin(), inputs.end());
  require(!inputs.empty(), Errc::not_found, "no PNG images found in '" + clean_dir + "'");
  require(holdout >= 0 && holdout <= static_cast<int>(inputs.size()), Errc::invalid_argument,
          "holdout count exceeds the number of images");

  fs::create_directories(fs::path(out_dir) / "clean");
  fs::create_directories(fs::path(out_dir) / "degraded");
  const std::string manifest_path = (fs::path(out_dir) / "manifest.csv").string();
  std::ofstream manifest(manifest_path, std::ios::trunc);
  if (!manifest) fail(Errc::io, "cannot write manifest '" + manifest_path + "'");
  manifest << kManifestHeader << '\n';
  manifest << "# degradation " << spec.describe() << '\n';
  manifest << "id,split,clean,degraded\n";
  const int train_count = static_cast<int>(inputs.size()) - holdout;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const std::string id = inputs[i].stem().string();
    const ImageGrid clean = load_png(inputs[i].string());
    Rng rng(mix_seed(spec.seed, i));
    const ImageGrid bad = degrade(clean, spec, rng);
    const std::string clean_rel = "clean/" + id + ".png";
    const std::string bad_rel = "degraded/" + id + ".png";
    save_png(clean, (fs::path(out_dir) / clean_rel).string());
    save_png(bad, (fs::path(out_dir) / bad_rel).string());
    manifest << id << ',' << (static_cast<int>(i) < train_count ? "train" : "test") << ',' << clean_rel << ','
             << bad_rel << '\n';
  }
  if (!manifest) fail(Errc::io, "failed writing manifest '" + manifest_path + "'");
  return manifest_path;
}

Manifest read_manifest(const std::string& path) {
  if (!fs::exists(path)) fail(Errc::not_found, "manifest '" + path + "' does not exist");
  std::ifstream in(path);
  if (!in) fail(Errc::io, "cannot read manifest '" + path + "'");
  const fs::path base = fs::path(path).parent_path();
  Manifest m;
  std::string line;
  bool header_seen = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string tag = "# degradation ";
      if (line.rfind(tag, 0) == 0) m.degradation = line.substr(tag.size());
      continue;
    }
    if (!header_seen) {
      require(line == "id,split,clean,degraded", Errc::format, "manifest '" + path + "' has an unexpected header");
      header_seen = true;
      continue;
    }
    std::vector<std::string> cols;
    std::istringstream ss(line);
    std::string col;
    while (std::getline(ss, col, ',')) cols.push_back(col);
    if (cols.size() != 4) {
      fail(Errc::format, "manifest '" + path + "' line " + std::to_string(line_no) + " needs 4 columns");
    }
    ManifestEntry e{cols[0], cols[1], (base / cols[2]).string(), (base / cols[3]).string()};
    if (!fs::exists(e.clean) || !fs::exists(e.degraded)) {
      fail(Errc::not_found, "manifest '" + path + "' line " + std::to_string(line_no) + " references a missing file");
    }
    m.entries.push_back(std::move(e));
  }
  require(header_seen, Errc::format, "manifest '" + path + "' has no column header");
  return m;
}

std::vector<ManifestEntry> select_split(const Manifest& manifest, const std::string& split) {
  if (split.empty() || split == "all") return manifest.entries;
  std::vector<ManifestEntry> out;
  for (const auto& e : manifest.entries) {
    if (e.split == split) out.push_back(e);
  }
  return out;
}

}  // namespace wavedm
