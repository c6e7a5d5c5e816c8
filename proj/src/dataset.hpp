#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "diffusion.hpp"
#include "wavelet.hpp"

namespace wavedm {

enum class DegradationKind { gaussian_noise, box_blur, occlusion_drops };

struct DegradationSpec {
  DegradationKind kind = DegradationKind::gaussian_noise;
  double sigma = 25.0 / 255.0;  // gaussian_noise, on the [0, 1] scale
  int radius = 1;               // box_blur
  int drops = 6;                // occlusion_drops
  double drop_radius = 3.0;
  double opacity = 0.6;
  std::uint64_t seed = 0;

  void validate() const;
  // Single-token description, e.g. "gaussian_noise:sigma=0.098039215686274508".
  std::string describe() const;
};

DegradationSpec parse_degradation(const std::string& text);

// Deterministic in (clean, spec, rng state). Output clamped to [lo, hi].
ImageGrid degrade(const ImageGrid& clean, const DegradationSpec& spec, Rng& rng);

// Piecewise-smooth RGB test image in [0, 1]: a colour ramp, soft-edged
// shapes and a faint periodic texture.
ImageGrid procedural_texture(int size, Rng& rng);

// Writes `count` procedural PNGs named tex0000.png ... into `dir`.
void generate_procedural_corpus(const std::string& dir, int count, int size, std::uint64_t seed);

struct ManifestEntry {
  std::string id;
  std::string split;  // "train" or "test"
  std::string clean;
  std::string degraded;
};

struct Manifest {
  std::string degradation;
  std::vector<ManifestEntry> entries;  // paths resolved against the manifest directory
};

// Degrades every PNG in `clean_dir` (sorted by name) into `out_dir`, the last
// `holdout` images marked as the test split. Returns the manifest path.
std::string synthesize_pairs(const std::string& clean_dir, const DegradationSpec& spec, const std::string& out_dir,
                             int holdout = 0);

Manifest read_manifest(const std::string& path);
std::vector<ManifestEntry> select_split(const Manifest& manifest, const std::string& split);

}  // namespace wavedm
