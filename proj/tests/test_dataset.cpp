#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dataset.hpp"
#include "doctest.h"
#include "errors.hpp"
#include "image.hpp"
#include "metrics.hpp"

using namespace wavedm;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "wavedm_test_dataset" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("procedural corpus is deterministic and in range") {
  const auto a = scratch("corpus_a");
  const auto b = scratch("corpus_b");
  generate_procedural_corpus(a.string(), 4, 32, 7);
  generate_procedural_corpus(b.string(), 4, 32, 7);
  for (const char* name : {"tex0000.png", "tex0003.png"}) CHECK(read_file(a / name) == read_file(b / name));
  CHECK(read_file(a / "tex0000.png") != read_file(a / "tex0001.png"));
  const auto img = load_png((a / "tex0002.png").string());
  CHECK(img.height == 32);
  CHECK(img.channels == 3);
}

TEST_CASE("synthesized pairs are byte-identical across runs") {
  const auto clean = scratch("clean");
  generate_procedural_corpus(clean.string(), 5, 32, 1);
  DegradationSpec spec;
  spec.seed = 11;
  const auto out_a = scratch("pairs_a");
  const auto out_b = scratch("pairs_b");
  synthesize_pairs(clean.string(), spec, out_a.string(), 2);
  synthesize_pairs(clean.string(), spec, out_b.string(), 2);
  for (int i = 0; i < 5; ++i) {
    const std::string name = "degraded/tex000" + std::to_string(i) + ".png";
    CHECK(read_file(out_a / name) == read_file(out_b / name));
  }
  CHECK(read_file(out_a / "manifest.csv") == read_file(out_b / "manifest.csv"));

  const auto m = read_manifest((out_a / "manifest.csv").string());
  CHECK(m.entries.size() == 5);
  CHECK(m.degradation == spec.describe());
  CHECK(select_split(m, "train").size() == 3);
  CHECK(select_split(m, "test").size() == 2);
  CHECK(select_split(m, "all").size() == 5);
  CHECK(select_split(m, "test").front().id == "tex0003");
}

TEST_CASE("zero noise leaves images unchanged") {
  const auto clean = scratch("clean0");
  generate_procedural_corpus(clean.string(), 2, 16, 2);
  DegradationSpec spec;
  spec.sigma = 0.0;
  const auto out = scratch("pairs0");
  synthesize_pairs(clean.string(), spec, out.string());
  CHECK(read_file(out / "clean/tex0001.png") == read_file(out / "degraded/tex0001.png"));
}

TEST_CASE("sigma 25/255 gives about 20.2 dB") {
  Rng rng(3);
  double total = 0.0;
  const int n = 20;
  for (int i = 0; i < n; ++i) {
    const auto clean = procedural_texture(64, rng);
    const auto noisy = degrade(clean, DegradationSpec{}, rng);
    total += psnr(noisy, clean);
  }
  const double analytic = 10.0 * std::log10(1.0 / std::pow(25.0 / 255.0, 2));
  CHECK(analytic == doctest::Approx(20.17).epsilon(1e-3));
  CHECK(std::abs(total / n - 20.2) < 0.3);
}

TEST_CASE("degradation kinds and parsing") {
  const auto spec = parse_degradation("gaussian_noise:sigma255=25,seed=7");
  CHECK(spec.kind == DegradationKind::gaussian_noise);
  CHECK(spec.sigma == doctest::Approx(25.0 / 255.0));
  CHECK(spec.seed == 7);
  CHECK(parse_degradation("box_blur:radius=2").radius == 2);
  CHECK(parse_degradation("occlusion_drops:drops=3,opacity=0.5").drops == 3);
  CHECK_THROWS_AS(parse_degradation("rain"), Error);
  CHECK_THROWS_AS(parse_degradation("gaussian_noise:sigma=2"), Error);
  CHECK_THROWS_AS(parse_degradation("box_blur:radius=x"), Error);
  CHECK_THROWS_AS(parse_degradation("box_blur:size=3"), Error);

  Rng rng(4);
  const auto clean = procedural_texture(32, rng);
  for (const char* text : {"box_blur:radius=1", "occlusion_drops:drops=4"}) {
    Rng a(5), b(5);
    const auto s = parse_degradation(text);
    const auto x = degrade(clean, s, a);
    CHECK(x.data == degrade(clean, s, b).data);
    CHECK(x.data != clean.data);
    for (double v : x.data) CHECK((v >= 0.0 && v <= 1.0));
  }
}

TEST_CASE("missing inputs are reported") {
  CHECK_THROWS_AS(synthesize_pairs("/nonexistent/dir", DegradationSpec{}, scratch("x").string()), Error);
  try {
    read_manifest("/nonexistent/manifest.csv");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::not_found);
  }
  const auto dir = scratch("broken");
  std::ofstream(dir / "manifest.csv") << "# wavedm manifest v1\nid,split,clean,degraded\na,train,clean/a.png,degraded/a.png\n";
  try {
    read_manifest((dir / "manifest.csv").string());
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::not_found);
  }
}
