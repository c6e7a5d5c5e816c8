#include "run_config.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace wavedm::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw UsageError("config key '" + key + "': cannot parse '" + text + "' as a number");
  }
  return value;
}

}  // namespace

RunConfig RunConfig::defaults() {
  RunConfig c;
  const char* env_seed = std::getenv("WAVEDM_SEED");
  c.values_ = {
      {"seed", env_seed && *env_seed ? env_seed : "0"},
      {"out", "wavedm_out"},
      {"manifest", ""},
      {"split", "train"},
      {"eval_split", "test"},
      {"hfrm", ""},
      {"estimator", ""},
      // spectrum and schedule
      {"levels", "2"},
      {"n_low", "3"},
      {"channels", "3"},
      {"gamma", "0"},
      {"steps", "1000"},
      {"beta_start", "0.0001"},
      {"beta_end", "0.02"},
      // networks
      {"width", "32"},
      {"hfrm_width", "32"},
      {"hfrm_blocks", "5"},
      {"residual_v", "1"},
      // training
      {"iterations", "2000"},
      {"hfrm_iterations", "2000"},
      {"batch", "16"},
      {"lr", "0.0002"},
      {"fixed_t", "0"},
      {"ema_decay", "0"},
      {"v_weighting", "1"},
      // sampling
      {"mode", "ecs"},
      {"stride", "100"},
      {"evals", "4"},
      {"sub_steps", "25"},
      // data synthesis
      {"clean_dir", ""},
      {"generate", "0"},
      {"size", "32"},
      {"degradation", "gaussian_noise:sigma=0.098039215686274508"},
      {"holdout", "0"},
      // sweeps
      {"n_list", "3,12,48"},
      {"stride_list", "40,100"},
      {"evals_list", "1,2,4,8"},
      {"levels_list", "1,2,3"},
      {"repeats", "5"},
  };
  return c;
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(number) + ": expected 'key = value'");
    }
    try {
      set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const UsageError& e) {
      throw UsageError(path + ":" + std::to_string(number) + ": " + e.what());
    }
  }
}

void RunConfig::set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw UsageError("override '" + assignment + "' is not key=value");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw UsageError("unknown config key '" + key + "'");
  it->second = value;
}

const std::string& RunConfig::str(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw UsageError("unknown config key '" + key + "'");
  return it->second;
}

int RunConfig::integer(const std::string& key) const { return parse_number<int>(key, str(key)); }
double RunConfig::real(const std::string& key) const { return parse_number<double>(key, str(key)); }
std::uint64_t RunConfig::u64(const std::string& key) const { return parse_number<std::uint64_t>(key, str(key)); }

std::vector<int> RunConfig::int_list(const std::string& key) const {
  std::vector<int> out;
  std::stringstream ss(str(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_number<int>(key, item));
  }
  if (out.empty()) throw UsageError("config key '" + key + "' needs at least one value");
  return out;
}

std::string RunConfig::render() const {
  std::ostringstream out;
  for (const auto& [k, v] : values_) out << k << " = " << v << "\n";
  return out.str();
}

void RunConfig::write_to(const std::string& dir) const {
  std::filesystem::create_directories(dir);
  const std::string path = (std::filesystem::path(dir) / "run_config.txt").string();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << render();
}

}  // namespace wavedm::cli
