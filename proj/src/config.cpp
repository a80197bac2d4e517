#include "pcadapt/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>

#include "pcadapt/error.hpp"
#include "pcadapt/rng.hpp"

namespace pcadapt {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace

Config Config::defaults() {
  Config c;
  c.values_ = {
      {"seed", "1"},
      {"dataset.root", ""},
      {"dataset.synthetic", "false"},
      {"dataset.classes", "sphere,box,cylinder"},
      {"dataset.objects_per_class", "60"},
      {"split.fraction", "0.8"},
      {"split.source_count", "0"},  // 0 = use split.fraction
      {"sample.dense_points", "1024"},
      {"sample.sparse_points", "50"},
      {"model.classes", "0"},  // 0 = number of dataset classes
      {"model.encoder_widths", "64,64,64,128,1024"},
      {"model.head_widths", "512,256"},
      {"train.epochs", "150"},
      {"train.batch", "32"},
      {"train.lr", "0.001"},
      {"train.augment", "true"},
      {"adapt.epochs", "50"},
      {"adapt.batch", "32"},
      {"adapt.lr", "0.001"},
      {"loss.alpha", "10"},
      {"loss.beta", "0.5"},
      {"loss.lambda", "0.5"},
      {"kernel.count", "5"},
      {"kernel.spacing", "2"},
      {"eval.points", "1024,512,256,128,64,50,40,30,20,10"},
  };
  return c;
}

void Config::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open config " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(Errc::bad_config, path.string() + ":" + std::to_string(lineno) + ": expected key=value");
    set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

void Config::apply_env() {
  if (const char* root = std::getenv("PCADAPT_DATASET_ROOT")) set("dataset.root", root);
}

void Config::set_pair(const std::string& pair) {
  const auto eq = pair.find('=');
  if (eq == std::string::npos) fail(Errc::bad_config, "override '" + pair + "' is not key=value");
  set(trim(pair.substr(0, eq)), trim(pair.substr(eq + 1)));
}

void Config::set(const std::string& key, const std::string& value) {
  if (!defaults().values_.count(key)) fail(Errc::bad_config, "unknown config key '" + key + "'");
  values_[key] = value;
}

const std::string& Config::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) fail(Errc::bad_config, "unknown config key '" + key + "'");
  return it->second;
}

std::int64_t Config::get_int(const std::string& key) const {
  try {
    return std::stoll(get(key));
  } catch (const std::exception&) {
    fail(Errc::bad_config, key + " must be an integer, got '" + get(key) + "'");
  }
}

std::uint64_t Config::get_u64(const std::string& key) const {
  const auto v = get_int(key);
  if (v < 0) fail(Errc::bad_config, key + " must be non-negative");
  return static_cast<std::uint64_t>(v);
}

double Config::get_double(const std::string& key) const {
  try {
    return std::stod(get(key));
  } catch (const std::exception&) {
    fail(Errc::bad_config, key + " must be a number, got '" + get(key) + "'");
  }
}

bool Config::get_bool(const std::string& key) const {
  const auto& v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(Errc::bad_config, key + " must be a boolean, got '" + v + "'");
}

std::vector<std::string> Config::get_list(const std::string& key) const {
  std::vector<std::string> out;
  const auto& v = get(key);
  std::size_t at = 0;
  while (at <= v.size()) {
    const auto comma = std::min(v.find(',', at), v.size());
    const auto item = trim(v.substr(at, comma - at));
    if (!item.empty()) out.push_back(item);
    at = comma + 1;
  }
  return out;
}

std::vector<std::size_t> Config::get_sizes(const std::string& key) const {
  std::vector<std::size_t> out;
  for (const auto& item : get_list(key)) {
    try {
      const auto v = std::stoll(item);
      if (v <= 0) throw std::out_of_range("non-positive");
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      fail(Errc::bad_config, key + " must be a list of positive counts");
    }
  }
  return out;
}

std::string Config::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& [k, v] : values_) {  // std::map iterates sorted
    h = fnv1a64(k, h);
    h = fnv1a64("=", h);
    h = fnv1a64(v, h);
    h = fnv1a64("\n", h);
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace pcadapt
